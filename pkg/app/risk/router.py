# Hysteresis router: maps a P-CRI value to a predictor level while suppressing chatter near the
# thresholds.
# Date: 2026-10-19
# Version: 0.1.0

from typing import Tuple

from app.models.prediction import PredictorLevel
from app.models.risk import HysteresisState, RouterConfig


def band_of(psi: float, config: RouterConfig) -> PredictorLevel:
    """Raw band without memory: low -> 0, medium -> 2, high -> 1."""
    low, high = config.thresholds
    if psi < low:
        return PredictorLevel.SIMPLE
    if psi < high:
        return PredictorLevel.FAST
    return PredictorLevel.ACCURATE


def route(psi: float, state: HysteresisState, config: RouterConfig) -> Tuple[PredictorLevel, HysteresisState]:
    """
    Upgrades take effect on the call that crosses a threshold. A downgrade needs psi to stay below
    the current band's lower threshold minus eta for D consecutive calls; any other call resets
    the counter. Returns the level to use now and the new state.
    """
    raw = band_of(psi, config)
    current = PredictorLevel(state.band)
    if raw.risk_rank > current.risk_rank:
        return raw, HysteresisState(band=raw, below_count=0)
    if raw.risk_rank == current.risk_rank:
        return current, HysteresisState(band=current, below_count=0)

    if psi < config.lower_threshold(current) - config.hysteresis_margin:
        count = state.below_count + 1
        if count >= config.dwell_steps:
            return raw, HysteresisState(band=raw, below_count=0)
        return current, HysteresisState(band=current, below_count=count)
    return current, HysteresisState(band=current, below_count=0)
