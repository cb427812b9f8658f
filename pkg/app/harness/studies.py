# Timing and calibration studies: the forced-allocation accuracy/time trade-off and the proximity
# threshold sweeps.
# Date: 2026-10-19
# Version: 0.1.0

import dataclasses
import time
from pathlib import Path
from typing import Dict, List, Literal, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from app.harness.batch import run_batch
from app.harness.lab import LabContext
from app.harness.metrics import compute_E, lemma_time
from app.models.harness import Architecture, ScenarioSpec
from app.models.prediction import PredictedTrajectory, PredictorLevel
from app.models.risk import RouterConfig
from app.models.world import AgentState
from app.planner.mpc import build_constraints, solve_mpc
from app.predictors.calibration import measure_prediction_costs
from app.utils.logger import console


@dataclasses.dataclass
class TradeoffResult:
    """Per-allocation measurements plus the affine fit of prediction time against M1."""
    frame: pd.DataFrame
    costs: Dict[PredictorLevel, float]
    slope: float
    intercept: float
    r_squared: float


@dataclasses.dataclass
class SweepResult:
    target: str
    architecture: Architecture
    reference: float
    thresholds: Tuple[float, float]
    achieved: float
    matched: bool
    grid: pd.DataFrame


def default_allocations(total: int = 8) -> List[Tuple[int, int]]:
    return [(m1, total - m1) for m1 in range(total, -1, -1)]


def _high_risk_scene(count: int, window: int, dt: float, seed: int):
    """Agent heading +x toward a goal 16 m ahead; `count` obstacles 1.5-5 m ahead closing in on its path."""
    rng = np.random.default_rng(seed)
    agent = AgentState(x=2.0, y=10.0, heading=0.0)
    goal = (18.0, 10.0)
    histories = []
    for i in range(count):
        anchor = np.array([3.5 + 0.6 * i, 10.0 + (0.9 if i % 2 else -0.9) + rng.uniform(-0.1, 0.1)])
        velocity = np.array([-0.5, 0.0]) + rng.uniform(-0.05, 0.05, size=2)
        steps = np.arange(-window, 1, dtype=float)[:, None]
        histories.append(anchor + steps * dt * velocity)
    return agent, goal, histories


def _r_squared(x: np.ndarray, y: np.ndarray) -> Tuple[float, float, float]:
    slope, intercept = np.polyfit(x, y, 1)
    fitted = slope * x + intercept
    total = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum((y - fitted) ** 2)) / total if total > 0.0 else 1.0
    return float(slope), float(intercept), r2


def tradeoff_study(context: LabContext, allocations: Optional[Sequence[Tuple[int, int]]] = None,
                   repeats: int = 20, seed: int = 0, cost_calls: int = 200) -> TradeoffResult:
    """
    Router bypassed: for each forced (M1, M2) the same high-risk obstacles are predicted with the
    allocated levels, then planned around. Times are means over `repeats`.
    """
    allocations = list(allocations or default_allocations())
    totals = {m1 + m2 for m1, m2 in allocations}
    if len(totals) != 1:
        raise ValueError("All allocations must share the same M1 + M2.")
    total = totals.pop()
    H = context.horizon
    world = context.config.world
    agent, goal, histories = _high_risk_scene(total, context.config.predictors.window, world.dt, seed)
    costs = context.costs or measure_prediction_costs(context.registry, H, cost_calls)
    radii_by_id = {k: world.obstacle_radius for k in range(1, total + 1)}

    rows = []
    for m1, m2 in console.track(allocations, description="Trade-off allocations"):
        levels = [PredictorLevel.ACCURATE] * m1 + [PredictorLevel.FAST] * m2
        prediction_times, mpc_times = [], []
        for _ in range(repeats):
            predictions = []
            started = time.perf_counter()
            for k, (level, history) in enumerate(zip(levels, histories), start=1):
                outcome = context.registry.predict(level, history, H)
                radii = context.table.radii(level, total).epsilon[:H]
                predictions.append(PredictedTrajectory(obstacle_id=k, predictor=level, base_time=0,
                                                       points=[tuple(p) for p in outcome.points.tolist()],
                                                       radii=radii.tolist()))
            prediction_times.append(time.perf_counter() - started)
            constraints = build_constraints(predictions, radii_by_id, world.agent_radius,
                                            context.plan.lipschitz, H)
            mpc_times.append(solve_mpc(agent, goal, constraints, None, context.plan).solve_time)
        prediction = float(np.mean(prediction_times))
        mpc = float(np.mean(mpc_times))
        rows.append({
            "m1": m1, "m2": m2,
            "e": compute_E(m1, m2, context.table.eps_tilde(PredictorLevel.ACCURATE, total),
                           context.table.eps_tilde(PredictorLevel.FAST, total)),
            "prediction_time_s": prediction,
            "mpc_time_s": mpc,
            "total_time_s": prediction + mpc,
            "theory_s": lemma_time(m1, m2, costs[PredictorLevel.ACCURATE], costs[PredictorLevel.FAST]),
        })
    frame = pd.DataFrame(rows)
    slope, intercept, r2 = _r_squared(frame["m1"].to_numpy(float), frame["prediction_time_s"].to_numpy(float))
    console.info(f"Prediction time vs M1: slope={slope:.3e}s, R^2={r2:.3f}.")
    return TradeoffResult(frame=frame, costs=costs, slope=slope, intercept=intercept, r_squared=r2)


def threshold_grid(step: float = 0.1) -> List[Tuple[float, float]]:
    values = np.round(np.arange(step, 1.0, step), 6)
    return [(float(low), float(high)) for i, low in enumerate(values) for high in values[i + 1:]]


def _with_proximity(context: LabContext, architecture: Architecture, thresholds: Tuple[float, float]) -> LabContext:
    router = context.config.router
    replacement = getattr(router, "proximity_a" if architecture is Architecture.PROX_A else "proximity_b")
    replacement = RouterConfig(**{**replacement.model_dump(), "thresholds": thresholds})
    key = "proximity_a" if architecture is Architecture.PROX_A else "proximity_b"
    config = context.config.model_copy(update={"router": router.model_copy(update={key: replacement})})
    return dataclasses.replace(context, config=config)


def sweep(context: LabContext, specs: Sequence[ScenarioSpec], target: Literal["calls", "success"],
          grid: Optional[Sequence[Tuple[float, float]]] = None, parallelism: int = 1,
          artifact_root: Optional[str] = None) -> SweepResult:
    """
    Searches proximity thresholds against the P-CRI router on the same scenarios.
    calls: Prox.A, the pair whose total model calls are closest to the reference (match within 5%).
    success: Prox.B, among pairs within 1 point of the reference success rate the one with the
    fewest calls, else the closest success rate.
    """
    architecture = Architecture.PROX_A if target == "calls" else Architecture.PROX_B
    reference_report, _, _ = run_batch(specs, [Architecture.HYPRAP], context, parallelism=parallelism,
                                       artifact_root=artifact_root)
    reference = reference_report.summaries[0]
    reference_value = float(reference.calls_total if target == "calls" else reference.success_rate)

    rows = []
    for thresholds in grid or threshold_grid():
        trial_context = _with_proximity(context, architecture, thresholds)
        report, _, _ = run_batch(specs, [architecture], trial_context, parallelism=parallelism,
                                 artifact_root=artifact_root)
        summary = report.summaries[0]
        rows.append({"theta_1": thresholds[0], "theta_2": thresholds[1], "calls_total": summary.calls_total,
                     "success_rate": summary.success_rate})
    frame = pd.DataFrame(rows)

    if target == "calls":
        gap = (frame["calls_total"] - reference_value).abs() / max(reference_value, 1.0)
        best = frame.loc[gap.idxmin()]
        achieved, matched = float(best["calls_total"]), bool(gap.min() <= 0.05)
    else:
        gap = (frame["success_rate"] - reference_value).abs()
        within = frame[gap <= 1.0]
        best = within.loc[within["calls_total"].idxmin()] if not within.empty else frame.loc[gap.idxmin()]
        achieved, matched = float(best["success_rate"]), not within.empty
    thresholds = (float(best["theta_1"]), float(best["theta_2"]))
    if not matched:
        console.warning(f"No {architecture.value} thresholds matched the reference {target}; using the closest.")
    console.success(f"{architecture.value}: thresholds {thresholds}, {target}={achieved} (reference {reference_value}).")
    return SweepResult(target=target, architecture=architecture, reference=reference_value, thresholds=thresholds,
                       achieved=achieved, matched=matched, grid=frame)


def write_sweep(result: SweepResult, out_dir: Union[str, Path]) -> Path:
    """Writes the grid as CSV and the chosen thresholds as a TOML fragment for the lab config."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    result.grid.to_csv(out / f"sweep_{result.target}.csv", index=False)
    section = "proximity_a" if result.architecture is Architecture.PROX_A else "proximity_b"
    fragment = out / f"{section}.toml"
    fragment.write_text(
        f"# {result.target} sweep: reference {result.reference}, achieved {result.achieved}, "
        f"matched={str(result.matched).lower()}\n"
        f"[router.{section}]\nthresholds = [{result.thresholds[0]}, {result.thresholds[1]}]\n")
    return fragment
