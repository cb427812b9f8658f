# Aggregation of trial tables into per-architecture summaries, per-M_t computation curves and
# accuracy series, rendered as CSV and SVG.
# Date: 2026-10-19
# Version: 0.1.0

from pathlib import Path
from typing import Dict, Optional, Sequence, Union

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
import pandas as pd  # noqa: E402

from app.models.harness import Architecture, ArchitectureSummary, BatchReport, CurvePoint  # noqa: E402
from app.models.prediction import PredictedTrajectory, PredictorLevel  # noqa: E402
from app.models.risk import RiskAssessment  # noqa: E402
from app.utils.logger import console  # noqa: E402

LEVEL_COLORS = {PredictorLevel.SIMPLE: "tab:gray", PredictorLevel.ACCURATE: "tab:red", PredictorLevel.FAST: "tab:orange"}


def _optional(value) -> Optional[float]:
    return None if value is None or pd.isna(value) else float(value)


def summarize(trials: pd.DataFrame, steps: Optional[pd.DataFrame] = None, delta: Optional[float] = None) -> BatchReport:
    """
    Per-architecture aggregates. Rates are over trials that ran; travel statistics are over
    successful trials only.
    """
    if trials is None or trials.empty:
        raise ValueError("Cannot aggregate an empty trial table.")
    has_error = trials["error"].notna() if "error" in trials else pd.Series(False, index=trials.index)
    summaries = []
    for architecture, group in trials.groupby("architecture", sort=False):
        ran = group[~has_error.loc[group.index]]
        successes = ran[ran["success"].astype(bool)]
        per_step = None
        if steps is not None and not steps.empty:
            per_step = steps[steps["architecture"] == architecture]
        feasible = int(ran["feasible_steps"].sum()) if "feasible_steps" in ran else 0
        count = max(len(ran), 1)
        summaries.append(ArchitectureSummary(
            architecture=Architecture(architecture),
            trials=len(ran),
            success_rate=100.0 * successes.shape[0] / count,
            collision_rate=100.0 * float(ran["collision"].astype(bool).sum()) / count,
            deadlock_rate=100.0 * float(ran["deadlock"].astype(bool).sum()) / count,
            travel_mean=_optional(successes["travel_steps"].mean()) if len(successes) else None,
            travel_std=_optional(successes["travel_steps"].std(ddof=0)) if len(successes) else None,
            prediction_time_mean_s=float(per_step["prediction_time_s"].mean()) if per_step is not None and len(per_step) else 0.0,
            mpc_time_mean_s=float(per_step["mpc_time_s"].mean()) if per_step is not None and len(per_step) else 0.0,
            total_time_mean_s=float((per_step["prediction_time_s"] + per_step["mpc_time_s"]).mean())
            if per_step is not None and len(per_step) else 0.0,
            calls_level1=int(ran["calls_level1"].sum()),
            calls_level2=int(ran["calls_level2"].sum()),
            calls_total=int(ran["calls_level1"].sum() + ran["calls_level2"].sum()),
            safety_frequency=float(ran["safe_steps"].sum()) / feasible if feasible else None,
        ))
    return BatchReport(summaries=summaries, curves=computation_curves(steps), errors=int(has_error.sum()))


def computation_curves(steps: Optional[pd.DataFrame]) -> list:
    """Mean prediction, MPC and total time per step, binned by M_t."""
    if steps is None or steps.empty:
        return []
    frame = steps.assign(total_time_s=steps["prediction_time_s"] + steps["mpc_time_s"])
    grouped = frame.groupby(["architecture", "m_t"], sort=True).agg(
        samples=("t", "size"), prediction_s=("prediction_time_s", "mean"),
        mpc_s=("mpc_time_s", "mean"), total_s=("total_time_s", "mean")).reset_index()
    return [CurvePoint(architecture=Architecture(row.architecture), m_t=int(row.m_t), samples=int(row.samples),
                       prediction_s=float(row.prediction_s), mpc_s=float(row.mpc_s), total_s=float(row.total_s))
            for row in grouped.itertuples(index=False)]


def e_series(steps: pd.DataFrame) -> pd.DataFrame:
    """Mean accuracy metric E per (architecture, t) over the trials that predicted at that step."""
    if steps is None or steps.empty or "e" not in steps:
        return pd.DataFrame(columns=["architecture", "t", "e_mean", "samples"])
    valid = steps.dropna(subset=["e"])
    return (valid.groupby(["architecture", "t"], sort=True)["e"].agg(["mean", "size"])
            .rename(columns={"mean": "e_mean", "size": "samples"}).reset_index())


def _plot_curves(curves: pd.DataFrame, path: Path) -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    for architecture, group in curves.groupby("architecture", sort=False):
        ax.plot(group["m_t"], 1e3 * group["total_s"], marker="o", label=f"{architecture} total")
        ax.plot(group["m_t"], 1e3 * group["prediction_s"], linestyle="--", label=f"{architecture} prediction")
    ax.set_xlabel("obstacles in M_t")
    ax.set_ylabel("time per step (ms)")
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)


def _plot_e_series(series: pd.DataFrame, path: Path) -> None:
    fig, ax = plt.subplots(figsize=(6, 3))
    for architecture, group in series.groupby("architecture", sort=False):
        ax.plot(group["t"], group["e_mean"], label=str(architecture))
    ax.set_xlabel("time step")
    ax.set_ylabel("E")
    ax.set_ylim(0.0, 1.05)
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)


def aggregate_report(in_dir: Union[str, Path], out_dir: Union[str, Path]) -> BatchReport:
    """Reads trials.csv (and steps.csv when present) and writes the summary tables and plots."""
    source, out = Path(in_dir), Path(out_dir)
    trials_path = source / "trials.csv"
    if not trials_path.is_file():
        raise FileNotFoundError(f"No trials.csv in {source}.")
    trials = pd.read_csv(trials_path)
    steps_path = source / "steps.csv"
    steps = pd.read_csv(steps_path) if steps_path.is_file() and steps_path.stat().st_size else None
    report = summarize(trials, steps)

    out.mkdir(parents=True, exist_ok=True)
    summary = pd.DataFrame([s.model_dump(mode="json") for s in report.summaries])
    summary.to_csv(out / "summary.csv", index=False)
    proximity = summary[["architecture", "success_rate", "calls_level1", "calls_level2", "calls_total"]]
    proximity.to_csv(out / "proximity.csv", index=False)
    console.display_frame(list(summary.columns), summary.itertuples(index=False), "Architecture summary")

    if report.curves:
        curves = pd.DataFrame([c.model_dump(mode="json") for c in report.curves])
        curves.to_csv(out / "curves.csv", index=False)
        _plot_curves(curves, out / "curves.svg")
    if steps is not None:
        series = e_series(steps)
        series.to_csv(out / "e_series.csv", index=False)
        if not series.empty:
            _plot_e_series(series, out / "e_series.svg")
    console.success(f"Report written to {out}.")
    return report


def render_snapshot(world, assessments: Sequence[RiskAssessment], predictions: Sequence[PredictedTrajectory],
                    plan_states: Optional[np.ndarray], path: Union[str, Path]) -> Path:
    """
    SVG of one step: workspace, agent with its sensing disc and plan, obstacles colored by routed
    level and the conformal discs of every constrained prediction.
    """
    config = world.config
    x_min, y_min, x_max, y_max = config.bounds
    routes: Dict[int, PredictorLevel] = {a.obstacle_id: a.route for a in assessments}
    fig, ax = plt.subplots(figsize=(6, 6))
    ax.set_xlim(x_min, x_max)
    ax.set_ylim(y_min, y_max)
    ax.set_aspect("equal")

    agent = world.agent
    ax.add_patch(plt.Circle((agent.x, agent.y), config.sensing_radius, fill=False, linestyle=":", color="tab:blue"))
    ax.add_patch(plt.Circle((agent.x, agent.y), config.agent_radius, color="tab:blue"))
    ax.add_patch(plt.Circle(config.goal, config.goal_radius, color="tab:green", alpha=0.3))
    if plan_states is not None:
        ax.plot(plan_states[:, 0], plan_states[:, 1], color="tab:blue", linewidth=1)

    for track in world.obstacles:
        level = routes.get(track.id)
        color = LEVEL_COLORS.get(level, "black") if level is not None else "black"
        ax.add_patch(plt.Circle(tuple(track.position), track.radius, color=color))
    for prediction in predictions:
        points = prediction.as_array()
        color = LEVEL_COLORS[prediction.predictor]
        ax.plot(points[:, 0], points[:, 1], color=color, linewidth=0.8)
        for (x, y), radius in zip(points, prediction.radii):
            ax.add_patch(plt.Circle((x, y), radius, fill=False, color=color, alpha=0.3, linewidth=0.5))

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, format="svg")
    plt.close(fig)
    return path
