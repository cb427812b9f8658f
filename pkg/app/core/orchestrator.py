# The closed-loop step runner: sense, assess risk, route, predict with conformal radii, solve the
# MPC, apply the first input.
# Date: 2026-10-19
# Version: 4.0.0

import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Union

import numpy as np

from app.harness.lab import LabContext
from app.harness.metrics import compute_E
from app.harness.scenario import generate_scenario
from app.models.harness import Architecture, ObstacleStep, ScenarioSpec, StepRecord, TrialMetrics
from app.models.planning import PlanResult, PlanStatus, RealizedTrack, SafetyObservation
from app.models.prediction import PredictedTrajectory, PredictorLevel
from app.models.risk import HysteresisState, RiskAssessment
from app.models.world import ControlInput
from app.planner.mpc import ShootingProblem, build_constraints, cold_start, fallback_brake, solve_mpc
from app.planner.safety import check_empirical_safety
from app.risk.pcri import approach_profile, compute_pcri, proximity_risk
from app.risk.router import route
from app.services.trace_writer import TraceWriter
from app.sim.world import World


@dataclass
class TrialOutcome:
    metrics: TrialMetrics
    records: List[StepRecord] = field(default_factory=list)
    safety: List[SafetyObservation] = field(default_factory=list)


@dataclass
class _ObstacleMemory:
    """What the agent has observed of one obstacle, contiguous up to the last sensed step."""
    history: List[np.ndarray] = field(default_factory=list)
    last_seen: int = -1
    track: Optional[np.ndarray] = None  # (H + 1, 2) positions from the previous step's prediction
    hysteresis: HysteresisState = field(default_factory=HysteresisState)


def _window(states: np.ndarray, offset: int, length: int) -> np.ndarray:
    """`length` planned positions starting `offset` steps into the plan, padded with the last one."""
    positions = states[offset:offset + length, :2]
    if len(positions) < length:
        positions = np.concatenate([positions, np.repeat(states[-1:, :2], length - len(positions), axis=0)])
    return positions


def _risk(architecture: Architecture, context: LabContext, memory: _ObstacleMemory, distance: float,
          plan_states: np.ndarray, plan_base: int, t: int, world: World) -> float:
    router = context.router_for(architecture)
    if architecture.uses_proximity:
        return proximity_risk(distance, router)
    H = context.horizon
    if memory.track is not None:
        agent_plan = _window(plan_states, t - 1 - plan_base, H + 1)
        obstacle_track = memory.track
        agent_previous = world.agent_history[t - 2].position if t >= 2 else None
        obstacle_previous = memory.history[-3] if len(memory.history) >= 3 else None
    else:
        # Newly sensed: level-0 prediction from the current history against the plan shifted to t.
        outcome = context.registry.predict(PredictorLevel.SIMPLE, np.asarray(memory.history), H)
        obstacle_track = np.concatenate([memory.history[-1][None, :], outcome.points])
        agent_plan = _window(plan_states, t - plan_base, H + 1)
        agent_previous = world.agent_history[t - 1].position if t >= 1 else None
        obstacle_previous = memory.history[-2] if len(memory.history) >= 2 else None
    profile = approach_profile(agent_plan, obstacle_track, world.config.dt, agent_previous, obstacle_previous)
    return compute_pcri(profile, router)


def _safety_observations(records: List[StepRecord], plans: Dict[int, np.ndarray], world: World,
                         horizon: int) -> List[SafetyObservation]:
    observations = []
    for record in records:
        if not record.status.is_feasible or record.t not in plans:
            continue
        tracks = []
        for obstacle_id in record.m_ids:
            track = world.tracks[obstacle_id]
            positions = []
            for h in range(1, horizon + 1):
                point = track.position_at(record.t + h)
                if point is None:
                    break
                positions.append((float(point[0]), float(point[1])))
            tracks.append(RealizedTrack(obstacle_id=obstacle_id, radius=track.radius, positions=positions))
        planned = [(float(x), float(y)) for x, y in plans[record.t][:horizon + 1, :2]]
        observations.append(SafetyObservation(t=record.t, status=record.status, planned=planned,
                                              agent_radius=world.config.agent_radius, obstacles=tracks))
    return observations


def run_scenario(spec: ScenarioSpec, architecture: Architecture, context: LabContext,
                 trace_path: Optional[Union[str, Path]] = None, snapshot_at: Optional[int] = None,
                 snapshot_path: Optional[Union[str, Path]] = None) -> TrialOutcome:
    """
    Runs one trial until the goal, a collision, a deadlock or max_steps.
    Planner infeasibility is recorded, never raised.
    """
    architecture = Architecture(architecture)
    world = generate_scenario(spec)
    config, plan_cfg, table = world.config, context.plan, context.table
    H = context.horizon
    metrics = TrialMetrics(seed=spec.seed, architecture=architecture, n_obstacles=spec.n_obstacles)
    memories: Dict[int, _ObstacleMemory] = {}
    records: List[StepRecord] = []
    plans: Dict[int, np.ndarray] = {}

    # Before the first solve the "previous plan" is the cold-start rollout anchored at t = 0.
    initial = ShootingProblem(world.agent, config.goal, build_constraints([], {}, config.agent_radius), plan_cfg)
    plan_states = initial.rollout(cold_start(world.agent, config.goal, plan_cfg))
    plan_base = 0
    warm: Optional[PlanResult] = None
    current_speed = 0.0
    consecutive_fallbacks = 0

    with TraceWriter(trace_path) as trace:
        while world.t < config.max_steps:
            t = world.t
            sensed = world.sense()
            for obstacle in sensed:
                memory = memories.setdefault(obstacle.id, _ObstacleMemory())
                if memory.last_seen != t - 1:
                    memory.history, memory.track = [], None
                memory.history.append(np.asarray(obstacle.position, dtype=float))
                memory.last_seen = t

            # Risk assessment and routing.
            steps: List[ObstacleStep] = []
            routed: Dict[int, PredictorLevel] = {}
            for obstacle in sensed:
                memory = memories[obstacle.id]
                psi = _risk(architecture, context, memory, obstacle.distance, plan_states, plan_base, t, world)
                level, memory.hysteresis = route(psi, memory.hysteresis, context.router_for(architecture))
                if level is not PredictorLevel.SIMPLE and architecture.forced_level is not None:
                    level = architecture.forced_level
                routed[obstacle.id] = level
                steps.append(ObstacleStep(id=obstacle.id, distance=obstacle.distance, psi=psi, level=level))
            m_ids = [k for k, level in routed.items() if level is not PredictorLevel.SIMPLE]
            m_t = len(m_ids)

            # Prediction for M_t with conformal radii.
            predictions: List[PredictedTrajectory] = []
            clamped = False
            started = time.perf_counter()
            for k in m_ids:
                level = routed[k]
                outcome = context.registry.predict(level, np.asarray(memories[k].history), H)
                metrics.calls[int(outcome.used)] += 1
                radii, was_clamped = table.radii(level, m_t)
                clamped |= was_clamped
                if outcome.fallback:
                    metrics.fallback_predictions += 1
                    next(step for step in steps if step.id == k).fallback = True
                predictions.append(PredictedTrajectory(
                    obstacle_id=k, predictor=level, base_time=t,
                    points=[(float(x), float(y)) for x, y in outcome.points],
                    radii=[float(r) for r in radii[:H]], fallback=outcome.fallback))
            prediction_time = time.perf_counter() - started
            metrics.clamp_count += int(clamped)

            # Level-0 predictions keep PAD/PAT defined next step for the remaining obstacles.
            tracks_next: Dict[int, np.ndarray] = {p.obstacle_id: p.as_array() for p in predictions}
            for obstacle in sensed:
                if obstacle.id not in tracks_next:
                    outcome = context.registry.predict(PredictorLevel.SIMPLE, np.asarray(memories[obstacle.id].history), H)
                    metrics.calls[0] += 1
                    tracks_next[obstacle.id] = outcome.points
            for obstacle in sensed:
                memory = memories[obstacle.id]
                memory.track = np.concatenate([memory.history[-1][None, :], tracks_next[obstacle.id]])

            # MPC.
            radii_by_id = {k: world.tracks[k].radius for k in m_ids}
            constraints = build_constraints(predictions, radii_by_id, config.agent_radius, plan_cfg.lipschitz, H)
            result = solve_mpc(world.agent, config.goal, constraints, warm, plan_cfg)
            mpc_time = result.solve_time
            if result.status is PlanStatus.INFEASIBLE_FALLBACK:
                consecutive_fallbacks += 1
                metrics.fallback_steps += 1
                applied = fallback_brake(world.agent, plan_cfg, current_speed)
                warm = None
            else:
                consecutive_fallbacks = 0
                applied = result
                warm = result
            plans[t] = result.states
            plan_states, plan_base = applied.states, t

            m1 = sum(1 for k in m_ids if routed[k] is PredictorLevel.ACCURATE)
            m2 = m_t - m1
            e_value = None
            if m_t:
                e_value = compute_E(m1, m2, table.eps_tilde(PredictorLevel.ACCURATE, m_t),
                                    table.eps_tilde(PredictorLevel.FAST, m_t))
            record = StepRecord(t=t, agent=tuple(float(v) for v in world.agent.as_array()), n_sensed=len(sensed),
                                m_ids=list(constraints.obstacle_ids), m1=m1, m2=m2, obstacles=steps,
                                status=result.status, max_violation=result.max_violation,
                                iterations=result.iterations, penalty=result.penalty, clamped=clamped,
                                e_value=e_value, prediction_time_s=prediction_time, mpc_time_s=mpc_time)
            trace.write(record)
            if snapshot_path is not None and t == (snapshot_at or 0):
                from app.harness.report import render_snapshot

                assessments = [RiskAssessment(obstacle_id=s.id, psi=min(max(s.psi, 0.0), 1.0), route=s.level,
                                              hysteresis=memories[s.id].hysteresis) for s in steps]
                render_snapshot(world, assessments, predictions, applied.states, snapshot_path)
            records.append(record)
            metrics.m_t.append(m_t)
            metrics.m1.append(m1)
            metrics.m2.append(m2)
            metrics.n_t.append(len(sensed))
            metrics.prediction_time_s.append(prediction_time)
            metrics.mpc_time_s.append(mpc_time)
            metrics.e_series.append(e_value)

            v, omega = applied.first_control
            world.step(ControlInput(linear_velocity=v, angular_velocity=omega))
            current_speed = v
            if world.in_collision():
                metrics.collision = True
                break
            if world.reached_goal():
                metrics.success = True
                break
            if consecutive_fallbacks > plan_cfg.deadlock_steps:
                metrics.deadlock = True
                break
        else:
            metrics.timeout = True

    metrics.travel_steps = world.t
    safety = _safety_observations(records, plans, world, H)
    if safety:
        report = check_empirical_safety(safety, context.config.conformal.delta)
        metrics.feasible_steps, metrics.safe_steps = report.n_steps, report.n_safe
    return TrialOutcome(metrics=metrics, records=records, safety=safety)
