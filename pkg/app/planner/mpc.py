# Receding-horizon MPC for the differential-drive agent: direct single shooting with adjoint
# gradients, an outer quadratic-penalty loop and projected-gradient inner steps.
# Date: 2026-10-19
# Version: 0.2.0

import time
from typing import List, Optional, Sequence, Tuple

import numpy as np

from app.models.planning import ConstraintSet, PlanConfig, PlanResult, PlanStatus
from app.models.prediction import PredictedTrajectory, PredictorLevel
from app.models.world import AgentState, ControlInput, wrap_angle
from app.sim.dynamics import step_agent

# Floor on obstacle distances inside the penalty gradient.
MIN_DISTANCE = 1e-9
# Line-search halvings before an inner step is declared stalled.
MAX_HALVINGS = 50
# Linear-velocity scales tried, largest first, when the penalty solution still violates a margin.
RESTORATION_SCALES = (0.75, 0.5, 0.25, 0.1, 0.0)


def rollout_dynamics(x0: AgentState, controls: Sequence, dt: float = 0.1,
                     v_max: float = 1.5, omega_max: float = 1.5) -> List[AgentState]:
    """Forward simulation of T inputs under step_agent; returns the T + 1 visited states."""
    states = [x0]
    for v, omega in np.asarray(controls, dtype=float).reshape(-1, 2):
        states.append(step_agent(states[-1], ControlInput(linear_velocity=v, angular_velocity=omega),
                                 dt, v_max, omega_max))
    return states


def collision_margin(state: AgentState, obstacle_point, margin: float) -> float:
    """Signed slack ||p_A - y|| - margin; the constraint holds iff the result is >= 0."""
    return float(np.linalg.norm(state.position - np.asarray(obstacle_point, dtype=float))) - margin


def build_constraints(predictions: Sequence[PredictedTrajectory], obstacle_radii: dict, agent_radius: float,
                      lipschitz: float = 1.0, horizon: Optional[int] = None) -> ConstraintSet:
    """Margins r_A + r_k + L eps[h] for every level-1/level-2 prediction; level 0 never constrains."""
    routed = [p for p in predictions if p.predictor is not PredictorLevel.SIMPLE and p.radii]
    if not routed:
        return ConstraintSet()
    horizon = horizon or min(p.horizon for p in routed)
    points = np.stack([p.as_array()[:horizon] for p in routed])
    base = np.array([agent_radius + obstacle_radii[p.obstacle_id] for p in routed])
    margins = base[:, None] + lipschitz * np.stack([np.asarray(p.radii[:horizon], dtype=float) for p in routed])
    return ConstraintSet(obstacle_ids=[p.obstacle_id for p in routed], points=points,
                         margins=margins, base_margins=base)


class ShootingProblem:
    """
    Merit function J(u) + rho * sum max(0, -c)^2 over the control vector u in R^{T x 2}.

    States are rolled out in closed form: theta = theta0 + dt cumsum(omega), positions by
    cumulative sums of dt v (cos theta, sin theta). Headings are not wrapped inside the solver.
    """
    def __init__(self, x0: AgentState, goal, constraints: ConstraintSet, config: PlanConfig):
        self.x0 = x0.as_array()
        self.goal = np.asarray(goal, dtype=float)
        self.constraints = constraints
        self.config = config
        self.T = config.planning_horizon
        self.H = min(constraints.horizon, config.prediction_horizon, self.T) if constraints.count else 0
        self.lower = np.array([0.0, -config.omega_max])
        self.upper = np.array([config.v_max, config.omega_max])

    def project(self, controls: np.ndarray) -> np.ndarray:
        return np.clip(controls, self.lower, self.upper)

    def rollout(self, controls: np.ndarray) -> np.ndarray:
        dt = self.config.dt
        v, omega = controls[:, 0], controls[:, 1]
        theta = np.concatenate(([self.x0[2]], self.x0[2] + dt * np.cumsum(omega)))
        x = np.concatenate(([self.x0[0]], self.x0[0] + dt * np.cumsum(v * np.cos(theta[:-1]))))
        y = np.concatenate(([self.x0[1]], self.x0[1] + dt * np.cumsum(v * np.sin(theta[:-1]))))
        return np.stack([x, y, theta], axis=1)

    def slacks(self, states: np.ndarray) -> np.ndarray:
        """(K, H) signed margins c~ at steps 1..H."""
        if not self.H:
            return np.empty((0, 0))
        offsets = states[None, 1:self.H + 1, :2] - self.constraints.points[:, :self.H]
        return np.linalg.norm(offsets, axis=-1) - self.constraints.margins[:, :self.H]

    def max_violation(self, states: np.ndarray) -> float:
        slacks = self.slacks(states)
        return float(max(0.0, -slacks.min())) if slacks.size else 0.0

    def cost(self, controls: np.ndarray, states: np.ndarray) -> float:
        cfg = self.config
        errors = states[:, :2] - self.goal
        squared = np.einsum("ij,ij->i", errors, errors)
        return float(cfg.q_position * squared[:-1].sum() + cfg.q_terminal * squared[-1]
                     + cfg.r_control * np.sum(controls ** 2))

    def merit(self, controls: np.ndarray, rho: float) -> float:
        states = self.rollout(controls)
        violation = np.maximum(0.0, -self.slacks(states))
        return self.cost(controls, states) + rho * float(np.sum(violation ** 2))

    def gradient(self, controls: np.ndarray, rho: float) -> Tuple[float, np.ndarray]:
        """Merit value and its adjoint gradient with respect to the (T, 2) controls."""
        cfg = self.config
        dt = cfg.dt
        states = self.rollout(controls)
        v, theta = controls[:, 0], states[:-1, 2]

        errors = states[:, :2] - self.goal
        grad_pos = 2.0 * cfg.q_position * errors
        grad_pos[-1] = 2.0 * cfg.q_terminal * errors[-1]
        grad_pos[0] = 0.0
        value = self.cost(controls, states)

        if self.H:
            offsets = states[None, 1:self.H + 1, :2] - self.constraints.points[:, :self.H]
            distances = np.linalg.norm(offsets, axis=-1)
            violation = np.maximum(0.0, self.constraints.margins[:, :self.H] - distances)
            value += rho * float(np.sum(violation ** 2))
            scale = -2.0 * rho * violation / np.maximum(distances, MIN_DISTANCE)
            grad_pos[1:self.H + 1] += np.einsum("kh,khd->hd", scale, offsets)

        # Costates of (x, y) at steps 1..T, and of theta at steps 1..T.
        lam_xy = np.cumsum(grad_pos[:0:-1], axis=0)[::-1]
        sin_t, cos_t = np.sin(theta), np.cos(theta)
        turn = dt * v * (-sin_t * lam_xy[:, 0] + cos_t * lam_xy[:, 1])
        lam_theta = np.cumsum(turn[::-1])[::-1] - turn

        grad = np.empty_like(controls)
        grad[:, 0] = 2.0 * cfg.r_control * v + dt * (cos_t * lam_xy[:, 0] + sin_t * lam_xy[:, 1])
        grad[:, 1] = 2.0 * cfg.r_control * controls[:, 1] + dt * lam_theta
        return value, grad


def cold_start(x0: AgentState, goal, config: PlanConfig) -> np.ndarray:
    """Half speed with a turn rate that would close the bearing error in one step."""
    offset = np.asarray(goal, dtype=float) - x0.position
    bearing = float(np.arctan2(offset[1], offset[0])) if np.any(offset) else x0.heading
    omega = np.clip(wrap_angle(bearing - x0.heading) / config.dt, -config.omega_max, config.omega_max)
    controls = np.empty((config.planning_horizon, 2))
    controls[:, 0] = 0.5 * config.v_max
    controls[:, 1] = 0.0
    controls[0, 1] = omega
    return controls


def shift_warm_start(previous: PlanResult, horizon: int) -> np.ndarray:
    """Previous solution shifted by one step with its last input repeated."""
    shifted = np.concatenate([previous.controls[1:], previous.controls[-1:]])
    if len(shifted) < horizon:
        shifted = np.concatenate([shifted, np.repeat(shifted[-1:], horizon - len(shifted), axis=0)])
    return shifted[:horizon].copy()


def _wrapped_states(states: np.ndarray) -> np.ndarray:
    wrapped = states.copy()
    wrapped[:, 2] = [wrap_angle(theta) for theta in states[:, 2]]
    return wrapped


def restore_feasibility(problem: ShootingProblem, controls: np.ndarray, tolerance: float) -> Optional[np.ndarray]:
    """Slows the plan down along its own turn profile until every margin holds; None if even standing still fails."""
    for scale in RESTORATION_SCALES:
        candidate = controls.copy()
        candidate[:, 0] *= scale
        if problem.max_violation(problem.rollout(candidate)) <= tolerance:
            return candidate
    return None


def solve_mpc(x0: AgentState, goal, constraints: ConstraintSet, warm_start: Optional[PlanResult],
              config: PlanConfig) -> PlanResult:
    """
    Minimizes J subject to the dynamics, the control box and the collision margins.
    Status is optimal when the constraints hold and the inner loop converged, feasible when they
    hold but the budget ran out or only a slowed-down copy of the solution clears the margins,
    infeasible-fallback otherwise (the caller must brake).
    """
    started = time.perf_counter()
    deadline = started + config.wall_clock_ms / 1000.0 if config.wall_clock_ms is not None else None
    problem = ShootingProblem(x0, goal, constraints, config)

    if warm_start is not None:
        controls = problem.project(shift_warm_start(warm_start, problem.T))
    else:
        controls = problem.project(cold_start(x0, goal, config))

    step = config.initial_step
    iterations = 0
    history: List[List[float]] = []
    converged = False
    rho = config.penalty_schedule[0]
    timed_out = False
    for rho in config.penalty_schedule:
        value, grad = problem.gradient(controls, rho)
        merits = [value]
        converged = False
        for _ in range(config.inner_iterations):
            if np.max(np.abs(problem.project(controls - grad) - controls)) <= config.gradient_tolerance:
                converged = True
                break
            alpha = step
            accepted = False
            for _ in range(MAX_HALVINGS):
                candidate = problem.project(controls - alpha * grad)
                direction = candidate - controls
                candidate_value = problem.merit(candidate, rho)
                if candidate_value <= value + config.armijo * float(np.sum(grad * direction)):
                    accepted = True
                    break
                alpha *= 0.5
            if not accepted:
                converged = True
                break
            new_value, new_grad = problem.gradient(candidate, rho)
            s, y = (candidate - controls).ravel(), (new_grad - grad).ravel()
            curvature = float(s @ y)
            step = float(s @ s) / curvature if curvature > 1e-12 else config.initial_step
            controls, value, grad = candidate, new_value, new_grad
            merits.append(value)
            iterations += 1
            if deadline is not None and time.perf_counter() > deadline:
                timed_out = True
                break
        history.append(merits)
        if timed_out or problem.max_violation(problem.rollout(controls)) <= config.tolerance:
            break

    states = problem.rollout(controls)
    violation = problem.max_violation(states)
    restored = False
    if violation > config.tolerance:
        candidate = restore_feasibility(problem, controls, config.tolerance)
        if candidate is not None:
            controls, restored = candidate, True
            states = problem.rollout(controls)
            violation = problem.max_violation(states)
    if violation > config.tolerance:
        status = PlanStatus.INFEASIBLE_FALLBACK
    elif converged and not restored:
        status = PlanStatus.OPTIMAL
    else:
        status = PlanStatus.FEASIBLE
    return PlanResult(controls=controls, states=_wrapped_states(states), status=status,
                      max_violation=violation, solve_time=time.perf_counter() - started,
                      cost=problem.cost(controls, states), iterations=iterations, penalty=rho,
                      merit_history=history)


def audit_plan(x0: AgentState, goal, controls: np.ndarray, constraints: ConstraintSet, config: PlanConfig) -> float:
    """Re-rolls the returned controls and recomputes the largest constraint violation."""
    problem = ShootingProblem(x0, goal, constraints, config)
    return problem.max_violation(problem.rollout(np.asarray(controls, dtype=float)))


def fallback_brake(x0: AgentState, config: PlanConfig, current_speed: float = 0.0) -> PlanResult:
    """Ramps v to zero at the configured deceleration with omega = 0."""
    decrement = config.brake_deceleration * config.dt
    speeds = np.maximum(0.0, min(current_speed, config.v_max) - decrement * np.arange(1, config.planning_horizon + 1))
    controls = np.stack([speeds, np.zeros_like(speeds)], axis=1)
    problem = ShootingProblem(x0, x0.position, ConstraintSet(), config)
    states = problem.rollout(controls)
    return PlanResult(controls=controls, states=_wrapped_states(states), status=PlanStatus.INFEASIBLE_FALLBACK)
