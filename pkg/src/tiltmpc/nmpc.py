"""Receding-horizon flight controller with actuator-feasible wrenches.

Each control step solves a finite-horizon optimal control problem over the
6-dim wrench sequence: quadratic tracking cost, multiple-shooting dynamics,
and at every stage a box constraint on the wrench-to-command map so that the
first command is realizable by the actuators without any clamping. The
solver is a Gauss-Newton SQP over a condensed QP, warm-started from the
previous time-shifted solution.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .allocation import EffectivenessMatrix, build_effectiveness
from .dynamics import propulsive_wrench, wrap_state_error
from .errors import SingularAttitudeError
from .params import ActuatorLimits, VehicleParams
from .qp import QpResult, solve_qp

_K = _kernels.active

DEFAULT_STATE_WEIGHTS = np.array([0.04, 0.04, 0.04, 8.0, 8.0, 8.0, 1.0, 1.0, 4.0, 65.0, 65.0, 70.0])
DEFAULT_INPUT_WEIGHTS = np.full(6, 5e-4)


@dataclass
class NmpcConfig:
    """Horizon, weights, and solver knobs for the receding-horizon controller."""

    horizon: int = 5
    dt: float = 0.02
    q_state: np.ndarray = field(default_factory=lambda: DEFAULT_STATE_WEIGHTS.copy())
    q_input: np.ndarray = field(default_factory=lambda: DEFAULT_INPUT_WEIGHTS.copy())
    sqp_max_iters: int = 10
    step_tol: float = 1e-6
    constraint_tol: float = 1e-6
    fd_eps: float = 1e-6
    lift_tol: float = 1e-6
    slack_penalty: float = 1e6
    merit_penalty: float = 1e3
    use_warm_start: bool = True

    def __post_init__(self) -> None:
        self.q_state = np.asarray(self.q_state, float)
        self.q_input = np.asarray(self.q_input, float)
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.q_state.shape != (12,) or np.any(self.q_state < 0):
            raise ValueError("q_state must be 12 nonnegative diagonal entries")
        if self.q_input.shape != (6,) or np.any(self.q_input <= 0):
            raise ValueError("q_input must be 6 positive diagonal entries")
        if self.sqp_max_iters < 0:
            raise ValueError("sqp_max_iters must be >= 0")
        for name in ("step_tol", "constraint_tol", "fd_eps", "lift_tol",
                     "slack_penalty", "merit_penalty"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")


@dataclass
class HorizonSolution:
    """Optimized wrench sequence plus the prediction and solve diagnostics."""

    v_seq: np.ndarray            # (N, 6)
    states: np.ndarray           # (N+1, 12), dynamically consistent rollout
    commands: np.ndarray         # (N, 8), wrench-to-command at each stage
    bounds_lo: np.ndarray        # (N, 8) stage bounds used by the solve
    bounds_hi: np.ndarray
    solved: bool
    converged: bool
    sqp_iterations: int
    kkt_residual: float
    qp_status: str
    active_set_size: int
    constraint_violation: float  # max command-bound violation of the result
    defect_norm: float           # max shooting defect of the returned states
    cost: float
    step_norm: float
    merit_history: list = field(default_factory=list)
    solve_time_s: float = 0.0


def build_stage_bounds(u_now, limits: ActuatorLimits, dt: float, horizon: int):
    """Per-stage command boxes: a slew-rate cone around the current actuator
    state, intersected with the absolute magnitude box."""
    u_now = np.asarray(u_now, float)
    box_lo, box_hi = limits.box_lower(), limits.box_upper()
    rate = limits.rate_vector()
    lo = np.empty((horizon, 8))
    hi = np.empty((horizon, 8))
    for i in range(horizon):
        width = rate * dt * (i + 1)
        lo[i] = np.clip(u_now - width, box_lo, box_hi)
        hi[i] = np.clip(u_now + width, box_lo, box_hi)
    return lo, hi


def discretize_dynamics(x, v, dt: float, params: VehicleParams, eps: float = 1e-6):
    """One transition of the disturbance-free prediction model with
    forward-difference Jacobians wrt state and wrench."""
    X = np.vstack((np.asarray(x, float), np.zeros(12)))
    V = np.asarray(v, float).reshape(1, 6)
    F, A, B = _K.linearize_traj(X, V, params.pack(), float(dt), float(eps))
    return F[0], A[0], B[0]


def linearize_h(v, eff: EffectivenessMatrix, params: VehicleParams,
                eps: float = 1e-6, lift_tol: float = 1e-6):
    """Wrench-to-command value and forward-difference Jacobian.

    Tilt rows belonging to rotors whose lift component is within lift_tol of
    zero are frozen (tilt is undefined at zero thrust).
    """
    return _K.h_jac(np.asarray(v, float), eff.pinv, params.k_thrust, float(eps), float(lift_tol))


class NmpcController:
    """One instance per control loop; carries warm-start state.

    All numeric work is deterministic, so identical inputs (including the
    warm start) give identical outputs.
    """

    def __init__(self, params: VehicleParams, limits: ActuatorLimits,
                 config: NmpcConfig | None = None):
        self.params = params
        self.limits = limits
        self.config = config if config is not None else NmpcConfig()
        self.effectiveness = build_effectiveness(params)
        self._phys = params.pack()
        self._hover = params.hover_wrench()
        self.warm: HorizonSolution | None = None

    def reset(self) -> None:
        self.warm = None

    # -- internals ----------------------------------------------------------

    def _h_all(self, V):
        cfg = self.config
        n = V.shape[0]
        U = np.empty((n, 8))
        G = np.empty((n, 8, 6))
        for i in range(n):
            U[i], G[i] = _K.h_jac(V[i], self.effectiveness.pinv, self.params.k_thrust,
                                  cfg.fd_eps, cfg.lift_tol)
        return U, G

    def _commands(self, V):
        n = V.shape[0]
        U = np.empty((n, 8))
        for i in range(n):
            U[i] = _K.h_eval(V[i], self.effectiveness.pinv, self.params.k_thrust)
        return U

    def _tracking_cost(self, X, V, ref):
        e = wrap_state_error(X[1:], ref[1:])
        qx, qv = self.config.q_state, self.config.q_input
        return float(np.sum(e * qx * e) + np.sum(V * qv * V))

    @staticmethod
    def _bound_violation_l1(U, lo, hi):
        over = np.maximum(U - hi, 0.0)
        under = np.maximum(lo - U, 0.0)
        return float(over.sum() + under.sum())

    @staticmethod
    def _bound_violation_inf(U, lo, hi):
        return float(max(np.max(U - hi, initial=0.0), np.max(lo - U, initial=0.0)))

    def _merit(self, X, V, U, ref, lo, hi):
        """Exact-penalty merit on the rollout iterate: tracking cost plus the
        L1 command-bound violation. States follow the rollout, so dynamics
        defects are zero by construction and do not enter."""
        rho = self.config.merit_penalty
        return self._tracking_cost(X, V, ref) + rho * self._bound_violation_l1(U, lo, hi)

    def _build_qp(self, X, V, F, A, B, U, G, ref, lo, hi):
        cfg = self.config
        n = cfg.horizon
        nv = 6 * n
        qx = cfg.q_state
        defect = F - X[1:]
        S = np.zeros((n, 12, nv))
        c = np.zeros((n, 12))
        S[0][:, 0:6] = B[0]
        c[0] = defect[0]
        for i in range(1, n):
            S[i] = A[i] @ S[i - 1]
            S[i][:, 6 * i:6 * i + 6] += B[i]
            c[i] = A[i] @ c[i - 1] + defect[i]
        err = wrap_state_error(X[1:], ref[1:])
        H = np.zeros((nv, nv))
        g = np.zeros(nv)
        for i in range(n):
            sq = S[i].T * qx
            H += sq @ S[i]
            g += sq @ (err[i] + c[i])
        idx = np.arange(nv)
        H[idx, idx] += np.tile(cfg.q_input, n)
        g += (cfg.q_input * V).ravel()
        H *= 2.0
        g *= 2.0
        C = np.zeros((16 * n, nv))
        dvec = np.empty(16 * n)
        for i in range(n):
            r0 = 16 * i
            C[r0:r0 + 8, 6 * i:6 * i + 6] = G[i]
            dvec[r0:r0 + 8] = hi[i] - U[i]
            C[r0 + 8:r0 + 16, 6 * i:6 * i + 6] = -G[i]
            dvec[r0 + 8:r0 + 16] = U[i] - lo[i]
        return H, g, C, dvec, S, c

    def _try_rollout(self, x0, V):
        """Rollout or None when the prediction crosses the attitude guard."""
        try:
            return _K.rollout(x0, V, self._phys, self.config.dt)
        except SingularAttitudeError:
            return None

    def _failed_solution(self, x0, V, u_now, lo, hi, status, t_start) -> HorizonSolution:
        n = self.config.horizon
        return HorizonSolution(
            v_seq=V, states=np.tile(np.asarray(x0, float), (n + 1, 1)),
            commands=np.tile(np.asarray(u_now, float), (n, 1)),
            bounds_lo=lo, bounds_hi=hi, solved=False, converged=False,
            sqp_iterations=0, kkt_residual=np.nan, qp_status=status,
            active_set_size=0, constraint_violation=np.nan, defect_norm=np.nan,
            cost=np.nan, step_norm=np.nan, merit_history=[],
            solve_time_s=time.perf_counter() - t_start,
        )

    def _solve_qp_with_relaxation(self, H, g, C, dvec) -> tuple[QpResult, np.ndarray, str]:
        res = solve_qp(H, g, C, dvec)
        if res.status != "infeasible":
            return res, res.z, res.status
        # relax only the command-bound rows with one shared slack at a large
        # linear penalty; dynamics stay exact
        nv = H.shape[0]
        H2 = np.zeros((nv + 1, nv + 1))
        H2[:nv, :nv] = H
        H2[nv, nv] = 1e-6
        g2 = np.concatenate((g, [self.config.slack_penalty]))
        m = C.shape[0]
        C2 = np.zeros((m + 1, nv + 1))
        C2[:m, :nv] = C
        C2[:m, nv] = -1.0
        C2[m, nv] = -1.0
        d2 = np.concatenate((dvec, [0.0]))
        res2 = solve_qp(H2, g2, C2, d2)
        return res2, res2.z[:nv], "relaxed_" + res2.status

    # -- main entry points --------------------------------------------------

    def solve(self, x0, reference, u_now, warm: HorizonSolution | None = None) -> HorizonSolution:
        """Optimize the wrench sequence from state x0 against the reference.

        ``reference`` holds N+1 desired states sampled at the control period;
        ``u_now`` is the current actuator state anchoring the slew cone.
        Returns the best iterate whose commands satisfy the stage bounds, and
        flags ``solved=False`` when none was produced.
        """
        t_start = time.perf_counter()
        cfg = self.config
        n = cfg.horizon
        x0 = np.asarray(x0, float)
        ref = np.asarray(reference, float)
        if ref.shape != (n + 1, 12):
            raise ValueError(f"reference must have shape ({n + 1}, 12), got {ref.shape}")
        lo, hi = build_stage_bounds(u_now, self.limits, cfg.dt, n)

        # wrench reproducing the current actuator state: a feasible point of
        # the stage bounds regardless of where the actuators sit
        V_hold = np.tile(propulsive_wrench(u_now, self.params), (n, 1))
        V = V_hold
        X = None
        if warm is not None:
            V = np.vstack((warm.v_seq[1:], warm.v_seq[-1:]))
            X = self._try_rollout(x0, V)
            if X is None:
                V = V_hold
        if X is None:
            X = self._try_rollout(x0, V)
        if X is None:
            # the current state itself predicts through the attitude
            # singularity even under the hold wrench; nothing to optimize
            return self._failed_solution(x0, V, u_now, lo, hi, "singular", t_start)
        U, G = self._h_all(V)
        merit_cur = self._merit(X, V, U, ref, lo, hi)
        merit_history = [merit_cur]

        best_v = None
        best_cost = np.inf

        def consider(V_iter, U_iter, X_iter):
            nonlocal best_v, best_cost
            if self._bound_violation_inf(U_iter, lo, hi) <= cfg.constraint_tol:
                cost = self._tracking_cost(X_iter, V_iter, ref)
                if cost < best_cost:
                    best_cost = cost
                    best_v = V_iter.copy()

        consider(V, U, X)
        iterations = 0
        converged = False
        qp_status = "not_run"
        kkt_res = np.nan
        active_size = 0
        step_norm = np.nan

        for _ in range(cfg.sqp_max_iters):
            try:
                F, A, B = _K.linearize_traj(X, V, self._phys, cfg.dt, cfg.fd_eps)
            except SingularAttitudeError:
                break
            Hqp, gqp, C, dvec, S, c = self._build_qp(X, V, F, A, B, U, G, ref, lo, hi)
            res, dv_flat, qp_status = self._solve_qp_with_relaxation(Hqp, gqp, C, dvec)
            kkt_res = res.kkt_residual
            active_size = len(res.active_set)
            dv = dv_flat.reshape(n, 6)
            step_norm = float(np.abs(dv).max())
            iterations += 1

            accepted = False
            alpha = 1.0
            for _trial in range(8):
                V_t = V + alpha * dv
                X_t = self._try_rollout(x0, V_t)
                if X_t is not None:
                    U_t = self._commands(V_t)
                    merit_t = self._merit(X_t, V_t, U_t, ref, lo, hi)
                    if merit_t <= merit_cur + 1e-12 * (1.0 + abs(merit_cur)):
                        V, X, U = V_t, X_t, U_t
                        merit_cur = merit_t
                        accepted = True
                        break
                alpha *= 0.5
            if not accepted:
                break
            _, G = self._h_all(V)
            merit_history.append(merit_cur)
            consider(V, U, X)
            if alpha * step_norm < cfg.step_tol:
                converged = True
                break

        solved = iterations >= 1 and best_v is not None
        V_fin = best_v if solved else V
        X_fin = _K.rollout(x0, V_fin, self._phys, cfg.dt)
        U_fin = self._commands(V_fin)
        zero6 = np.zeros(6)
        defect = 0.0
        for i in range(n):
            step_i = _K.rk4(X_fin[i], V_fin[i], zero6, self._phys, cfg.dt, False)
            defect = max(defect, float(np.abs(step_i - X_fin[i + 1]).max()))
        return HorizonSolution(
            v_seq=V_fin,
            states=X_fin,
            commands=U_fin,
            bounds_lo=lo,
            bounds_hi=hi,
            solved=solved,
            converged=converged,
            sqp_iterations=iterations,
            kkt_residual=float(kkt_res),
            qp_status=qp_status,
            active_set_size=active_size,
            constraint_violation=self._bound_violation_inf(U_fin, lo, hi),
            defect_norm=defect,
            cost=self._tracking_cost(X_fin, V_fin, ref),
            step_norm=float(step_norm) if np.isfinite(step_norm) else np.nan,
            merit_history=merit_history,
            solve_time_s=time.perf_counter() - t_start,
        )

    def step(self, x0, reference, u_now) -> tuple[np.ndarray, HorizonSolution]:
        """One receding-horizon step: solve, keep the warm start, emit the
        first command clipped exactly into its stage-0 box.

        On solver failure the previous actuator state ``u_now`` is held and
        the warm start is left untouched.
        """
        warm = self.warm if self.config.use_warm_start else None
        sol = self.solve(x0, reference, u_now, warm)
        if not sol.solved:
            # drop the stale warm start so the next call re-anchors on the
            # actuator state instead of replaying the failed trajectory
            self.warm = None
            return np.asarray(u_now, float).copy(), sol
        self.warm = sol
        u = np.clip(sol.commands[0], sol.bounds_lo[0], sol.bounds_hi[0])
        return u, sol
