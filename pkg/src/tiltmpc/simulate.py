"""Closed-loop episode runner and tracking metrics.

One loop iteration per control period: controller produces a wrench, the
allocator maps it to actuator commands, the plant-side limiter slews and
clamps them, and the rigid body integrates one step under the realized
wrench plus the scenario disturbance.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .allocation import build_effectiveness, wrench_to_command
from .baselines import LqrController, SmcController
from .dynamics import (
    apply_actuator_limits,
    composite_disturbance,
    propulsive_wrench,
    step_rk4,
    wrap_angle,
)
from .errors import EmptyTraceError, SingularAttitudeError
from .nmpc import NmpcController
from .params import ActuatorLimits, VehicleParams
from .scenarios import Scenario

# A command channel counts as saturated when the limiter moved it by more
# than this (rpm or rad).
SATURATION_TOL = 1e-9


@dataclass
class EpisodeTrace:
    """Uniform-grid record of one closed-loop episode.

    Row k holds the state at t_k and the controls applied over [t_k, t_k+dt);
    the final row repeats the last controls alongside the terminal state.
    ``n_control_steps`` counts the rows whose controls were actually applied.
    """

    t: np.ndarray
    states: np.ndarray        # (rows, 12)
    refs: np.ndarray          # (rows, 12)
    wrench: np.ndarray        # (rows, 6) commanded virtual control
    u_cmd: np.ndarray         # (rows, 8)
    u_real: np.ndarray        # (rows, 8)
    disturbance: np.ndarray   # (rows, 6)
    sqp_iters: np.ndarray     # (rows,)
    kkt_residual: np.ndarray  # (rows,)
    solve_ms: np.ndarray      # (rows,)
    meta: dict = field(default_factory=dict)

    @property
    def rows(self) -> int:
        return self.t.shape[0]

    @property
    def n_control_steps(self) -> int:
        return int(self.meta["n_control_steps"])


def run_episode(scenario: Scenario, controller, params: VehicleParams,
                limits: ActuatorLimits, dt: float = 0.02, seed: int = 0,
                warmup: bool = True) -> EpisodeTrace:
    """Run one closed-loop episode; deterministic given config and seed.

    ``controller`` is an NmpcController, LqrController, or SmcController
    instance. On a non-finite state or attitude-singularity failure the trace
    up to the failure is returned with ``meta['aborted']`` set. ``warmup``
    runs one throwaway controller call before the loop so jit compilation
    never lands inside the timed steps.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    is_nmpc = isinstance(controller, NmpcController)
    if is_nmpc and abs(controller.config.dt - dt) > 1e-12:
        raise ValueError(
            f"controller period {controller.config.dt} differs from episode dt {dt}"
        )
    eff = build_effectiveness(params)
    dist_cfg = scenario.disturbance.seeded(seed)
    n_steps = int(round(scenario.duration / dt))
    rows = n_steps + 1

    t_arr = np.arange(rows) * dt
    states = np.zeros((rows, 12))
    refs = np.zeros((rows, 12))
    wrench = np.zeros((rows, 6))
    u_cmd = np.zeros((rows, 8))
    u_real = np.zeros((rows, 8))
    dist = np.zeros((rows, 6))
    sqp_iters = np.zeros(rows)
    kkt_res = np.zeros(rows)
    solve_ms = np.zeros(rows)

    box_lo, box_hi = limits.box_lower(), limits.box_upper()
    x = scenario.initial_state.copy()
    u_prev = np.clip(params.hover_command(), box_lo, box_hi)

    controller.reset()
    if warmup:
        _controller_output(controller, scenario, 0.0, x, u_prev, eff, params, dt)
        controller.reset()

    aborted = False
    abort_reason = ""
    n_control = 0
    k = 0
    for k in range(n_steps):
        t = t_arr[k]
        states[k] = x
        refs[k] = scenario.desired_state(t)

        t0 = time.perf_counter()
        try:
            v, uc, iters, kkt = _controller_output(
                controller, scenario, t, x, u_prev, eff, params, dt)
        except SingularAttitudeError as exc:
            aborted = True
            abort_reason = f"controller hit attitude singularity at t={t:.3f}: {exc}"
            break
        elapsed_ms = 1e3 * (time.perf_counter() - t0)

        ur = apply_actuator_limits(uc, u_prev, limits, dt)
        d = composite_disturbance(t, dist_cfg)
        wrench[k] = v
        u_cmd[k] = uc
        u_real[k] = ur
        dist[k] = d
        sqp_iters[k] = iters
        kkt_res[k] = kkt
        solve_ms[k] = elapsed_ms
        n_control = k + 1

        try:
            x_next = step_rk4(x, propulsive_wrench(ur, params), d, params, dt, wrap=True)
        except SingularAttitudeError as exc:
            aborted = True
            abort_reason = f"attitude singularity at t={t:.3f}: {exc}"
            break
        if not np.all(np.isfinite(x_next)):
            aborted = True
            abort_reason = f"non-finite state at t={t:.3f}"
            break
        x = x_next
        u_prev = ur

    if aborted:
        last = k + 1  # rows 0..k recorded; row k may lack applied controls
    else:
        last = rows
        n_control = n_steps
        states[n_steps] = x
        refs[n_steps] = scenario.desired_state(t_arr[n_steps])
        wrench[n_steps] = wrench[n_steps - 1]
        u_cmd[n_steps] = u_cmd[n_steps - 1]
        u_real[n_steps] = u_real[n_steps - 1]
        dist[n_steps] = dist[n_steps - 1]
        sqp_iters[n_steps] = sqp_iters[n_steps - 1]
        kkt_res[n_steps] = kkt_res[n_steps - 1]
        solve_ms[n_steps] = solve_ms[n_steps - 1]

    return EpisodeTrace(
        t=t_arr[:last], states=states[:last], refs=refs[:last], wrench=wrench[:last],
        u_cmd=u_cmd[:last], u_real=u_real[:last], disturbance=dist[:last],
        sqp_iters=sqp_iters[:last], kkt_residual=kkt_res[:last], solve_ms=solve_ms[:last],
        meta={
            "scenario": scenario.name,
            "controller": _controller_name(controller),
            "dt": dt,
            "seed": seed,
            "duration": scenario.duration,
            "aborted": aborted,
            "abort_reason": abort_reason,
            "n_control_steps": n_control,
        },
    )


def _controller_name(controller) -> str:
    return {NmpcController: "nmpc", LqrController: "lqr", SmcController: "smc"}.get(
        type(controller), type(controller).__name__)


def _controller_output(controller, scenario, t, x, u_prev, eff, params, dt):
    """Run one controller evaluation; returns (wrench, command, iters, kkt)."""
    if isinstance(controller, NmpcController):
        n = controller.config.horizon
        window = np.stack([scenario.desired_state(t + i * dt) for i in range(n + 1)])
        uc, sol = controller.step(x, window, u_prev)
        return sol.v_seq[0], uc, sol.sqp_iterations, sol.kkt_residual
    if isinstance(controller, LqrController):
        v = controller.step(x, scenario.desired_state(t))
    elif isinstance(controller, SmcController):
        v = controller.step(x, scenario.desired_state(t), scenario.desired_accel(t))
    else:
        raise TypeError(f"unsupported controller type {type(controller).__name__}")
    return v, wrench_to_command(v, eff, params), 0, 0.0


@dataclass
class MetricsSummary:
    """Tracking and actuation statistics of one episode."""

    rmse_pos: np.ndarray          # per-axis (3,)
    rmse_pos_total: float
    rmse_att: np.ndarray
    rmse_att_total: float
    max_abs_pos: np.ndarray
    max_abs_att: np.ndarray
    steady_err_pos: np.ndarray    # mean |e| over the final quarter
    steady_err_att: np.ndarray
    saturation_fraction: float
    control_effort: float         # integral of |v|^2 dt
    solve_ms_mean: float
    solve_ms_max: float
    solve_ms_p99: float
    sqp_iters_mean: float
    sqp_iters_max: float
    steps: int
    duration: float

    def to_dict(self) -> dict:
        def li(a):
            return [float(v) for v in np.asarray(a).ravel()]
        return {
            "rmse_pos_m": li(self.rmse_pos),
            "rmse_pos_total_m": float(self.rmse_pos_total),
            "rmse_att_rad": li(self.rmse_att),
            "rmse_att_total_rad": float(self.rmse_att_total),
            "max_abs_pos_m": li(self.max_abs_pos),
            "max_abs_att_rad": li(self.max_abs_att),
            "steady_err_pos_m": li(self.steady_err_pos),
            "steady_err_att_rad": li(self.steady_err_att),
            "saturation_fraction": float(self.saturation_fraction),
            "control_effort": float(self.control_effort),
            "solve_ms_mean": float(self.solve_ms_mean),
            "solve_ms_max": float(self.solve_ms_max),
            "solve_ms_p99": float(self.solve_ms_p99),
            "sqp_iters_mean": float(self.sqp_iters_mean),
            "sqp_iters_max": float(self.sqp_iters_max),
            "steps": int(self.steps),
            "duration_s": float(self.duration),
        }


class MetricsAccumulator:
    """Streaming metrics: feed row chunks, then finalize.

    Chunked and whole-trace feeding produce identical results because the
    accumulator concatenates reduced per-row arrays before any statistics.
    State rows and applied-control rows are fed separately since the final
    trace row carries no applied controls.
    """

    def __init__(self, dt: float):
        self.dt = dt
        self._pos_err = []
        self._att_err = []
        self._sat = []
        self._v_sq = []
        self._solve_ms = []
        self._iters = []

    def add_states(self, states, refs) -> None:
        states = np.atleast_2d(np.asarray(states, float))
        refs = np.atleast_2d(np.asarray(refs, float))
        self._pos_err.append(states[:, 0:3] - refs[:, 0:3])
        self._att_err.append(wrap_angle(states[:, 3:6] - refs[:, 3:6]))

    def add_controls(self, wrench, u_cmd, u_real, solve_ms, sqp_iters) -> None:
        wrench = np.atleast_2d(np.asarray(wrench, float))
        self._v_sq.append(np.sum(wrench * wrench, axis=1))
        delta = np.abs(np.atleast_2d(u_cmd) - np.atleast_2d(u_real))
        self._sat.append(np.any(delta > SATURATION_TOL, axis=1))
        self._solve_ms.append(np.atleast_1d(solve_ms))
        self._iters.append(np.atleast_1d(sqp_iters))

    def finalize(self) -> MetricsSummary:
        if not self._pos_err or not self._sat:
            raise EmptyTraceError("no steps accumulated")
        pos = np.concatenate(self._pos_err)
        att = np.concatenate(self._att_err)
        sat = np.concatenate(self._sat)
        v_sq = np.concatenate(self._v_sq)
        ms = np.concatenate(self._solve_ms)
        iters = np.concatenate(self._iters)
        tail = slice((3 * pos.shape[0]) // 4, None)
        return MetricsSummary(
            rmse_pos=np.sqrt(np.mean(pos ** 2, axis=0)),
            rmse_pos_total=float(np.sqrt(np.mean(np.sum(pos ** 2, axis=1)))),
            rmse_att=np.sqrt(np.mean(att ** 2, axis=0)),
            rmse_att_total=float(np.sqrt(np.mean(np.sum(att ** 2, axis=1)))),
            max_abs_pos=np.abs(pos).max(axis=0),
            max_abs_att=np.abs(att).max(axis=0),
            steady_err_pos=np.abs(pos[tail]).mean(axis=0),
            steady_err_att=np.abs(att[tail]).mean(axis=0),
            saturation_fraction=float(np.mean(sat)),
            control_effort=float(np.sum(v_sq) * self.dt),
            solve_ms_mean=float(ms.mean()),
            solve_ms_max=float(ms.max()),
            solve_ms_p99=float(np.percentile(ms, 99)),
            sqp_iters_mean=float(iters.mean()),
            sqp_iters_max=float(iters.max()),
            steps=int(sat.shape[0]),
            duration=float(sat.shape[0] * self.dt),
        )


def compute_metrics(trace: EpisodeTrace) -> MetricsSummary:
    """Summarize an episode trace; raises EmptyTraceError on an empty one."""
    if trace.rows == 0 or trace.n_control_steps == 0:
        raise EmptyTraceError("trace holds no applied control steps")
    nc = trace.n_control_steps
    acc = MetricsAccumulator(trace.meta["dt"])
    acc.add_states(trace.states, trace.refs)
    acc.add_controls(trace.wrench[:nc], trace.u_cmd[:nc], trace.u_real[:nc],
                     trace.solve_ms[:nc], trace.sqp_iters[:nc])
    return acc.finalize()
