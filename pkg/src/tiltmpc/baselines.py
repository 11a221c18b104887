"""LQR and sliding-mode comparison controllers.

Both emit the same 6-dim body wrench as the predictive controller, covering
position and attitude in a single loop, and both are deliberately unaware of
the actuator envelope: wrenches that cannot be realized get clamped by the
plant-side limiter, which is exactly the failure mode the predictive
controller avoids.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dynamics import (
    euler_rate_matrix,
    rotation_body_to_inertial,
    wrap_angle,
    wrap_state_error,
)
from .errors import RiccatiConvergenceError
from .nmpc import DEFAULT_INPUT_WEIGHTS, DEFAULT_STATE_WEIGHTS, discretize_dynamics
from .params import VehicleParams


def linearize_hover(params: VehicleParams, dt: float, eps: float = 1e-6):
    """Discrete-time system matrices of the plant linearized at level hover."""
    x_hover = np.zeros(12)
    _, a_d, b_d = discretize_dynamics(x_hover, params.hover_wrench(), dt, params, eps)
    return a_d, b_d


def dare_solve(a, b, q, r, *, tol: float = 1e-10, max_iter: int = 10_000):
    """Fixed-point iteration of the discrete-time Riccati recursion.

    Returns (P, K) with K the state-feedback gain. Convergence is declared
    when the relative equation residual drops below ``tol``; raises
    RiccatiConvergenceError at the iteration cap.
    """
    a = np.atleast_2d(np.asarray(a, float))
    b = np.atleast_2d(np.asarray(b, float))
    q = np.atleast_2d(np.asarray(q, float))
    r = np.atleast_2d(np.asarray(r, float))
    p = q.copy()
    for _ in range(max_iter):
        btp = b.T @ p
        gain_core = np.linalg.solve(r + btp @ b, btp @ a)
        p_next = q + a.T @ p @ a - a.T @ p @ b @ gain_core
        p_next = 0.5 * (p_next + p_next.T)
        residual = np.abs(p_next - p).max() / max(1.0, np.abs(p_next).max())
        p = p_next
        if residual <= tol:
            btp = b.T @ p
            k = np.linalg.solve(r + btp @ b, btp @ a)
            return p, k
    raise RiccatiConvergenceError(
        f"Riccati iteration did not reach residual {tol} in {max_iter} steps"
    )


@dataclass
class LqrDesign:
    """Hover-linearized LQR synthesis result."""

    a_d: np.ndarray
    b_d: np.ndarray
    p: np.ndarray
    k: np.ndarray
    q_state: np.ndarray
    r_input: np.ndarray

    def closed_loop_spectral_radius(self) -> float:
        return float(np.abs(np.linalg.eigvals(self.a_d - self.b_d @ self.k)).max())


def design_lqr(params: VehicleParams, dt: float,
               q_state=None, r_input=None) -> LqrDesign:
    """Synthesize the hover LQR; weights default to the predictive
    controller's diagonals for a like-for-like comparison."""
    q = DEFAULT_STATE_WEIGHTS.copy() if q_state is None else np.asarray(q_state, float)
    r = DEFAULT_INPUT_WEIGHTS.copy() if r_input is None else np.asarray(r_input, float)
    a_d, b_d = linearize_hover(params, dt)
    p, k = dare_solve(a_d, b_d, np.diag(q), np.diag(r))
    return LqrDesign(a_d=a_d, b_d=b_d, p=p, k=k, q_state=q, r_input=r)


class LqrController:
    """Hover feedforward plus linear state feedback on the wrapped error."""

    def __init__(self, params: VehicleParams, dt: float,
                 q_state=None, r_input=None):
        self.params = params
        self.design = design_lqr(params, dt, q_state, r_input)
        self._v_hover = params.hover_wrench()

    def reset(self) -> None:
        pass

    def step(self, x, x_desired) -> np.ndarray:
        err = wrap_state_error(x, x_desired)
        return self._v_hover - self.design.k @ err


def _as_vec3(value, name: str) -> np.ndarray:
    arr = np.asarray(value, dtype=float)
    if arr.ndim == 0:
        arr = np.full(3, float(arr))
    if arr.shape != (3,):
        raise ValueError(f"{name} must be a scalar or 3-vector")
    if np.any(arr <= 0):
        raise ValueError(f"{name} entries must be positive")
    return arr


@dataclass
class SmcConfig:
    """Sliding-surface slopes, reaching gains, and boundary-layer widths.

    Scalars broadcast to all three axes. Defaults stabilize the shipped
    scenarios at the 50 Hz loop; they come from tuning sweeps, not from any
    outside source.
    """

    lam_pos: np.ndarray = field(default_factory=lambda: np.full(3, 1.5))
    lam_att: np.ndarray = field(default_factory=lambda: np.full(3, 4.0))
    gain_pos: np.ndarray = field(default_factory=lambda: np.full(3, 4.0))
    gain_att: np.ndarray = field(default_factory=lambda: np.full(3, 6.0))
    bl_pos: np.ndarray = field(default_factory=lambda: np.full(3, 0.1))
    bl_att: np.ndarray = field(default_factory=lambda: np.full(3, 0.1))

    def __post_init__(self) -> None:
        self.lam_pos = _as_vec3(self.lam_pos, "lam_pos")
        self.lam_att = _as_vec3(self.lam_att, "lam_att")
        self.gain_pos = _as_vec3(self.gain_pos, "gain_pos")
        self.gain_att = _as_vec3(self.gain_att, "gain_att")
        self.bl_pos = _as_vec3(self.bl_pos, "bl_pos")
        self.bl_att = _as_vec3(self.bl_att, "bl_att")


def _sat(s):
    return np.clip(s, -1.0, 1.0)


class SmcController:
    """Boundary-layer sliding-mode control in one loop for position and
    attitude.

    Translational surface s_p = velocity error + lam_pos * position error;
    the wrench combines the equivalent control (feedforward acceleration,
    gravity and drag compensation) with a saturated reaching term. The
    rotational surface uses the wrapped attitude error and inverts the
    rotational dynamics the same way.
    """

    def __init__(self, params: VehicleParams, config: SmcConfig | None = None):
        self.params = params
        self.config = config if config is not None else SmcConfig()

    def reset(self) -> None:
        pass

    def step(self, x, x_desired, accel_desired) -> np.ndarray:
        p = self.params
        c = self.config
        x = np.asarray(x, float)
        xd = np.asarray(x_desired, float)
        ad = np.asarray(accel_desired, float)

        pos_err = x[0:3] - xd[0:3]
        vel_err = x[6:9] - xd[6:9]
        s_p = vel_err + c.lam_pos * pos_err
        g_vec = p.gravity_vector()
        f_inertial = (
            p.mass * (ad - g_vec - c.lam_pos * vel_err)
            + p.lin_drag * x[6:9]
            - p.mass * c.gain_pos * _sat(s_p / c.bl_pos)
        )
        rot = rotation_body_to_inertial(x[3:6])
        f_body = rot.T @ f_inertial

        att_err = wrap_angle(x[3:6] - xd[3:6])
        omega = x[9:12]
        s_a = (omega - xd[9:12]) + c.lam_att * att_err
        h_mat = euler_rate_matrix(x[3:6])
        omega_dot_des = -c.lam_att * (h_mat @ omega) - c.gain_att * _sat(s_a / c.bl_att)
        j = p.inertia
        tau = np.cross(omega, j * omega) + p.rot_drag * omega + j * omega_dot_des
        return np.concatenate((f_body, tau))
