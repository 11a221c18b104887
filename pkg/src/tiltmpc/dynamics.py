"""6-DOF tiltrotor quadrotor plant model.

Translational and rotational rigid-body dynamics with linear drag, the
per-rotor thrust/tilt force model, actuator slew/magnitude limiting, and a
composite sinusoidal disturbance generator. See :mod:`tiltmpc.constants`
for the frame conventions and vector layouts.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .constants import (
    GIMBAL_GUARD_RAD,
    ROTOR_LATERAL_AXIS,
    ROTOR_LATERAL_SIGNS,
    RPM_TO_RAD,
)
from .errors import SingularAttitudeError
from .params import ActuatorLimits, VehicleParams

_K = _kernels.active


def wrap_angle(a):
    """Wrap angle(s) to (-pi, pi]."""
    w = (np.asarray(a, dtype=float) + np.pi) % (2.0 * np.pi) - np.pi
    w = np.where(w == -np.pi, np.pi, w)
    return float(w) if np.ndim(a) == 0 else w


def wrap_state_error(x, x_ref):
    """State difference with the roll/pitch/yaw components angle-wrapped."""
    e = np.asarray(x, float) - np.asarray(x_ref, float)
    e[..., 3:6] = wrap_angle(e[..., 3:6])
    return e


def euler_rate_matrix(eta) -> np.ndarray:
    """Matrix H mapping body angular velocity to Euler angle rates.

    Raises SingularAttitudeError when pitch is within the guard band of
    +-90 deg, where the map loses rank.
    """
    phi, th = float(eta[0]), float(eta[1])
    if abs(th) >= np.pi / 2 - GIMBAL_GUARD_RAD:
        raise SingularAttitudeError(f"pitch {th:.6f} rad within guard band of +-90 deg")
    cphi, sphi = np.cos(phi), np.sin(phi)
    cth, tth = np.cos(th), np.tan(th)
    return np.array([
        [1.0, sphi * tth, cphi * tth],
        [0.0, cphi, -sphi],
        [0.0, sphi / cth, cphi / cth],
    ])


def rotation_body_to_inertial(eta) -> np.ndarray:
    """Rotation matrix from body to inertial axes (yaw-pitch-roll sequence)."""
    phi, th, psi = float(eta[0]), float(eta[1]), float(eta[2])
    cphi, sphi = np.cos(phi), np.sin(phi)
    cth, sth = np.cos(th), np.sin(th)
    cpsi, spsi = np.cos(psi), np.sin(psi)
    return np.array([
        [cpsi * cth, cpsi * sth * sphi - spsi * cphi, cpsi * sth * cphi + spsi * sphi],
        [spsi * cth, spsi * sth * sphi + cpsi * cphi, spsi * sth * cphi - cpsi * sphi],
        [-sth, cth * sphi, cth * cphi],
    ])


def euler_from_rotation(R) -> np.ndarray:
    """Inverse of :func:`rotation_body_to_inertial` away from gimbal lock."""
    R = np.asarray(R, float)
    th = -np.arcsin(np.clip(R[2, 0], -1.0, 1.0))
    phi = np.arctan2(R[2, 1], R[2, 2])
    psi = np.arctan2(R[1, 0], R[0, 0])
    return np.array([phi, th, psi])


def rotor_thrust(omega_rpm: float, params: VehicleParams) -> float:
    """Thrust magnitude (N) of one rotor at the given signed speed in rpm."""
    w = omega_rpm * RPM_TO_RAD
    return params.k_thrust * w * w


def rotor_force(index: int, omega_rpm: float, beta: float, params: VehicleParams) -> np.ndarray:
    """Body-frame force (3,) produced by rotor ``index`` (1..4).

    Lift acts along -z at zero tilt for every rotor; tilting pushes along x
    for rotors 1, 2 and along y for rotors 3, 4, with per-rotor lateral signs
    fixed by the mounting orientation.
    """
    if index not in (1, 2, 3, 4):
        raise ValueError(f"rotor index must be 1..4, got {index}")
    t = rotor_thrust(omega_rpm, params)
    i = index - 1
    f = np.zeros(3)
    f[ROTOR_LATERAL_AXIS[i]] = ROTOR_LATERAL_SIGNS[i] * t * np.sin(beta)
    f[2] = -t * np.cos(beta)
    return f


def force_components_from_command(u, params: VehicleParams) -> np.ndarray:
    """Per-rotor (lateral, lift) force pairs (8,) for an actuator command."""
    u = np.asarray(u, float)
    comp = np.empty(8)
    for i in range(4):
        t = rotor_thrust(u[i], params)
        comp[2 * i] = ROTOR_LATERAL_SIGNS[i] * t * np.sin(u[4 + i])
        comp[2 * i + 1] = -t * np.cos(u[4 + i])
    return comp


def wrench_from_components(comp, params: VehicleParams) -> np.ndarray:
    """Total body wrench (6,) from per-rotor force components (8,).

    This is the linear forward map the allocator inverts: lateral components
    sum into x/y force and yaw moment, lift components into z force, roll and
    pitch moments, and the drag-torque yaw term.
    """
    comp = np.asarray(comp, float)
    el = params.arm_length
    kq_over_kt = params.k_torque / params.k_thrust
    f1x, f1z, f2x, f2z, f3y, f3z, f4y, f4z = comp
    return np.array([
        f1x + f2x,
        f3y + f4y,
        f1z + f2z + f3z + f4z,
        el * (f1z - f2z),
        el * (-f3z + f4z),
        kq_over_kt * (-f1z - f2z + f3z + f4z) + el * (-f1x + f2x) + el * (f3y - f4y),
    ])


def propulsive_wrench(u, params: VehicleParams) -> np.ndarray:
    """Body wrench (6,) produced by an actuator command (8,)."""
    return wrench_from_components(force_components_from_command(u, params), params)


def state_derivative(x, wrench, disturbance, params: VehicleParams) -> np.ndarray:
    """Time derivative of the 12-state under a body wrench and disturbance.

    Velocity is inertial-frame, so translational drag acts on it directly;
    the disturbance carries an inertial force and a body moment.
    """
    return _K.deriv(
        np.asarray(x, float), np.asarray(wrench, float),
        np.asarray(disturbance, float), params.pack(),
    )


def step_rk4(x, wrench, disturbance, params: VehicleParams, dt: float, wrap: bool = True) -> np.ndarray:
    """One classical Runge-Kutta step of length dt under constant inputs.

    Roll and yaw are wrapped to (-pi, pi] afterward unless ``wrap`` is False
    (the prediction rollouts keep angles unwrapped so finite differences stay
    smooth).
    """
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    return _K.rk4(
        np.asarray(x, float), np.asarray(wrench, float),
        np.asarray(disturbance, float), params.pack(), float(dt), wrap,
    )


def apply_actuator_limits(u_cmd, u_prev, limits: ActuatorLimits, dt: float) -> np.ndarray:
    """Realized actuator values: rate-limit toward the command, then clamp.

    Each channel moves from ``u_prev`` toward ``u_cmd`` by at most rate*dt,
    then is clamped into the magnitude box, which keeps the rotor spin-sign
    pattern (clamping moves speeds toward zero, never across it).
    """
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    u_cmd = np.asarray(u_cmd, float)
    u_prev = np.asarray(u_prev, float)
    window = limits.rate_vector() * dt
    moved = u_prev + np.clip(u_cmd - u_prev, -window, window)
    return np.clip(moved, limits.box_lower(), limits.box_upper())


@dataclass
class DisturbanceConfig:
    """Composite sinusoidal disturbance: two tones per channel group.

    Per axis, force is amp_force*(sin(w1 t + p1) + mix*sin(w2 t + p2)) in the
    inertial frame, and torque follows the same shape with its own tones in
    the body frame. With ``randomize_phases`` the phases get a seeded offset
    per axis and tone.
    """

    enabled: bool = False
    amp_force: float = 0.5
    amp_torque: float = 0.05
    mix: float = 0.5
    force_freqs: tuple = (0.5, 1.3)
    force_phases: tuple = (0.0, 1.0)
    torque_freqs: tuple = (0.7, 1.1)
    torque_phases: tuple = (0.0, 2.0)
    randomize_phases: bool = False
    phase_offsets: np.ndarray = field(default_factory=lambda: np.zeros((6, 2)))

    def __post_init__(self) -> None:
        self.phase_offsets = np.asarray(self.phase_offsets, float)
        if self.phase_offsets.shape != (6, 2):
            raise ValueError("phase_offsets must have shape (6, 2)")

    def seeded(self, seed: int) -> "DisturbanceConfig":
        """Copy with per-axis phase offsets drawn from the seed (if enabled)."""
        if not self.randomize_phases:
            return self
        rng = np.random.default_rng(seed)
        offsets = rng.uniform(0.0, 2.0 * np.pi, size=(6, 2))
        return DisturbanceConfig(
            enabled=self.enabled, amp_force=self.amp_force, amp_torque=self.amp_torque,
            mix=self.mix, force_freqs=self.force_freqs, force_phases=self.force_phases,
            torque_freqs=self.torque_freqs, torque_phases=self.torque_phases,
            randomize_phases=self.randomize_phases, phase_offsets=offsets,
        )


def composite_disturbance(t: float, config: DisturbanceConfig) -> np.ndarray:
    """Disturbance (6,) at time t: inertial force then body moment."""
    out = np.zeros(6)
    if not config.enabled:
        return out
    w1, w2 = config.force_freqs
    p1, p2 = config.force_phases
    for ax in range(3):
        o1, o2 = config.phase_offsets[ax]
        out[ax] = config.amp_force * (
            np.sin(w1 * t + p1 + o1) + config.mix * np.sin(w2 * t + p2 + o2)
        )
    w1, w2 = config.torque_freqs
    p1, p2 = config.torque_phases
    for ax in range(3):
        o1, o2 = config.phase_offsets[3 + ax]
        out[3 + ax] = config.amp_torque * (
            np.sin(w1 * t + p1 + o1) + config.mix * np.sin(w2 * t + p2 + o2)
        )
    return out
