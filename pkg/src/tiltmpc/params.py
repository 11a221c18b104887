"""Vehicle parameters and actuator limit definitions.

Defaults describe the reference single-axis tiltrotor quadrotor used by the
shipped scenarios: a 0.468 kg airframe with 0.225 m arms and a 10,000 rpm
rotor speed ceiling.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .constants import RAD_TO_RPM, ROTOR_SPIN_SIGNS


def _as_diag3(value, name: str) -> np.ndarray:
    arr = np.asarray(value, dtype=float)
    if arr.ndim == 2:
        if arr.shape != (3, 3) or not np.allclose(arr, np.diag(np.diag(arr))):
            raise ValueError(f"{name} must be diagonal 3x3 or a 3-vector of diagonal entries")
        arr = np.diag(arr)
    if arr.shape != (3,):
        raise ValueError(f"{name} must have 3 diagonal entries, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} entries must be finite")
    return arr.copy()


@dataclass
class VehicleParams:
    """Physical constants of the plant.

    mass [kg], inertia diagonal [kg m^2], arm_length [m], thrust/torque
    coefficients [N/(rad/s)^2, N m/(rad/s)^2], linear/rotational drag
    diagonals [kg/s], gravity [m/s^2, +z down].
    """

    mass: float = 0.468
    inertia: np.ndarray = field(default_factory=lambda: np.array([4.856e-3, 4.856e-3, 8.801e-3]))
    arm_length: float = 0.225
    k_thrust: float = 1.22e-5
    k_torque: float = 1.689e-7
    lin_drag: np.ndarray = field(default_factory=lambda: np.array([0.3, 0.3, 0.25]))
    rot_drag: np.ndarray = field(default_factory=lambda: np.array([0.2, 0.2, 0.2]))
    gravity: float = 9.81

    def __post_init__(self) -> None:
        self.inertia = _as_diag3(self.inertia, "inertia")
        self.lin_drag = _as_diag3(self.lin_drag, "lin_drag")
        self.rot_drag = _as_diag3(self.rot_drag, "rot_drag")
        if not self.mass > 0:
            raise ValueError(f"mass must be positive, got {self.mass}")
        if not np.all(self.inertia > 0):
            raise ValueError("inertia diagonal must be positive")
        if not self.arm_length > 0:
            raise ValueError(f"arm_length must be positive, got {self.arm_length}")
        if not self.k_thrust > 0:
            raise ValueError(f"k_thrust must be positive, got {self.k_thrust}")
        if not self.k_torque > 0:
            raise ValueError(f"k_torque must be positive, got {self.k_torque}")
        if np.any(self.lin_drag < 0) or np.any(self.rot_drag < 0):
            raise ValueError("drag diagonals must be nonnegative")
        if not np.isfinite(self.gravity):
            raise ValueError("gravity must be finite")

    def pack(self) -> np.ndarray:
        """Flatten into the (11,) array consumed by the numeric kernels."""
        return np.concatenate((
            [self.mass], self.inertia, self.lin_drag, self.rot_drag, [self.gravity],
        )).astype(float)

    def gravity_vector(self) -> np.ndarray:
        return np.array([0.0, 0.0, self.gravity])

    def hover_wrench(self) -> np.ndarray:
        """Body wrench that balances gravity at level attitude."""
        return np.array([0.0, 0.0, -self.mass * self.gravity, 0.0, 0.0, 0.0])

    def hover_rotor_speed_rpm(self) -> float:
        """Unsigned rotor speed at which four rotors carry the weight."""
        thrust = self.mass * self.gravity / 4.0
        return RAD_TO_RPM * float(np.sqrt(thrust / self.k_thrust))

    def hover_command(self) -> np.ndarray:
        """Actuator command (8,) for level hover: signed speeds, zero tilts."""
        w = self.hover_rotor_speed_rpm()
        return np.concatenate((ROTOR_SPIN_SIGNS * w, np.zeros(4)))


@dataclass
class ActuatorLimits:
    """Actuator envelope: magnitude caps plus slew-rate limits.

    omega_max/omega_min [rpm] bound the rotor speed magnitude, beta_max [rad]
    the symmetric tilt range, and the rate fields the per-second slew.
    """

    omega_max: float = 10_000.0
    omega_min: float = 0.0
    beta_max: float = np.pi / 4
    omega_rate: float = 8_000.0
    beta_rate: float = 5.0

    def __post_init__(self) -> None:
        if not 0 <= self.omega_min < self.omega_max:
            raise ValueError("need 0 <= omega_min < omega_max")
        if not 0 < self.beta_max < np.pi / 2:
            raise ValueError("beta_max must lie in (0, pi/2)")
        if not (self.omega_rate > 0 and self.beta_rate > 0):
            raise ValueError("rate limits must be positive")

    def box_lower(self) -> np.ndarray:
        """Channel-wise lower bound honoring the rotor spin-sign pattern."""
        lo = np.empty(8)
        lo[0:2] = self.omega_min
        lo[2:4] = -self.omega_max
        lo[4:8] = -self.beta_max
        return lo

    def box_upper(self) -> np.ndarray:
        hi = np.empty(8)
        hi[0:2] = self.omega_max
        hi[2:4] = -self.omega_min
        hi[4:8] = self.beta_max
        return hi

    def rate_vector(self) -> np.ndarray:
        rate = np.empty(8)
        rate[0:4] = self.omega_rate
        rate[4:8] = self.beta_rate
        return rate
