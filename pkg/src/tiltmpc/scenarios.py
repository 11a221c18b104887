"""Reference trajectories and the three shipped evaluation scenarios.

All generators return positions with analytic first and second derivatives
so controllers get consistent velocity references and feedforward
accelerations. Desired angular rate is zero throughout.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .dynamics import DisturbanceConfig

# Agile figure-eight timing: with the 4 m / 1 m amplitudes below, this period
# puts the peak reference acceleration at exactly 5 m/s^2 on both axes.
AGILE_PERIOD_S = float(np.pi * np.sqrt(4.0 / 5.0))

ATTITUDE_HOLD_DEG = 20.0
ATTITUDE_SCHEDULE_START_S = 20.0
ATTITUDE_HOLD_DURATION_S = 10.0


def lemniscate_reference(t: float, amplitude_x: float = 4.0, amplitude_y: float = 1.0,
                         period: float = 20.0, altitude: float = -4.0):
    """Figure-eight position reference with analytic derivatives.

    x traces a full sine of angular rate pi/period while y runs at twice the
    rate, giving the familiar eight. Returns (pos, vel, acc) each (3,).
    """
    if not period > 0:
        raise ValueError("period must be positive")
    wx = np.pi / period
    wy = 2.0 * np.pi / period
    pos = np.array([amplitude_x * np.sin(wx * t), amplitude_y * np.sin(wy * t), altitude])
    vel = np.array([amplitude_x * wx * np.cos(wx * t), amplitude_y * wy * np.cos(wy * t), 0.0])
    acc = np.array([-amplitude_x * wx ** 2 * np.sin(wx * t),
                    -amplitude_y * wy ** 2 * np.sin(wy * t), 0.0])
    return pos, vel, acc


def agile_lemniscate_reference(t: float):
    """The sped-up figure-eight: same shape, 5 m/s^2 peak acceleration."""
    return lemniscate_reference(t, 4.0, 1.0, AGILE_PERIOD_S, -4.0)


def quintic_transit(t: float, duration: float, target):
    """Minimum-jerk point-to-point profile from the origin to ``target``.

    Zero velocity and acceleration at both ends; clamps to the endpoints
    outside [0, duration]. Returns (pos, vel, acc).
    """
    target = np.asarray(target, float)
    if t <= 0.0:
        return np.zeros(3), np.zeros(3), np.zeros(3)
    if t >= duration:
        return target.copy(), np.zeros(3), np.zeros(3)
    tau = t / duration
    s = 10 * tau ** 3 - 15 * tau ** 4 + 6 * tau ** 5
    ds = (30 * tau ** 2 - 60 * tau ** 3 + 30 * tau ** 4) / duration
    dds = (60 * tau - 180 * tau ** 2 + 120 * tau ** 3) / duration ** 2
    return s * target, ds * target, dds * target


def hover_attitude_schedule(t: float) -> np.ndarray:
    """Attitude set-point schedule for the hover scenario.

    Level until the vehicle has transited and settled, then 10 s holds
    cycling roll/pitch set-points of +-20 deg, zero yaw throughout.
    """
    if t < ATTITUDE_SCHEDULE_START_S:
        return np.zeros(3)
    a = np.deg2rad(ATTITUDE_HOLD_DEG)
    cycle = [(a, 0.0), (0.0, a), (-a, 0.0), (0.0, -a)]
    idx = int((t - ATTITUDE_SCHEDULE_START_S) // ATTITUDE_HOLD_DURATION_S) % 4
    phi, theta = cycle[idx]
    return np.array([phi, theta, 0.0])


@dataclass
class Scenario:
    """Episode definition: reference generators plus episode conditions."""

    name: str
    duration: float
    initial_state: np.ndarray
    disturbance: DisturbanceConfig = field(default_factory=DisturbanceConfig)
    desired_state: Callable[[float], np.ndarray] = None
    desired_accel: Callable[[float], np.ndarray] = None

    def __post_init__(self) -> None:
        if not self.duration > 0:
            raise ValueError("duration must be positive")
        self.initial_state = np.asarray(self.initial_state, float)
        if self.initial_state.shape != (12,):
            raise ValueError("initial_state must have 12 entries")


def _rest_state(pos) -> np.ndarray:
    x = np.zeros(12)
    x[0:3] = pos
    return x


def _lemniscate_scenario(name, amplitude_x, amplitude_y, period, altitude,
                         duration, disturbance) -> Scenario:
    def desired_state(t: float) -> np.ndarray:
        pos, vel, _ = lemniscate_reference(t, amplitude_x, amplitude_y, period, altitude)
        out = np.zeros(12)
        out[0:3] = pos
        out[6:9] = vel
        return out

    def desired_accel(t: float) -> np.ndarray:
        return lemniscate_reference(t, amplitude_x, amplitude_y, period, altitude)[2]

    pos0, _, _ = lemniscate_reference(0.0, amplitude_x, amplitude_y, period, altitude)
    return Scenario(
        name=name, duration=duration, initial_state=_rest_state(pos0),
        disturbance=disturbance,
        desired_state=desired_state, desired_accel=desired_accel,
    )


def sluggish_lemniscate(duration: float = 60.0,
                        disturbance: DisturbanceConfig | None = None) -> Scenario:
    """Slow figure-eight (0.099 m/s^2 peak), disturbance-free by default."""
    dist = disturbance if disturbance is not None else DisturbanceConfig(enabled=False)
    return _lemniscate_scenario("sluggish", 4.0, 1.0, 20.0, -4.0, duration, dist)


def agile_lemniscate(duration: float = 30.0,
                     disturbance: DisturbanceConfig | None = None) -> Scenario:
    """Fast figure-eight (5 m/s^2 peak) with the composite disturbance on."""
    dist = disturbance if disturbance is not None else DisturbanceConfig(enabled=True)
    return _lemniscate_scenario("agile", 4.0, 1.0, AGILE_PERIOD_S, -4.0, duration, dist)


def hover_attitude(duration: float = 70.0,
                   disturbance: DisturbanceConfig | None = None,
                   transit_duration: float = 10.0) -> Scenario:
    """Transit to a hover point, then track roll/pitch set-points while
    holding position under disturbance."""
    dist = disturbance if disturbance is not None else DisturbanceConfig(enabled=True)
    target = np.array([4.0, 4.0, -4.0])

    def desired_state(t: float) -> np.ndarray:
        pos, vel, _ = quintic_transit(t, transit_duration, target)
        out = np.zeros(12)
        out[0:3] = pos
        out[3:6] = hover_attitude_schedule(t)
        out[6:9] = vel
        return out

    def desired_accel(t: float) -> np.ndarray:
        return quintic_transit(t, transit_duration, target)[2]

    return Scenario(
        name="hover-attitude", duration=duration, initial_state=_rest_state(np.zeros(3)),
        disturbance=dist, desired_state=desired_state, desired_accel=desired_accel,
    )


def custom_lemniscate(amplitude_x: float = 4.0, amplitude_y: float = 1.0,
                      period: float = 20.0, altitude: float = -4.0,
                      duration: float = 60.0, disturbed: bool = False,
                      disturbance: DisturbanceConfig | None = None) -> Scenario:
    """User-parametrized figure-eight for ad hoc studies."""
    dist = disturbance if disturbance is not None else DisturbanceConfig(enabled=disturbed)
    return _lemniscate_scenario("custom", amplitude_x, amplitude_y, period, altitude,
                                duration, dist)


def by_name(name: str, **kwargs) -> Scenario:
    builders = {
        "sluggish": sluggish_lemniscate,
        "agile": agile_lemniscate,
        "hover-attitude": hover_attitude,
        "custom": custom_lemniscate,
    }
    if name not in builders:
        raise ValueError(f"unknown scenario {name!r}; expected one of {sorted(builders)}")
    return builders[name](**kwargs)
