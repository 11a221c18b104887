"""Pseudo-inverse control allocation.

The controller hands down a 6-dim body wrench; the allocator turns it into
the 8-dim actuator command. The linear part maps per-rotor force components
to the wrench through the effectiveness matrix, inverted once via its
Moore-Penrose pseudo-inverse (minimum-norm solution); the nonlinear part
recovers rotor speeds and tilt angles from the force components.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .constants import (
    RAD_TO_RPM,
    ROTOR_LATERAL_SIGNS,
    ROTOR_SPIN_SIGNS,
    THRUST_EPS_N,
)
from .dynamics import wrench_from_components
from .errors import AllocationRankError
from .params import VehicleParams

_K = _kernels.active


@dataclass(frozen=True)
class EffectivenessMatrix:
    """Linear map from per-rotor force components to the body wrench.

    ``matrix`` is 6x8, ``pinv`` its 8x6 pseudo-inverse. Built numerically
    from the plant's forward force model so the two can never drift apart.
    """

    matrix: np.ndarray
    pinv: np.ndarray


def build_effectiveness(params: VehicleParams) -> EffectivenessMatrix:
    """Construct the effectiveness matrix by probing the forward map.

    Evaluates the component-to-wrench map on the 8 canonical unit vectors
    and takes the SVD-based pseudo-inverse. Raises AllocationRankError when
    the matrix loses full row rank (e.g. zero arm length).
    """
    cols = [wrench_from_components(np.eye(8)[j], params) for j in range(8)]
    b = np.column_stack(cols)
    if np.linalg.matrix_rank(b) < 6:
        raise AllocationRankError(
            "effectiveness matrix rank < 6; vehicle geometry cannot span the wrench space"
        )
    return EffectivenessMatrix(matrix=b, pinv=np.linalg.pinv(b))


def allocate(v, eff: EffectivenessMatrix) -> np.ndarray:
    """Minimum-norm per-rotor force components (8,) realizing the wrench v."""
    return eff.pinv @ np.asarray(v, float)


def extract_commands(components, params: VehicleParams) -> np.ndarray:
    """Rotor speeds and tilt angles (8,) from per-rotor force components.

    Speed magnitude comes from the total per-rotor force through the thrust
    coefficient; the tilt angle is the two-argument arctangent of (lateral,
    -lift), so pure lift gives beta = 0 and any command with negative lift
    component stays inside (-pi/2, pi/2). Rotors with negligible force are
    commanded to zero speed and zero tilt.
    """
    comp = np.asarray(components, float)
    u = np.zeros(8)
    for i in range(4):
        lat = comp[2 * i]
        fz = comp[2 * i + 1]
        t = float(np.hypot(lat, fz))
        if t < THRUST_EPS_N:
            continue
        u[i] = ROTOR_SPIN_SIGNS[i] * RAD_TO_RPM * np.sqrt(t / params.k_thrust)
        u[4 + i] = np.arctan2(ROTOR_LATERAL_SIGNS[i] * lat, -fz)
    return u


def wrench_to_command(v, eff: EffectivenessMatrix, params: VehicleParams) -> np.ndarray:
    """The composed wrench-to-command map: allocate then extract.

    Used both to turn controller wrenches into actuator commands and, inside
    the NMPC constraint, to keep those wrenches feasible for the actuators.
    """
    return _K.h_eval(np.asarray(v, float), eff.pinv, params.k_thrust)
