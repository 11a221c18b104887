"""Pure-numpy kernels: the fallback backend.

Same call signatures as the numba backend. The trajectory linearization is
vectorized over the finite-difference perturbation batch so the fallback
stays usable in closed loop, just slower than the jitted path.
"""

import numpy as np

from ..constants import (
    GIMBAL_GUARD_RAD,
    RAD_TO_RPM,
    ROTOR_LATERAL_SIGNS,
    ROTOR_SPIN_SIGNS,
    THRUST_EPS_N,
)
from ..errors import SingularAttitudeError

BACKEND_NAME = "numpy"


def _wrap_pi(a):
    w = (a + np.pi) % (2.0 * np.pi) - np.pi
    return np.where(w == -np.pi, np.pi, w)


def deriv_batch(X, W, dist, phys):
    """Time derivative of a batch of states.

    X: (B, 12) states, W: (B, 6) body wrenches, dist: (6,) disturbance
    (inertial force, body moment), phys: (11,) packed parameters.
    """
    m = phys[0]
    jx, jy, jz = phys[1], phys[2], phys[3]
    at = phys[4:7]
    ar = phys[7:10]
    gz = phys[10]

    phi, th, psi = X[:, 3], X[:, 4], X[:, 5]
    if np.any(np.abs(th) >= np.pi / 2 - GIMBAL_GUARD_RAD):
        raise SingularAttitudeError("pitch within guard band of +-90 deg")
    vel = X[:, 6:9]
    p, q, r = X[:, 9], X[:, 10], X[:, 11]

    cphi, sphi = np.cos(phi), np.sin(phi)
    cth, sth = np.cos(th), np.sin(th)
    cpsi, spsi = np.cos(psi), np.sin(psi)

    fx, fy, fz = W[:, 0], W[:, 1], W[:, 2]
    # rows of R = Rz(psi) Ry(theta) Rx(phi) applied to the body force
    fi_x = cpsi * cth * fx + (cpsi * sth * sphi - spsi * cphi) * fy + (cpsi * sth * cphi + spsi * sphi) * fz
    fi_y = spsi * cth * fx + (spsi * sth * sphi + cpsi * cphi) * fy + (spsi * sth * cphi - cpsi * sphi) * fz
    fi_z = -sth * fx + cth * sphi * fy + cth * cphi * fz

    out = np.empty_like(X)
    out[:, 0:3] = vel
    tth = sth / cth
    out[:, 3] = p + sphi * tth * q + cphi * tth * r
    out[:, 4] = cphi * q - sphi * r
    out[:, 5] = (sphi * q + cphi * r) / cth
    out[:, 6] = (fi_x - at[0] * vel[:, 0] + dist[0]) / m
    out[:, 7] = (fi_y - at[1] * vel[:, 1] + dist[1]) / m
    out[:, 8] = gz + (fi_z - at[2] * vel[:, 2] + dist[2]) / m
    out[:, 9] = (-(q * jz * r - r * jy * q) + W[:, 3] - ar[0] * p + dist[3]) / jx
    out[:, 10] = (-(r * jx * p - p * jz * r) + W[:, 4] - ar[1] * q + dist[4]) / jy
    out[:, 11] = (-(p * jy * q - q * jx * p) + W[:, 5] - ar[2] * r + dist[5]) / jz
    return out


def deriv(x, wrench, dist, phys):
    return deriv_batch(x[None, :], wrench[None, :], dist, phys)[0]


def rk4_batch(X, W, dist, phys, dt, wrap):
    k1 = deriv_batch(X, W, dist, phys)
    k2 = deriv_batch(X + 0.5 * dt * k1, W, dist, phys)
    k3 = deriv_batch(X + 0.5 * dt * k2, W, dist, phys)
    k4 = deriv_batch(X + dt * k3, W, dist, phys)
    out = X + (dt / 6.0) * (k1 + 2.0 * (k2 + k3) + k4)
    if wrap:
        out[:, 3] = _wrap_pi(out[:, 3])
        out[:, 5] = _wrap_pi(out[:, 5])
    return out


def rk4(x, wrench, dist, phys, dt, wrap):
    return rk4_batch(x[None, :], wrench[None, :], dist, phys, dt, wrap)[0]


_ZERO6 = np.zeros(6)


def rollout(x0, V, phys, dt):
    """Integrate the disturbance-free model under the wrench sequence V (N, 6)."""
    n = V.shape[0]
    X = np.empty((n + 1, 12))
    X[0] = x0
    for i in range(n):
        X[i + 1] = rk4(X[i], V[i], _ZERO6, phys, dt, False)
    return X


def linearize_traj(X, V, phys, dt, eps):
    """Per-stage transition plus forward-difference Jacobians.

    X: (N+1, 12) iterate states, V: (N, 6) wrenches. Returns
    (F, A, B) with F[i] = step(X[i], V[i]), A = dF/dx, B = dF/dv.
    """
    n = V.shape[0]
    F = np.empty((n, 12))
    A = np.empty((n, 12, 12))
    B = np.empty((n, 12, 6))
    for i in range(n):
        Xb = np.repeat(X[i][None, :], 19, axis=0)
        Wb = np.repeat(V[i][None, :], 19, axis=0)
        for j in range(12):
            Xb[1 + j, j] += eps
        for j in range(6):
            Wb[13 + j, j] += eps
        out = rk4_batch(Xb, Wb, _ZERO6, phys, dt, False)
        F[i] = out[0]
        A[i] = (out[1:13] - out[0]).T / eps
        B[i] = (out[13:19] - out[0]).T / eps
    return F, A, B


def h_eval(v, bdag, k_thrust):
    """Map a wrench to the actuator command via the precomputed allocator."""
    up = bdag @ v
    u = np.zeros(8)
    for i in range(4):
        lat = up[2 * i]
        fz = up[2 * i + 1]
        t = np.hypot(lat, fz)
        if t < THRUST_EPS_N:
            continue
        u[i] = ROTOR_SPIN_SIGNS[i] * RAD_TO_RPM * np.sqrt(t / k_thrust)
        u[4 + i] = np.arctan2(ROTOR_LATERAL_SIGNS[i] * lat, -fz)
    return u


def h_jac(v, bdag, k_thrust, eps, lift_tol):
    """Command plus forward-difference Jacobian of the wrench-to-command map.

    Tilt rows are frozen to zero for rotors whose lift component at the base
    point is within lift_tol of zero (tilt undefined there).
    """
    u0 = h_eval(v, bdag, k_thrust)
    G = np.empty((8, 6))
    for j in range(6):
        vp = v.copy()
        vp[j] += eps
        G[:, j] = (h_eval(vp, bdag, k_thrust) - u0) / eps
    up = bdag @ v
    for i in range(4):
        if abs(up[2 * i + 1]) < lift_tol:
            G[4 + i, :] = 0.0
    return u0, G
