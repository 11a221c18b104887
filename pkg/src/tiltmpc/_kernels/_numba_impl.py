"""Numba-jitted kernels: the default backend when numba is installed.

Scalar inner loops; signatures match `_numpy_impl` exactly. Compiled lazily
on first call and cached on disk.
"""

import numpy as np
from numba import njit

from ..constants import (
    GIMBAL_GUARD_RAD,
    RAD_TO_RPM,
    THRUST_EPS_N,
)
from ..errors import SingularAttitudeError

BACKEND_NAME = "numba"

_GUARD = float(np.pi / 2 - GIMBAL_GUARD_RAD)
_SPIN = (1.0, 1.0, -1.0, -1.0)
_LATSIGN = (1.0, -1.0, 1.0, -1.0)


@njit(cache=True)
def _wrap_pi_scalar(a):
    w = (a + np.pi) % (2.0 * np.pi) - np.pi
    if w == -np.pi:
        w = np.pi
    return w


@njit(cache=True)
def deriv(x, wrench, dist, phys):
    m = phys[0]
    jx, jy, jz = phys[1], phys[2], phys[3]
    gz = phys[10]

    phi, th, psi = x[3], x[4], x[5]
    if abs(th) >= _GUARD:
        raise SingularAttitudeError("pitch within guard band of +-90 deg")
    p, q, r = x[9], x[10], x[11]

    cphi, sphi = np.cos(phi), np.sin(phi)
    cth, sth = np.cos(th), np.sin(th)
    cpsi, spsi = np.cos(psi), np.sin(psi)

    fx, fy, fz = wrench[0], wrench[1], wrench[2]
    fi_x = cpsi * cth * fx + (cpsi * sth * sphi - spsi * cphi) * fy + (cpsi * sth * cphi + spsi * sphi) * fz
    fi_y = spsi * cth * fx + (spsi * sth * sphi + cpsi * cphi) * fy + (spsi * sth * cphi - cpsi * sphi) * fz
    fi_z = -sth * fx + cth * sphi * fy + cth * cphi * fz

    out = np.empty(12)
    out[0] = x[6]
    out[1] = x[7]
    out[2] = x[8]
    tth = sth / cth
    out[3] = p + sphi * tth * q + cphi * tth * r
    out[4] = cphi * q - sphi * r
    out[5] = (sphi * q + cphi * r) / cth
    out[6] = (fi_x - phys[4] * x[6] + dist[0]) / m
    out[7] = (fi_y - phys[5] * x[7] + dist[1]) / m
    out[8] = gz + (fi_z - phys[6] * x[8] + dist[2]) / m
    out[9] = (-(q * jz * r - r * jy * q) + wrench[3] - phys[7] * p + dist[3]) / jx
    out[10] = (-(r * jx * p - p * jz * r) + wrench[4] - phys[8] * q + dist[4]) / jy
    out[11] = (-(p * jy * q - q * jx * p) + wrench[5] - phys[9] * r + dist[5]) / jz
    return out


@njit(cache=True)
def rk4(x, wrench, dist, phys, dt, wrap):
    k1 = deriv(x, wrench, dist, phys)
    k2 = deriv(x + 0.5 * dt * k1, wrench, dist, phys)
    k3 = deriv(x + 0.5 * dt * k2, wrench, dist, phys)
    k4 = deriv(x + dt * k3, wrench, dist, phys)
    out = x + (dt / 6.0) * (k1 + 2.0 * (k2 + k3) + k4)
    if wrap:
        out[3] = _wrap_pi_scalar(out[3])
        out[5] = _wrap_pi_scalar(out[5])
    return out


@njit(cache=True)
def rollout(x0, V, phys, dt):
    n = V.shape[0]
    zero = np.zeros(6)
    X = np.empty((n + 1, 12))
    X[0] = x0
    for i in range(n):
        X[i + 1] = rk4(X[i], V[i], zero, phys, dt, False)
    return X


@njit(cache=True)
def linearize_traj(X, V, phys, dt, eps):
    n = V.shape[0]
    zero = np.zeros(6)
    F = np.empty((n, 12))
    A = np.empty((n, 12, 12))
    B = np.empty((n, 12, 6))
    for i in range(n):
        base = rk4(X[i], V[i], zero, phys, dt, False)
        F[i] = base
        for j in range(12):
            xp = X[i].copy()
            xp[j] += eps
            col = (rk4(xp, V[i], zero, phys, dt, False) - base) / eps
            for k in range(12):
                A[i, k, j] = col[k]
        for j in range(6):
            vp = V[i].copy()
            vp[j] += eps
            col = (rk4(X[i], vp, zero, phys, dt, False) - base) / eps
            for k in range(12):
                B[i, k, j] = col[k]
    return F, A, B


@njit(cache=True)
def h_eval(v, bdag, k_thrust):
    up = bdag @ v
    u = np.zeros(8)
    for i in range(4):
        lat = up[2 * i]
        fz = up[2 * i + 1]
        t = np.hypot(lat, fz)
        if t < THRUST_EPS_N:
            continue
        u[i] = _SPIN[i] * RAD_TO_RPM * np.sqrt(t / k_thrust)
        u[4 + i] = np.arctan2(_LATSIGN[i] * lat, -fz)
    return u


@njit(cache=True)
def h_jac(v, bdag, k_thrust, eps, lift_tol):
    u0 = h_eval(v, bdag, k_thrust)
    G = np.empty((8, 6))
    for j in range(6):
        vp = v.copy()
        vp[j] += eps
        col = (h_eval(vp, bdag, k_thrust) - u0) / eps
        for k in range(8):
            G[k, j] = col[k]
    up = bdag @ v
    for i in range(4):
        if abs(up[2 * i + 1]) < lift_tol:
            for j in range(6):
                G[4 + i, j] = 0.0
    return u0, G
