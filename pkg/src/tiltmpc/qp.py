"""Dense convex QP solver (dual active-set method).

Solves  min 0.5 z'Hz + g'z  s.t.  A z = b,  C z <= d  for strictly convex H.
Starts from the equality-constrained optimum and adds violated inequalities
one at a time, dropping blocking constraints along the way; for positive
definite H this terminates at the exact optimum or proves infeasibility.
Fully deterministic: ties break on the lowest row index.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class QpResult:
    z: np.ndarray
    ineq_multipliers: np.ndarray
    eq_multipliers: np.ndarray
    status: str               # "optimal" | "infeasible" | "iteration_limit"
    iterations: int
    kkt_residual: float
    objective: float
    active_set: np.ndarray    # indices of active inequality rows


def kkt_residual(H, g, C, d, A, b, z, lam, nu) -> float:
    """Max-norm KKT residual: stationarity, feasibility, complementarity."""
    stat = H @ z + g
    if C is not None and C.shape[0]:
        stat = stat + C.T @ lam
    if A is not None and A.shape[0]:
        stat = stat + A.T @ nu
    r = float(np.abs(stat).max())
    if A is not None and A.shape[0]:
        r = max(r, float(np.abs(A @ z - b).max()))
    if C is not None and C.shape[0]:
        s = C @ z - d
        r = max(r, float(max(s.max(), 0.0)))
        r = max(r, float(max(-lam.min(), 0.0)))
        r = max(r, float(np.abs(lam * s).max()))
    return r


def _kkt_solve(H, Nw, rhs_top, rhs_bot):
    """Solve [[H, Nw'], [Nw, 0]] [x; y] = [rhs_top; rhs_bot]."""
    n = H.shape[0]
    k = Nw.shape[0]
    if k == 0:
        return np.linalg.solve(H, rhs_top), np.empty(0)
    M = np.zeros((n + k, n + k))
    M[:n, :n] = H
    M[:n, n:] = Nw.T
    M[n:, :n] = Nw
    rhs = np.concatenate((rhs_top, rhs_bot))
    try:
        sol = np.linalg.solve(M, rhs)
    except np.linalg.LinAlgError:
        sol = np.linalg.lstsq(M, rhs, rcond=None)[0]
    return sol[:n], sol[n:]


def solve_qp(H, g, C=None, d=None, A=None, b=None, *,
             feas_tol: float = 1e-9, max_iter: int | None = None) -> QpResult:
    """Solve the QP; H must be symmetric positive definite.

    C/d may be None for an unconstrained or equality-only problem. Returns
    multipliers for every inequality row (zero where inactive).
    """
    H = np.asarray(H, float)
    g = np.asarray(g, float)
    n = g.shape[0]
    mi = 0 if C is None else np.asarray(C).shape[0]
    me = 0 if A is None else np.asarray(A).shape[0]
    C = np.zeros((0, n)) if C is None else np.asarray(C, float).reshape(mi, n)
    d = np.zeros(0) if d is None else np.asarray(d, float).reshape(mi)
    A = np.zeros((0, n)) if A is None else np.asarray(A, float).reshape(me, n)
    b = np.zeros(0) if b is None else np.asarray(b, float).reshape(me)
    if max_iter is None:
        max_iter = 20 * (n + mi + me) + 50

    def _finish(z, nu, work, lam_work, status, iters):
        lam = np.zeros(mi)
        for idx, w in enumerate(work):
            lam[w] = lam_work[idx]
        res = (np.inf if status == "infeasible" else
               kkt_residual(H, g, C if mi else None, d, A if me else None, b, z, lam, nu))
        return QpResult(
            z=z, ineq_multipliers=lam, eq_multipliers=nu, status=status,
            iterations=iters, kkt_residual=res,
            objective=float(0.5 * z @ H @ z + g @ z),
            active_set=np.array(sorted(work), dtype=int),
        )

    # equality-constrained start; stationarity H z + g + A' nu = 0 holds with
    # nu taken directly from the KKT solve
    z, nu = _kkt_solve(H, A, -g, b)
    work: list[int] = []          # active inequality rows, in insertion order
    lam_work: list[float] = []
    iters = 0

    while iters < max_iter:
        iters += 1
        if mi == 0:
            return _finish(z, nu, work, lam_work, "optimal", iters)
        slack = C @ z - d
        scale = 1.0 + np.abs(d)
        if np.all(slack <= feas_tol * scale):
            return _finish(z, nu, work, lam_work, "optimal", iters)
        p = int(np.argmax(slack / scale))
        viol = float(slack[p])
        c_p = C[p]
        lam_p = 0.0

        inner_cap = n + me + mi + 5
        for _ in range(inner_cap):
            Nw = np.vstack((A, C[work])) if (me or work) else np.zeros((0, n))
            dz, dmu = _kkt_solve(H, Nw, -c_p, np.zeros(me + len(work)))
            denom = float(c_p @ dz)       # = -dz'H dz <= 0

            # blocking: active multipliers move as lam_k + t * dmu_k >= 0
            t1 = np.inf
            k_block = -1
            for idx in range(len(work)):
                rate = dmu[me + idx]
                if rate < -1e-13:
                    tk = -lam_work[idx] / rate
                    if tk < t1 - 1e-15:
                        t1 = tk
                        k_block = idx
            t2 = np.inf if denom >= -1e-13 else viol / (-denom)
            t = min(t1, t2)
            if not np.isfinite(t):
                return _finish(z, nu, work, lam_work, "infeasible", iters)

            z = z + t * dz
            if me:
                nu = nu + t * dmu[:me]
            for idx in range(len(work)):
                lam_work[idx] += t * dmu[me + idx]
            lam_p += t
            viol = float(c_p @ z - d[p])

            if t1 < t2 and k_block >= 0:
                work.pop(k_block)
                lam_work.pop(k_block)
                continue
            work.append(p)
            lam_work.append(lam_p)
            break
        else:
            return _finish(z, nu, work, lam_work, "iteration_limit", iters)

    return _finish(z, nu, work, lam_work, "iteration_limit", iters)
