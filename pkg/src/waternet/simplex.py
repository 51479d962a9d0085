"""Dense two-phase simplex over nonnegative variables with upper bounds.

Small by design: the enumerative solver throws thousands of little LPs at
it, so everything is plain dense numpy with the pivot loop delegated to
the compiled kernel. Anti-cycling comes from smallest-index selection
rules; a pivot smaller than ``piv_tol`` aborts with NumericalBreakdown
rather than dividing by dust.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels

LE, GE, EQ = 0, 1, 2


class NumericalBreakdown(ArithmeticError):
    pass


@dataclass
class LpResult:
    status: str                   # optimal | infeasible | unbounded
    x: np.ndarray | None
    objective: float | None
    iterations: int


def solve_lp(
    c: np.ndarray,
    A: np.ndarray,
    sense: np.ndarray,
    b: np.ndarray,
    ub: np.ndarray | None = None,
    maximize: bool = False,
    tol: float = 1e-9,
    piv_tol: float = 1e-12,
) -> LpResult:
    """Optimize c.x subject to rows (A, sense, b), 0 <= x <= ub.

    ``sense`` holds LE/GE/EQ per row. Finite upper bounds become extra
    rows. Raises NumericalBreakdown on degenerate pivots or stalling.
    """
    c = np.asarray(c, dtype=np.float64)
    n = c.size
    if maximize:
        c = -c
    A = np.asarray(A, dtype=np.float64).reshape(-1, n) if np.size(A) else np.zeros((0, n))
    b = np.asarray(b, dtype=np.float64).reshape(-1)
    sense = np.asarray(sense, dtype=np.int8).reshape(-1)

    if ub is not None:
        ub = np.asarray(ub, dtype=np.float64)
        fin = np.where(np.isfinite(ub))[0]
        if fin.size:
            rows = np.zeros((fin.size, n))
            rows[np.arange(fin.size), fin] = 1.0
            A = np.vstack([A, rows])
            b = np.concatenate([b, ub[fin]])
            sense = np.concatenate([sense, np.full(fin.size, LE, dtype=np.int8)])

    m = A.shape[0]
    if m == 0:
        if (c < -tol).any():
            return LpResult("unbounded", None, None, 0)
        x = np.zeros(n)
        val = 0.0
        return LpResult("optimal", x, -val if maximize else val, 0)

    A = A.copy()
    b = b.copy()
    sense = sense.copy()
    neg = b < 0
    A[neg] *= -1.0
    b[neg] *= -1.0
    flip = neg & (sense != EQ)
    sense[flip] = np.where(sense[flip] == LE, GE, LE)

    le_rows = np.where(sense == LE)[0]
    ge_rows = np.where(sense == GE)[0]
    art_rows = np.where(sense != LE)[0]
    n_slack = le_rows.size
    n_sur = ge_rows.size
    n_art = art_rows.size
    width = n + n_slack + n_sur + n_art + 1

    T = np.zeros((m + 1, width))
    T[:m, :n] = A
    T[:m, -1] = b
    basis = np.full(m, -1, dtype=np.int64)
    for k, i in enumerate(le_rows):
        T[i, n + k] = 1.0
        basis[i] = n + k
    for k, i in enumerate(ge_rows):
        T[i, n + n_slack + k] = -1.0
    art0 = n + n_slack + n_sur
    for k, i in enumerate(art_rows):
        T[i, art0 + k] = 1.0
        basis[i] = art0 + k

    max_iter = 2000 + 200 * (m + width)

    # phase 1: drive the artificial total to zero
    if n_art:
        for i in art_rows:
            T[m, :] -= T[i, :]
        T[m, art0:art0 + n_art] = 0.0
        code, _ = _kernels.iterate(T, basis, tol, piv_tol, max_iter)
        if code == 3 or code == 2:
            raise NumericalBreakdown("phase 1 stalled")
        infeas = -T[m, -1]
        if infeas > tol * (1.0 + float(np.abs(b).sum())):
            return LpResult("infeasible", None, None, 0)
        keep = np.ones(m, dtype=bool)
        for i in range(m):
            if basis[i] >= art0:
                piv_col = -1
                for j in range(art0):
                    if abs(T[i, j]) > piv_tol * 10:
                        piv_col = j
                        break
                if piv_col == -1:
                    keep[i] = False
                    continue
                T[i, :] /= T[i, piv_col]
                colv = T[:, piv_col].copy()
                colv[i] = 0.0
                T -= np.outer(colv, T[i, :])
                basis[i] = piv_col
        if not keep.all():
            T = np.vstack([T[:m][keep], T[m:]])
            basis = basis[keep]
            m = int(keep.sum())
    T = np.hstack([T[:, :art0], T[:, -1:]])

    # phase 2: the real objective expressed in the current basis
    full_c = np.zeros(art0)
    full_c[:n] = c
    T[m, :] = 0.0
    T[m, :art0] = full_c
    for i in range(m):
        cb = full_c[basis[i]]
        if cb != 0.0:
            T[m, :] -= cb * T[i, :]
    code, iters = _kernels.iterate(T, basis, tol, piv_tol, max_iter)
    if code == 3 or code == 2:
        raise NumericalBreakdown("phase 2 stalled")
    if code == 1:
        return LpResult("unbounded", None, None, iters)
    x = np.zeros(art0)
    for i in range(m):
        x[basis[i]] = T[i, -1]
    xs = x[:n]
    val = float(c @ xs)
    return LpResult("optimal", xs, -val if maximize else val, iters)
