"""Pivot loops for the dense simplex tableau.

Two implementations of the same iteration: a numba-compiled one and a
pure-numpy one. Both apply identical selection rules (smallest-index
entering column, minimum ratio with smallest-basis tie break) and
identical arithmetic, so they produce the same pivots bit for bit.
Set WATERNET_PURE_NUMPY=1 to skip the compiled path; it is also skipped
automatically when numba is unavailable.

Status codes: 0 optimal, 1 unbounded, 2 iteration cap, 3 pivot too small.
"""

from __future__ import annotations

import os

import numpy as np

try:
    from numba import njit

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - environment without numba
    HAS_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn
        if args and callable(args[0]):
            return args[0]
        return wrap


def iterate_numpy(T: np.ndarray, basis: np.ndarray, tol: float,
                  piv_tol: float, max_iter: int) -> tuple[int, int]:
    m = T.shape[0] - 1
    rhs = T.shape[1] - 1
    it = 0
    while it < max_iter:
        it += 1
        negs = np.where(T[m, :rhs] < -tol)[0]
        if negs.size == 0:
            return 0, it
        enter = int(negs[0])
        col = T[:m, enter]
        pos = col > tol
        if not pos.any():
            return 1, it
        ratios = np.where(pos, T[:m, rhs] / np.where(pos, col, 1.0), np.inf)
        rmin = ratios.min()
        tie = rmin + 1e-10 * (1.0 + abs(rmin))
        cand = np.where(ratios <= tie)[0]
        leave = int(cand[np.argmin(basis[cand])])
        piv = T[leave, enter]
        if abs(piv) < piv_tol:
            return 3, it
        T[leave, :] /= piv
        colv = T[:, enter].copy()
        colv[leave] = 0.0
        T -= np.outer(colv, T[leave, :])
        basis[leave] = enter
    return 2, it


@njit(cache=True)
def _iterate_jit(T, basis, tol, piv_tol, max_iter):  # pragma: no cover - mirrored by numpy path
    m = T.shape[0] - 1
    rhs = T.shape[1] - 1
    it = 0
    while it < max_iter:
        it += 1
        enter = -1
        for j in range(rhs):
            if T[m, j] < -tol:
                enter = j
                break
        if enter == -1:
            return 0, it
        rmin = np.inf
        any_pos = False
        for i in range(m):
            a = T[i, enter]
            if a > tol:
                any_pos = True
                r = T[i, rhs] / a
                if r < rmin:
                    rmin = r
        if not any_pos:
            return 1, it
        tie = rmin + 1e-10 * (1.0 + abs(rmin))
        leave = -1
        leave_var = -1
        for i in range(m):
            a = T[i, enter]
            if a > tol:
                r = T[i, rhs] / a
                if r <= tie and (leave == -1 or basis[i] < leave_var):
                    leave = i
                    leave_var = basis[i]
        piv = T[leave, enter]
        if abs(piv) < piv_tol:
            return 3, it
        for j in range(rhs + 1):
            T[leave, j] /= piv
        for i in range(m + 1):
            if i == leave:
                continue
            f = T[i, enter]
            if f != 0.0:
                for j in range(rhs + 1):
                    T[i, j] -= f * T[leave, j]
        basis[leave] = enter
    return 2, it


def _pick():
    if HAS_NUMBA and os.environ.get("WATERNET_PURE_NUMPY", "") not in ("1", "true", "yes"):
        return _iterate_jit, True
    return iterate_numpy, False


iterate, USING_NUMBA = _pick()
