"""The compiled and pure-numpy pivot loops must agree bit for bit."""

import os
import subprocess
import sys

import numpy as np
import pytest

from waternet import _kernels


def tableau(rng, m, n):
    """Phase-2 start: slack basis, nonnegative rhs."""
    A = rng.integers(-3, 4, size=(m, n)).astype(float)
    b = rng.uniform(0.0, 5.0, size=m)
    c = rng.integers(-4, 5, size=n).astype(float)
    T = np.zeros((m + 1, n + m + 1))
    T[:m, :n] = A
    T[:m, n:n + m] = np.eye(m)
    T[:m, -1] = b
    T[m, :n] = c
    basis = np.arange(n, n + m, dtype=np.int64)
    return T, basis


@pytest.mark.parametrize("seed", range(25))
def test_paths_pivot_identically(seed):
    rng = np.random.default_rng(seed)
    m = int(rng.integers(2, 6))
    n = int(rng.integers(2, 6))
    T, basis = tableau(rng, m, n)
    Ta, ba = T.copy(), basis.copy()
    Tb, bb = T.copy(), basis.copy()
    ca, ia = _kernels.iterate_numpy(Ta, ba, 1e-9, 1e-12, 500)
    cb, ib = _kernels._iterate_jit(Tb, bb, 1e-9, 1e-12, 500)
    assert (ca, ia) == (cb, ib)
    assert np.array_equal(ba, bb)
    assert Ta.tobytes() == Tb.tobytes()


def test_code_optimal_when_no_negative_cost():
    T = np.array([[1.0, 1.0, 3.0], [0.0, 2.0, 0.0]])
    basis = np.array([0], dtype=np.int64)
    code, _ = _kernels.iterate_numpy(T, basis, 1e-9, 1e-12, 10)
    assert code == 0


def test_code_unbounded_when_column_nonpositive():
    T = np.array([[-1.0, 1.0, 3.0], [-2.0, 0.0, 0.0]])
    basis = np.array([1], dtype=np.int64)
    code, _ = _kernels.iterate_numpy(T, basis, 1e-9, 1e-12, 10)
    assert code == 1


def test_code_iteration_cap():
    T = np.array([[1.0, 1.0, 3.0], [-2.0, 0.0, 0.0]])
    basis = np.array([1], dtype=np.int64)
    code, it = _kernels.iterate_numpy(T, basis, 1e-9, 1e-12, 0)
    assert (code, it) == (2, 0)


def test_code_tiny_pivot():
    T = np.array([[1e-6, 1.0, 3.0], [-2.0, 0.0, 0.0]])
    basis = np.array([1], dtype=np.int64)
    code, _ = _kernels.iterate_numpy(T, basis, 1e-9, 1e-3, 10)
    assert code == 3


def _probe_flag(env_value):
    env = dict(os.environ)
    env.pop("WATERNET_PURE_NUMPY", None)
    if env_value is not None:
        env["WATERNET_PURE_NUMPY"] = env_value
    out = subprocess.run(
        [sys.executable, "-c",
         "from waternet._kernels import USING_NUMBA; print(USING_NUMBA)"],
        capture_output=True, text=True, env=env, check=True)
    return out.stdout.strip()


def test_env_flag_selects_numpy_path():
    assert _probe_flag("1") == "False"


@pytest.mark.skipif(not _kernels.HAS_NUMBA, reason="numba not installed")
def test_default_path_is_compiled():
    assert _probe_flag(None) == "True"
