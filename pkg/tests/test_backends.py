import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ntrubke import _backend, _pykernels

import oracles

compiled = pytest.importorskip("ntrubke._kernels")


def test_compiled_is_default_when_built():
    if "NTRUBKE_BACKEND" not in os.environ:
        assert _backend.active_backend() == "compiled"
    assert _backend.available_backends() == ["compiled", "python"]


def test_unknown_backend_rejected():
    with pytest.raises(ValueError):
        _backend.set_backend("fortran")


def test_use_backend_restores():
    before = _backend.active_backend()
    with _backend.use_backend("python"):
        assert _backend.active_backend() == "python"
    assert _backend.active_backend() == before


@pytest.mark.parametrize("choice", ["python", "compiled"])
def test_env_var_selects_backend(choice):
    env = dict(os.environ, NTRUBKE_BACKEND=choice)
    out = subprocess.run(
        [sys.executable, "-c", "from ntrubke import _backend; print(_backend.active_backend())"],
        capture_output=True, text=True, env=env, check=True,
    ).stdout.strip()
    assert out == choice


def test_env_var_bad_value_fails_import():
    env = dict(os.environ, NTRUBKE_BACKEND="gpu")
    proc = subprocess.run([sys.executable, "-c", "import ntrubke"], capture_output=True, env=env)
    assert proc.returncode != 0 and b"NTRUBKE_BACKEND" in proc.stderr


vectors = st.integers(1, 40).flatmap(
    lambda n: st.tuples(
        st.lists(st.integers(-5000, 5000), min_size=n, max_size=n),
        st.lists(st.integers(-5000, 5000), min_size=n, max_size=n),
        st.sampled_from([0, 3, 41, 2048, 4096]),
    )
)


@settings(max_examples=300, deadline=None)
@given(vectors)
def test_convolution_kernels_agree(case):
    a, b, m = case
    a64, b64 = np.array(a, dtype=np.int64), np.array(b, dtype=np.int64)
    fast = compiled.cyclic_convolve(a64, b64, m)
    slow = _pykernels.cyclic_convolve(a64, b64, m)
    assert fast.tolist() == slow.tolist() == oracles.schoolbook(a, b, m or None)


@pytest.mark.parametrize("n", [509, 677, 821])
def test_sparse_and_dense_paths_agree(n, rng):
    dense = rng.integers(-1024, 1024, n)
    for nonzeros in (2, 48, 49, 300):
        sparse = np.zeros(n, dtype=np.int64)
        sparse[rng.choice(n, nonzeros, replace=False)] = rng.choice([-1, 1], nonzeros)
        expected = compiled.cyclic_convolve(sparse, dense, 2048)
        assert np.array_equal(_pykernels.cyclic_convolve(sparse, dense, 2048), expected)
        assert np.array_equal(_pykernels.cyclic_convolve(dense, sparse, 2048), expected)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.integers(-1, 1), min_size=2, max_size=30), st.sampled_from([2, 3, 5, 7]))
def test_inverse_kernels_agree(f, p):
    f64 = np.array(f, dtype=np.int64)
    fast, slow = compiled.inverse_mod_prime(f64, p), _pykernels.inverse_mod_prime(f64, p)
    reference = oracles.solve_inverse(f, p)
    if reference is None:
        assert fast is None and slow is None
    else:
        assert fast.tolist() == slow.tolist() == [x % p for x in reference]
