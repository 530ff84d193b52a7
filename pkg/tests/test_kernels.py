import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hallmhd import kernels
from hallmhd.kernels import _pykernels

compiled = pytest.mark.skipif("compiled" not in kernels.backends(), reason="compiled kernels not built")


def _modes(rng, n=5):
    kv = rng.integers(-2, 3, (n, 3))
    amps = rng.standard_normal((n, 3)) + 1j * rng.standard_normal((n, 3))
    return amps, kv


def test_eval_modes_matches_formula(rng):
    amps, kv = _modes(rng)
    pts = rng.uniform(0, 3, (7, 3))
    ref = np.real(np.exp(1j * 2.0 * pts @ kv.T) @ amps)
    assert np.allclose(kernels.eval_modes(amps, kv, 2.0, pts, backend="python"), ref, atol=1e-13)


def test_cubic_weights_partition_of_unity():
    f = np.linspace(0, 1, 11)
    w = np.array(_pykernels._cubic_weights(f))
    assert w.shape == (4, 11) and np.allclose(w.sum(axis=0), 1.0)
    # exact at the nodes
    assert np.allclose(w[:, 0], [0, 1, 0, 0]) and np.allclose(w[:, -1], [0, 0, 1, 0])


def test_tricubic_reproduces_quadratics():
    M = 12
    i = np.arange(M, dtype=float)
    f = np.add.outer(np.add.outer(0.1 * (i - 5) ** 2, 0.2 * i), 0.0 * i)
    idx = np.array([[4.3, 5.7, 2.2], [6.5, 3.1, 7.9]])
    ref = 0.1 * (idx[:, 0] - 5) ** 2 + 0.2 * idx[:, 1]
    assert np.allclose(kernels.tricubic_clipped(f, idx, backend="python"), ref, atol=1e-12)


def test_convolve_direct_shift(rng):
    f = rng.standard_normal((6, 6, 6))
    out = kernels.convolve_direct(f, np.array([[1, 0, -2]]), np.array([1.0]), backend="python")
    assert np.array_equal(out, np.roll(f, (1, 0, -2), axis=(0, 1, 2)))


@compiled
@given(st.integers(0, 2 ** 31 - 1))
def test_backends_agree(seed):
    rng = np.random.default_rng(seed)
    amps, kv = _modes(rng)
    pts = rng.uniform(-1, 7, (50, 3))
    a = kernels.eval_modes(amps, kv, 1.3, pts, backend="python")
    b = kernels.eval_modes(amps, kv, 1.3, pts, backend="compiled")
    assert np.allclose(a, b, rtol=1e-12, atol=1e-12)
    f = rng.uniform(1, 2, (8, 8, 8))
    idx = rng.uniform(0, 8, (40, 3))
    ta = kernels.tricubic_clipped(f, idx, backend="python")
    tb = kernels.tricubic_clipped(f, idx, backend="compiled")
    assert np.allclose(ta, tb, rtol=0, atol=1e-13)
    assert tb.min() >= f.min() and tb.max() <= f.max()
    off = rng.integers(-2, 3, (9, 3))
    w = rng.uniform(0, 1, 9)
    ca = kernels.convolve_direct(f, off, w, backend="python")
    cb = kernels.convolve_direct(f, off, w, backend="compiled")
    assert np.allclose(ca, cb, rtol=0, atol=1e-13)


def test_unknown_backend():
    with pytest.raises(ValueError):
        kernels.eval_modes(np.zeros((1, 3), complex), np.zeros((1, 3), int), 1.0, np.zeros((1, 3)),
                           backend="gpu")


def test_pure_fallback_selected_by_env():
    env = dict(os.environ, HALLMHD_PURE="1")
    out = subprocess.run([sys.executable, "-c", "from hallmhd import kernels; print(kernels.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
