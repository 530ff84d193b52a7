"""Hot-loop kernels with a compiled backend and a numpy fallback.

The compiled extension is used when it imports; setting ``HALLMHD_PURE=1``
forces the numpy versions. Both backends expose the same three functions
with identical semantics.
"""
import os

import numpy as np

from . import _pykernels

try:
    if os.environ.get("HALLMHD_PURE", "") not in ("", "0"):
        raise ImportError("pure backend requested")
    from . import _ckernels
except ImportError:
    _ckernels = None

BACKEND = "compiled" if _ckernels is not None else "python"


def backends():
    """Names of the backends available in this interpreter."""
    return ["python"] + (["compiled"] if _ckernels is not None else [])


def _impl(backend):
    if backend is None:
        backend = BACKEND
    if backend == "compiled":
        if _ckernels is None:
            raise RuntimeError("compiled kernels are not built")
        return _ckernels
    if backend == "python":
        return _pykernels
    raise ValueError(f"unknown backend {backend!r}")


def eval_modes(amps, kvecs, kappa, points, backend=None):
    """Sum of complex plane-wave amplitudes at arbitrary points, shape (P, 3)."""
    amps = np.ascontiguousarray(amps, dtype=np.complex128)
    kvecs = np.ascontiguousarray(kvecs, dtype=np.int64)
    points = np.ascontiguousarray(np.atleast_2d(points), dtype=np.float64)
    if amps.shape[0] == 0:
        return np.zeros((points.shape[0], 3))
    return _impl(backend).eval_modes(amps, kvecs, float(kappa), points)


def tricubic_clipped(field, idx, backend=None):
    """Bound-preserving periodic tricubic interpolation at index positions."""
    field = np.ascontiguousarray(field, dtype=np.float64)
    idx = np.ascontiguousarray(np.atleast_2d(idx), dtype=np.float64)
    return _impl(backend).tricubic_clipped(field, idx)


def convolve_direct(field, offsets, weights, backend=None):
    """Periodic direct-sum convolution with integer grid offsets."""
    field = np.ascontiguousarray(field, dtype=np.float64)
    offsets = np.ascontiguousarray(offsets, dtype=np.int64)
    weights = np.ascontiguousarray(weights, dtype=np.float64)
    return _impl(backend).convolve_direct(field, offsets, weights)
