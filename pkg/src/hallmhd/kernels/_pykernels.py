"""Pure numpy implementations of the hot loops.

These are the reference versions; ``_ckernels.pyx`` mirrors them one to one.
"""
import numpy as np

_CHUNK = 4096


def eval_modes(amps, kvecs, kappa, points):
    """Evaluate u(x) = sum_k Re(A_k exp(i kappa k.x)) at arbitrary points.

    amps: (nk, 3) complex, kvecs: (nk, 3) int, points: (P, 3) physical coords.
    """
    points = np.ascontiguousarray(points, dtype=np.float64)
    out = np.empty((points.shape[0], 3))
    kv = np.asarray(kvecs, dtype=np.float64) * kappa
    for start in range(0, points.shape[0], _CHUNK):
        block = points[start:start + _CHUNK]
        phase = np.exp(1j * (block @ kv.T))
        out[start:start + _CHUNK] = (phase @ amps).real
    return out


def _cubic_weights(f):
    # 4-point Lagrange weights at offsets -1, 0, 1, 2
    return (
        -f * (f - 1.0) * (f - 2.0) / 6.0,
        (f + 1.0) * (f - 1.0) * (f - 2.0) / 2.0,
        -(f + 1.0) * f * (f - 2.0) / 2.0,
        (f + 1.0) * f * (f - 1.0) / 6.0,
    )


def tricubic_clipped(field, idx):
    """Periodic tricubic Lagrange interpolation clipped to the enclosing cell.

    field: (M, M, M) samples; idx: (P, 3) positions in grid-index units,
    already wrapped into [0, M). The result never leaves the min/max of the
    eight corner samples, so the interpolant cannot create new extrema.
    """
    M = field.shape[0]
    flat = np.ascontiguousarray(field).ravel()
    base = np.floor(idx).astype(np.int64)
    frac = idx - base
    w = [_cubic_weights(frac[:, a]) for a in range(3)]
    ind = [[(base[:, a] + o) % M for o in (-1, 0, 1, 2)] for a in range(3)]

    val = np.zeros(idx.shape[0])
    lo = np.full(idx.shape[0], np.inf)
    hi = np.full(idx.shape[0], -np.inf)
    for i in range(4):
        ri = ind[0][i] * (M * M)
        for j in range(4):
            rij = ri + ind[1][j] * M
            wij = w[0][i] * w[1][j]
            for k in range(4):
                s = flat[rij + ind[2][k]]
                val += wij * w[2][k] * s
                if 1 <= i <= 2 and 1 <= j <= 2 and 1 <= k <= 2:
                    np.minimum(lo, s, out=lo)
                    np.maximum(hi, s, out=hi)
    return np.minimum(np.maximum(val, lo), hi)


def convolve_direct(field, offsets, weights):
    """Periodic direct-sum convolution: out(x) = sum_o w_o f(x - o)."""
    out = np.zeros_like(field, dtype=np.float64)
    for (o1, o2, o3), w in zip(offsets, weights):
        out += w * np.roll(field, (int(o1), int(o2), int(o3)), axis=(0, 1, 2))
    return out
