"""Embedded Dormand-Prince 4(5) integrator with local error control."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# Dormand-Prince tableau (FSAL); the 5th-order solution is propagated
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B5 - _B4


class StepUnderflow(RuntimeError):
    """Adaptive step fell below the floor; carries the failing interval label."""


@dataclass
class IntegrationStats:
    accepted: int = 0
    rejected: int = 0
    evaluations: int = 0
    steps: list = field(default_factory=list)


def _stage(f, t, y, h, k0):
    K = [k0]
    for s in range(1, 7):
        ys = y + h * sum(a * K[j] for j, a in enumerate(_A[s]) if a != 0.0)
        K.append(f(t + _C[s] * h, ys))
    return K


def dopri45(f, t0, y0, t_end, tol, *, atol=None, h0=None, fixed_step=None,
            min_step_ratio=1e-10, max_steps=1_000_000, label="", stats=None):
    """Integrate y' = f(t, y) from t0 to t_end; returns (y(t_end), stats).

    Local error per step is kept below atol + tol * max(|y_n|, |y_{n+1}|)
    componentwise. ``atol`` defaults to ``tol * max|y0|``. With ``fixed_step``
    the step size is constant and no error control takes place.
    """
    y = np.array(y0, dtype=np.float64)
    stats = IntegrationStats() if stats is None else stats
    span = t_end - t0
    if span == 0:
        return y, stats
    direction = np.sign(span)
    if atol is None:
        atol = tol * max(float(np.max(np.abs(y))), 1e-300)
    k = f(t0, y)
    stats.evaluations += 1
    t = t0

    if fixed_step is not None:
        n = max(1, int(round(abs(span) / fixed_step)))
        h = span / n
        for _ in range(n):
            K = _stage(f, t, y, h, k)
            stats.evaluations += 6
            y = y + h * sum(b * K[j] for j, b in enumerate(_B5) if b != 0.0)
            k = K[6]
            t += h
            stats.accepted += 1
        return y, stats

    if h0 is None:
        d0 = np.max(np.abs(y)) / max(atol, 1e-300)
        d1 = np.max(np.abs(k)) / max(atol, 1e-300)
        h = 0.01 * d0 / d1 if d0 > 1e-5 and d1 > 1e-5 else 1e-6 * abs(span)
        h = min(abs(span), max(h, 1e-6 * abs(span)))
    else:
        h = min(abs(h0), abs(span))
    floor = min_step_ratio * abs(span)

    while direction * (t_end - t) > 0:
        if stats.accepted + stats.rejected > max_steps:
            raise StepUnderflow(f"{label}: step budget exhausted at t={t:.6g}")
        last = abs(t_end - t) <= h * (1 + 1e-12)
        hs = (t_end - t) if last else direction * h
        K = _stage(f, t, y, hs, k)
        stats.evaluations += 6
        y_new = y + hs * sum(b * K[j] for j, b in enumerate(_B5) if b != 0.0)
        err = hs * sum(e * K[j] for j, e in enumerate(_E) if e != 0.0)
        scale = atol + tol * np.maximum(np.abs(y), np.abs(y_new))
        en = float(np.max(np.abs(err) / scale)) if err.size else 0.0
        if en <= 1.0:
            t = t_end if last else t + hs
            y = y_new
            k = K[6]
            stats.accepted += 1
            stats.steps.append(abs(hs))
            fac = 5.0 if en == 0 else min(5.0, max(0.2, 0.9 * en ** -0.2))
            h = abs(hs) * fac
        else:
            stats.rejected += 1
            h = abs(hs) * max(0.2, 0.9 * en ** -0.2)
            if h < floor:
                raise StepUnderflow(f"{label}: step size {h:.3g} below floor {floor:.3g} at t={t:.6g}")
    return y, stats
