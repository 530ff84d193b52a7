"""Semi-Lagrangian density transport along characteristics of a Galerkin velocity.

The density at (t, x) is the initial density at the foot X(t0; x, t) of the
characteristic through x. The velocity is evaluated exactly by summing its
modes at off-grid points; the initial density is sampled there by tricubic
interpolation clipped to the enclosing cell, so no new extrema can appear.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .spectral_basis import Basis, GridField

DEFAULT_BINS = 32


class VelocityTrajectory:
    """Velocity coefficients at time knots, interpolated in time.

    Up to three knots use a single Lagrange polynomial; longer sequences use
    the quadratic through the three knots nearest to t. ``mean_flow`` adds a
    constant velocity, which the mean-free basis cannot represent.
    """

    def __init__(self, time_knots, coefficient_snapshots, basis: Basis, mean_flow=None):
        t = np.asarray(time_knots, dtype=np.float64).ravel()
        a = np.asarray(coefficient_snapshots, dtype=np.float64).reshape(len(t), -1)
        if len(t) == 0 or np.any(np.diff(t) <= 0):
            raise ValueError("time knots must be nonempty and strictly increasing")
        if a.shape[1] != basis.n:
            raise ValueError("snapshot length does not match the basis")
        self.times = t
        self.basis = basis
        self.amps = np.stack([basis.amplitudes(x) for x in a])
        self.mean_flow = np.zeros(3) if mean_flow is None else np.asarray(mean_flow, float)

    @classmethod
    def steady(cls, coeffs, basis, mean_flow=None, t0=0.0, t1=1.0):
        return cls([t0, t1], [coeffs, coeffs], basis, mean_flow)

    @property
    def t_start(self) -> float:
        return float(self.times[0])

    @property
    def t_end(self) -> float:
        return float(self.times[-1])

    def _weights(self, t):
        T = self.times
        if len(T) == 1:
            return np.array([0]), np.array([1.0])
        if len(T) <= 3:
            idx = np.arange(len(T))
        else:
            c = int(np.clip(np.searchsorted(T, t), 1, len(T) - 2))
            idx = np.array([c - 1, c, c + 1])
        tk = T[idx]
        w = np.ones(len(idx))
        for a in range(len(idx)):
            for b in range(len(idx)):
                if a != b:
                    w[a] *= (t - tk[b]) / (tk[a] - tk[b])
        return idx, w

    def amplitudes_at(self, t) -> np.ndarray:
        idx, w = self._weights(t)
        return np.tensordot(w, self.amps[idx], axes=1)

    def velocity(self, t, points, backend=None) -> np.ndarray:
        """(P, 3) velocity at physical points."""
        A = self.amplitudes_at(t)
        v = kernels.eval_modes(A, self.basis.kvecs, self.basis.domain.kappa, points, backend)
        return v + self.mean_flow

    def speed_bound(self) -> float:
        """Upper bound on |u| over the knots (triangle inequality on modes)."""
        per_knot = np.sum(np.linalg.norm(self.amps, axis=2), axis=1)
        # quadratic interpolation can overshoot the knot values by a bounded factor
        factor = 1.25 if len(self.times) >= 3 else 1.0
        return float(factor * per_knot.max() + np.linalg.norm(self.mean_flow))


def _substep_count(traj: VelocityTrajectory, span: float, substep: float | None) -> int:
    if span == 0:
        return 0
    if substep is None:
        h = traj.t_end - traj.t_start if traj.t_end > traj.t_start else abs(span)
        umax = traj.speed_bound()
        if umax > 0:
            h = min(h, 0.25 * traj.basis.domain.dx / umax)
    else:
        h = substep
    return max(1, int(np.ceil(abs(span) / h - 1e-12)))


def trace_characteristic(traj: VelocityTrajectory, t_end: float, x, t_start: float,
                         substep: float | None = None, backend=None) -> np.ndarray:
    """X(t_end; x, t_start): classical RK4 along dX/ds = u(s, X), X(t_start) = x.

    Positions are returned modulo the period. ``substep`` overrides the
    default step min(window length, dx / (4 max|u|)).
    """
    lo, hi = traj.t_start - 1e-12, traj.t_end + 1e-12
    for t in (t_start, t_end):
        if not lo <= t <= hi:
            raise ValueError(f"time {t} outside the trajectory range [{traj.t_start}, {traj.t_end}]")
    X = np.array(np.atleast_2d(x), dtype=np.float64)
    n = _substep_count(traj, t_end - t_start, substep)
    if n:
        h = (t_end - t_start) / n
        s = t_start
        for _ in range(n):
            k1 = traj.velocity(s, X, backend)
            k2 = traj.velocity(s + 0.5 * h, X + 0.5 * h * k1, backend)
            k3 = traj.velocity(s + 0.5 * h, X + 0.5 * h * k2, backend)
            k4 = traj.velocity(s + h, X + h * k3, backend)
            X += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            s += h
    return np.mod(X, traj.basis.domain.L)


@dataclass(frozen=True)
class DensitySnapshot:
    time: float
    field: GridField


def sample_density(rho: GridField, points, backend=None) -> np.ndarray:
    """Bound-preserving tricubic samples of ``rho`` at physical points."""
    d = rho.domain
    idx = np.mod(np.asarray(points, dtype=np.float64) / d.dx, d.M)
    # a foot that lands a roundoff below the period would otherwise index M
    idx[idx >= d.M] = 0.0
    return kernels.tricubic_clipped(rho.samples, idx, backend)


def advect_density(rho0: GridField, traj: VelocityTrajectory, t: float, t0: float | None = None,
                   substep: float | None = None, backend=None) -> DensitySnapshot:
    """rho(t, x) = rho0(X(t0; x, t)) on the grid, with t0 the trajectory start."""
    t0 = traj.t_start if t0 is None else t0
    if t == t0:
        return DensitySnapshot(float(t), rho0)
    d = rho0.domain
    feet = trace_characteristic(traj, t0, d.points(), t, substep, backend)
    vals = sample_density(rho0, feet, backend).reshape(d.M, d.M, d.M)
    return DensitySnapshot(float(t), GridField(d, vals, "scalar"))


def level_set_measure(rho: GridField, alpha: float, beta: float) -> float:
    """Volume of {alpha <= rho <= beta} by cell counting."""
    if alpha > beta:
        raise ValueError(f"empty level band: alpha={alpha} > beta={beta}")
    s = rho.samples
    return float(np.count_nonzero((s >= alpha) & (s <= beta)) * rho.domain.cell_volume)


def level_set_histogram(rho: GridField, lo: float, hi: float, bins: int = DEFAULT_BINS):
    """Edges and per-bin volumes of ``rho`` over equal bins on [lo, hi]."""
    edges = np.linspace(lo, hi, bins + 1)
    counts, _ = np.histogram(rho.samples.ravel(), bins=edges)
    return edges, counts * rho.domain.cell_volume
