"""Density-dependent viscosity and conductivity laws with certified bounds.

A law is a polynomial of degree at most two in the density, certified
positive on the admissible density range [rho_lower, rho_upper]. The bounds
are exact extrema of the polynomial on that interval.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spectral_basis import GridField

_N_COEFFS = {"constant": 1, "affine": 2, "quadratic": 3}


def _poly_extrema(coeffs, lo, hi):
    cand = [lo, hi]
    if len(coeffs) == 3 and coeffs[2] != 0.0:
        v = -coeffs[1] / (2.0 * coeffs[2])
        if lo < v < hi:
            cand.append(v)
    vals = [sum(c * x ** p for p, c in enumerate(coeffs)) for x in cand]
    return min(vals), max(vals)


@dataclass(frozen=True)
class MaterialLaw:
    """Polynomial law ``sum_p coeffs[p] * xi**p``, frozen above ``clamp_at``."""

    kind: str
    family: str
    coeffs: tuple
    rho_lower: float
    rho_upper: float
    clamp_at: float | None = None

    def __post_init__(self):
        if self.family not in _N_COEFFS:
            raise ValueError(f"unknown law family {self.family!r}")
        if len(self.coeffs) != _N_COEFFS[self.family]:
            raise ValueError(f"{self.family} law takes {_N_COEFFS[self.family]} parameter(s)")
        if not 0 < self.rho_lower <= self.rho_upper:
            raise ValueError("need 0 < rho_lower <= rho_upper")
        lo, _ = _poly_extrema(self.coeffs, self.rho_lower, self._top)
        if not lo > 0:
            raise ValueError(f"{self.kind} law {self.spec} is not positive on "
                             f"[{self.rho_lower}, {self.rho_upper}]")

    @property
    def _top(self):
        return self.rho_upper if self.clamp_at is None else min(self.rho_upper, self.clamp_at)

    @property
    def spec(self) -> str:
        return f"{self.family}:" + ",".join(repr(float(c)) for c in self.coeffs)

    @property
    def lower_bound(self) -> float:
        return _poly_extrema(self.coeffs, self.rho_lower, self._top)[0]

    @property
    def upper_bound(self) -> float:
        return _poly_extrema(self.coeffs, self.rho_lower, self._top)[1]

    @property
    def is_constant(self) -> bool:
        return all(c == 0.0 for c in self.coeffs[1:])

    def __call__(self, xi):
        xi = np.asarray(xi, dtype=np.float64)
        if self.clamp_at is not None:
            xi = np.minimum(xi, self.clamp_at)
        out = np.zeros_like(xi)
        for c in reversed(self.coeffs):
            out = out * xi + c
        return out


def make_law(spec: str, kind: str, rho_lower: float, rho_upper: float) -> MaterialLaw:
    """Parse ``"constant:a"``, ``"affine:a,b"`` or ``"quadratic:a,b,c"``."""
    family, _, params = spec.partition(":")
    family = family.strip()
    try:
        coeffs = tuple(float(p) for p in params.split(",")) if params.strip() else ()
    except ValueError as exc:
        raise ValueError(f"bad law parameters in {spec!r}") from exc
    return MaterialLaw(kind, family, coeffs, float(rho_lower), float(rho_upper))


def eval_law(law: MaterialLaw, rho: GridField) -> GridField:
    """Pointwise law applied to a density field inside the certified range."""
    lo, hi = rho.min(), rho.max()
    if lo < law.rho_lower or hi > law.rho_upper:
        raise ValueError(f"density range [{lo:.6g}, {hi:.6g}] leaves the certified "
                         f"range [{law.rho_lower:.6g}, {law.rho_upper:.6g}] of the {law.kind} law")
    return GridField(rho.domain, law(rho.samples), "scalar")


def regularize_law(law: MaterialLaw, eps: float) -> MaterialLaw:
    """Law frozen to a constant for densities above the certified ceiling.

    The threshold is the upper density bound itself, so on the admissible
    range the regularised law coincides with the original one.
    """
    if not 0 < eps < 1:
        raise ValueError(f"regularization parameter must lie in (0, 1), got {eps}")
    if law.is_constant:
        return law
    return MaterialLaw(law.kind, law.family, law.coeffs, law.rho_lower, law.rho_upper,
                       clamp_at=law.rho_upper)


def sup_deviation(a: MaterialLaw, b: MaterialLaw, n_samples: int = 10_000) -> float:
    """Sampled sup |a - b| on the common certified range."""
    xi = np.linspace(max(a.rho_lower, b.rho_lower), min(a.rho_upper, b.rho_upper), n_samples)
    return float(np.max(np.abs(a(xi) - b(xi))))
