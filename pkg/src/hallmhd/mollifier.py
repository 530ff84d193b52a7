"""Standard mollifier, periodic mollification and approximate initial data."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate

from . import kernels
from .spectral_basis import Basis, GridField, TorusDomain, project_L2

# offsets above this count switch the convolution from direct sums to FFTs
DIRECT_SUM_LIMIT = 343


def bump(r2):
    """Unnormalised bump exp(1 / (|x|^2 - 1)) on |x| < 1, zero elsewhere."""
    r2 = np.asarray(r2, dtype=np.float64)
    out = np.zeros_like(r2)
    inside = r2 < 1.0
    out[inside] = np.exp(1.0 / (r2[inside] - 1.0))
    return out


@lru_cache(maxsize=None)
def reference_normalizer() -> float:
    """C with C * integral of exp(1/(|x|^2-1)) over the unit ball equal to 1."""
    val, _ = integrate.quad(lambda r: 4.0 * np.pi * r * r * np.exp(1.0 / (r * r - 1.0)),
                            0.0, 1.0, epsabs=1e-14, epsrel=1e-13, limit=200)
    return 1.0 / val


@dataclass(frozen=True, eq=False)
class Mollifier:
    """Scaled bump eta_eps(x) = normalizer * exp(1/(|x/eps|^2 - 1)) on the grid.

    ``normalizer`` is fixed so that the discrete integral over the grid is 1;
    ``reference`` is the continuous constant C / eps^3 for comparison.
    """

    eps: float
    domain: TorusDomain
    offsets: np.ndarray
    weights: np.ndarray
    normalizer: float
    reference: float

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        return self.normalizer * bump(np.sum(x * x, axis=-1) / self.eps ** 2)

    @property
    def center_value(self) -> float:
        return self.normalizer * np.exp(-1.0)

    @property
    def support_cells(self) -> float:
        return self.eps / self.domain.dx

    @property
    def total_mass(self) -> float:
        return float(np.sum(self.weights))


def build_mollifier(eps: float, domain: TorusDomain) -> Mollifier:
    if not 0 < eps < 1:
        raise ValueError(f"mollifier width must lie in (0, 1), got {eps}")
    cells = eps / domain.dx
    if cells < 3:
        raise ValueError(f"mollifier support of {cells:.3g} cells is narrower than 3 grid cells")
    if eps >= domain.L / 2:
        raise ValueError("mollifier support must be shorter than half the period")
    r = int(np.ceil(cells))
    o = np.arange(-r, r + 1)
    off = np.stack(np.meshgrid(o, o, o, indexing="ij"), axis=-1).reshape(-1, 3)
    r2 = np.sum((off * domain.dx) ** 2, axis=1) / eps ** 2
    keep = r2 < 1.0
    off, vals = off[keep], bump(r2[keep])
    cnorm = 1.0 / (np.sum(vals) * domain.cell_volume)
    weights = vals / np.sum(vals)
    return Mollifier(float(eps), domain, off.astype(np.int64), weights, float(cnorm),
                     reference_normalizer() / eps ** 3)


def _convolve(f: np.ndarray, m: Mollifier) -> np.ndarray:
    if len(m.weights) <= DIRECT_SUM_LIMIT:
        return kernels.convolve_direct(f, m.offsets, m.weights)
    M = m.domain.M
    ker = np.zeros((M, M, M))
    o = np.mod(m.offsets, M)
    np.add.at(ker, (o[:, 0], o[:, 1], o[:, 2]), m.weights)
    return np.fft.irfftn(np.fft.rfftn(f) * np.fft.rfftn(ker), s=f.shape, axes=(0, 1, 2))


def mollify(field: GridField, m: Mollifier) -> GridField:
    """Periodic convolution with the mollifier, componentwise for vectors.

    Each output sample is a convex combination of input samples; the result
    is clipped to the input range so roundoff cannot break that property.
    """
    if field.domain != m.domain:
        raise ValueError("field and mollifier live on different domains")
    s = field.samples
    comps = s[None] if field.rank == "scalar" else s.reshape(-1, *s.shape[-3:])
    out = []
    for c in comps:
        v = _convolve(np.ascontiguousarray(c), m)
        out.append(np.clip(v, c.min(), c.max()))
    out = np.stack(out).reshape(s.shape)
    return GridField(field.domain, out, field.rank)


@dataclass(frozen=True, eq=False)
class InitialData:
    """Raw initial triple before mollification and projection."""

    rho0: GridField
    u0: GridField
    B0: GridField
    rho_lower: float
    rho_upper: float

    def __post_init__(self):
        if not 0 < self.rho_lower <= self.rho_upper:
            raise ValueError("need 0 < rho_lower <= rho_upper")
        if self.rho0.min() < self.rho_lower or self.rho0.max() > self.rho_upper:
            raise ValueError(f"initial density [{self.rho0.min():.6g}, {self.rho0.max():.6g}] "
                             f"outside [{self.rho_lower}, {self.rho_upper}]")
        if not (self.u0.is_vector and self.B0.is_vector):
            raise ValueError("initial velocity and magnetic field must be vector fields")


def build_initial_state(raw: InitialData, eps: float, basis: Basis):
    """Mollified density and projected mollified fields at t = 0.

    ``eps = 0`` skips mollification (the data is used as sampled).
    """
    from .galerkin import GalerkinState

    if eps == 0:
        rho, u, B = raw.rho0, raw.u0, raw.B0
    else:
        m = build_mollifier(eps, basis.domain)
        rho, u, B = mollify(raw.rho0, m), mollify(raw.u0, m), mollify(raw.B0, m)
    return GalerkinState(0.0, project_L2(u, basis), project_L2(B, basis), rho)
