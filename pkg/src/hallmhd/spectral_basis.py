"""Divergence-free trigonometric bases on the periodic box [0, L)^3.

Every mode is real: ``c * e * cos(kappa k.x)`` or ``c * e * sin(kappa k.x)``
with ``kappa = 2 pi / L``, ``e . k = 0`` and ``c = sqrt(2 / L^3)``. The same
ordered family serves velocity and magnetic fields.

Quadrature is the uniform trapezoidal rule. Sums over the grid are evaluated
with FFTs, which is the same rule reorganised, so synthesis, projection and the
Galerkin pair integrals are exact for band-limited integrands.
"""
from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass
from functools import cached_property

import numpy as np

COS, SIN = "cos", "sin"


@dataclass(frozen=True)
class TorusDomain:
    """Periodic box of side ``L`` sampled on an ``M^3`` uniform grid."""

    L: float
    M: int

    def __post_init__(self):
        if not (np.isfinite(self.L) and self.L > 0):
            raise ValueError(f"period length must be positive, got {self.L}")
        if int(self.M) != self.M or self.M < 4:
            raise ValueError(f"grid size must be an integer >= 4, got {self.M}")

    @property
    def kappa(self) -> float:
        return 2.0 * np.pi / self.L

    @property
    def dx(self) -> float:
        return self.L / self.M

    @property
    def volume(self) -> float:
        return self.L ** 3

    @property
    def cell_volume(self) -> float:
        return self.dx ** 3

    @property
    def n_points(self) -> int:
        return self.M ** 3

    def coords(self):
        """Tuple of three (M, M, M) coordinate arrays, ``indexing='ij'``."""
        x = np.arange(self.M) * self.dx
        return np.meshgrid(x, x, x, indexing="ij")

    def points(self) -> np.ndarray:
        """Grid points as an (M^3, 3) array in row-major order."""
        return np.stack([c.ravel() for c in self.coords()], axis=1)

    def wavenumbers(self) -> np.ndarray:
        """Integer FFT wavenumbers along one axis (Nyquist entry included)."""
        return np.fft.fftfreq(self.M, 1.0 / self.M)


class GridField:
    """Scalar, vector or 3x3 tensor samples on a :class:`TorusDomain`.

    Storage is component-first: scalars are (M, M, M), vectors (3, M, M, M),
    tensors (3, 3, M, M, M). Samples are copied and frozen on construction.
    """

    __slots__ = ("domain", "samples", "rank")

    def __init__(self, domain: TorusDomain, samples, rank: str | None = None):
        a = np.array(samples, dtype=np.float64)
        M = domain.M
        if rank is None:
            rank = {3: "scalar", 4: "vector3", 5: "tensor"}.get(a.ndim)
        shapes = {"scalar": (M, M, M), "vector3": (3, M, M, M), "tensor": (3, 3, M, M, M)}
        if rank not in shapes or a.shape != shapes[rank]:
            raise ValueError(f"samples of shape {a.shape} do not fit a {rank} field on M={M}")
        if not np.all(np.isfinite(a)):
            raise ValueError("field contains non-finite samples")
        a.flags.writeable = False
        self.domain = domain
        self.samples = a
        self.rank = rank

    @property
    def is_vector(self) -> bool:
        return self.rank == "vector3"

    def __repr__(self):
        return f"GridField({self.rank}, M={self.domain.M}, L={self.domain.L:g})"

    def min(self) -> float:
        return float(self.samples.min())

    def max(self) -> float:
        return float(self.samples.max())

    def norm(self) -> float:
        """L2 norm by trapezoidal quadrature."""
        return float(np.sqrt(np.sum(self.samples ** 2) * self.domain.cell_volume))


@dataclass(frozen=True)
class BasisElement:
    """One real divergence-free mode ``c * e * phase(kappa k.x)``."""

    wavevector: tuple
    polarization: tuple
    phase: str
    norm_factor: float
    pol_index: int = 0

    def evaluate(self, domain: TorusDomain) -> GridField:
        X = domain.coords()
        theta = domain.kappa * sum(k * x for k, x in zip(self.wavevector, X))
        f = np.cos(theta) if self.phase == COS else np.sin(theta)
        e = np.asarray(self.polarization)
        return GridField(domain, self.norm_factor * e[:, None, None, None] * f, "vector3")


def _polarizations(k):
    """Orthonormal pair (e1, e2) spanning the plane normal to integer ``k``.

    e1 is built from the unit axis along the smallest |k_m| (lowest index on
    ties) in integer arithmetic, then normalised; e2 = k x e1 / |k|.
    """
    k = np.asarray(k, dtype=np.int64)
    m = int(np.argmin(np.abs(k)))
    a = np.zeros(3, dtype=np.int64)
    a[m] = 1
    v1 = (k @ k) * a - (a @ k) * k
    v2 = np.cross(k, v1)
    return v1 / np.sqrt(float(v1 @ v1)), v2 / np.sqrt(float(v2 @ v2))


def _half_space_wavevectors(K: int) -> list:
    out = []
    r = range(-K, K + 1)
    for k in ((a, b, c) for a in r for b in r for c in r):
        n2 = k[0] ** 2 + k[1] ** 2 + k[2] ** 2
        if n2 == 0 or n2 > K * K:
            continue
        first = next(x for x in k if x != 0)
        if first > 0:
            out.append(k)
    out.sort(key=lambda k: (k[0] ** 2 + k[1] ** 2 + k[2] ** 2, k))
    return out


class Basis(Sequence):
    """Ordered family of :class:`BasisElement` with vectorised tables.

    Modes of one wavevector are contiguous: index ``4q + 2p + s`` for the q-th
    wavevector, polarization p and phase s (0 cos, 1 sin).
    """

    def __init__(self, domain: TorusDomain, K: int):
        self.domain = domain
        self.K = int(K)
        kq = _half_space_wavevectors(self.K)
        self.kvecs = np.array(kq, dtype=np.int64).reshape(-1, 3)
        c = np.sqrt(2.0 / domain.volume)
        self.norm_factor = c
        elems, pols = [], []
        for k in kq:
            e1, e2 = _polarizations(k)
            for p, e in enumerate((e1, e2)):
                for ph in (COS, SIN):
                    elems.append(BasisElement(tuple(int(x) for x in k), tuple(e), ph, c, p))
                    pols.append(e)
        self._elems = tuple(elems)
        n = len(elems)
        self.kidx = np.repeat(np.arange(len(kq)), 4)
        self.k = self.kvecs[self.kidx]
        self.e = np.array(pols).reshape(n, 3)
        self.is_sin = np.tile([False, True], 2 * len(kq))
        # d/dtheta of the phase: cos -> -sin, sin -> +cos
        self.dsign = np.where(self.is_sin, 1.0, -1.0)
        self.w = np.cross(self.k.astype(np.float64), self.e)
        self.kmag = np.sqrt(np.sum(self.k ** 2, axis=1).astype(np.float64))
        self.z = np.where(self.is_sin, -1j * c, c + 0j)

    def __len__(self):
        return len(self._elems)

    def __getitem__(self, i):
        return self._elems[i]

    def __repr__(self):
        return f"Basis(K={self.K}, n={len(self)}, M={self.domain.M})"

    @property
    def n(self) -> int:
        return len(self._elems)

    @property
    def nk(self) -> int:
        return len(self.kvecs)

    @cached_property
    def swap(self) -> np.ndarray:
        """Index of the same-wavevector, same-polarization, opposite-phase mode."""
        return np.arange(self.n) ^ 1

    @cached_property
    def curl_matrix(self) -> np.ndarray:
        """R with curl(sum_i a_i mode_i) = sum_j (R a)_j mode_j, exact.

        curl(c e phi) = c kappa s (k x e) phi_swapped with s = -1 for cos and
        +1 for sin, and k x e lies in the polarization plane of k.
        """
        kappa = self.domain.kappa
        R = np.zeros((self.n, self.n))
        for q in range(self.nk):
            idx = np.arange(4 * q, 4 * q + 4)
            for i in idx:
                for j in idx:
                    if self.is_sin[j] != self.is_sin[i]:
                        R[j, i] = kappa * self.dsign[i] * (self.w[i] @ self.e[j])
        R[np.abs(R) < 1e-15 * kappa * max(self.K, 1)] = 0.0
        return R

    @cached_property
    def _flat_index(self):
        M = self.domain.M
        kq = self.kvecs

        def flat(v):
            v = np.mod(v, M)
            return (v[..., 0] * M + v[..., 1]) * M + v[..., 2]

        return flat(kq), flat(kq[:, None, :] - kq[None, :, :]), flat(kq[:, None, :] + kq[None, :, :])

    def amplitudes(self, coeffs) -> np.ndarray:
        """Complex amplitudes A_q with field = sum_q Re(A_q exp(i kappa k_q.x))."""
        a = np.asarray(coeffs, dtype=np.float64)
        if a.shape != (self.n,):
            raise ValueError(f"expected {self.n} coefficients, got shape {a.shape}")
        terms = (a * self.z)[:, None] * self.e
        return terms.reshape(self.nk, 4, 3).sum(axis=1)

    def pair_table(self, g: np.ndarray, swap_i=False, swap_j=False) -> np.ndarray:
        """P_ij = c^2 * integral of g * phi_i * phi_j for scalar samples ``g``.

        ``swap_i``/``swap_j`` replace the phase of mode i/j by the opposite one
        (cos <-> sin), which is what derivatives and curls produce.
        """
        M = self.domain.M
        F = np.fft.fftn(g).ravel() / M ** 3
        _, d, s = self._flat_index
        Fd, Fs = F[d], F[s]
        Cm, Sm, Cp, Sp = Fd.real, -Fd.imag, Fs.real, -Fs.imag
        ki = self.kidx
        si = self.is_sin ^ bool(swap_i)
        sj = self.is_sin ^ bool(swap_j)
        ix = np.ix_(ki, ki)
        Cm, Sm, Cp, Sp = Cm[ix], Sm[ix], Cp[ix], Sp[ix]
        SI, SJ = si[:, None], sj[None, :]
        out = np.where(SI == SJ, Cm + np.where(SI, -Cp, Cp), Sp + np.where(SI, Sm, -Sm))
        return out


def enumerate_modes(domain: TorusDomain, K: int) -> Basis:
    """All real divergence-free modes with 0 < |k|^2 <= K^2, deterministic order."""
    if int(K) != K or K < 1:
        raise ValueError(f"mode cutoff must be an integer >= 1, got {K}")
    if 4 * K > domain.M:
        raise ValueError(f"aliasing margin violated: need M >= 4K, got M={domain.M}, K={K}")
    return Basis(domain, int(K))


def _check_domain(field: GridField, basis: Basis):
    if field.domain != basis.domain:
        raise ValueError("field and basis live on different domains")


def synthesize(coeffs, basis: Basis, domain: TorusDomain | None = None) -> GridField:
    """Grid samples of sum_i coeffs_i * mode_i."""
    domain = basis.domain if domain is None else domain
    if domain != basis.domain:
        raise ValueError("basis was built for a different domain")
    A = basis.amplitudes(coeffs)
    return GridField(domain, synthesize_amplitudes(A, basis.kvecs, domain.M), "vector3")


def synthesize_amplitudes(A: np.ndarray, kvecs: np.ndarray, M: int) -> np.ndarray:
    """(3, M, M, M) samples of sum_q Re(A_q exp(2 pi i k_q.n / M))."""
    spec = np.zeros((A.shape[1] if A.ndim == 2 else 1, M, M, M), dtype=np.complex128)
    i, j, k = (np.mod(kvecs[:, a], M) for a in range(3))
    mi, mj, mk = (np.mod(-kvecs[:, a], M) for a in range(3))
    for c in range(spec.shape[0]):
        spec[c, i, j, k] += 0.5 * A[:, c]
        spec[c, mi, mj, mk] += 0.5 * np.conj(A[:, c])
    return np.fft.ifftn(spec, axes=(1, 2, 3)).real * M ** 3


def project_L2(field: GridField, basis: Basis) -> np.ndarray:
    """Coefficients <field, mode_i> by trapezoidal quadrature."""
    _check_domain(field, basis)
    if not field.is_vector:
        raise ValueError("projection needs a vector field")
    M = basis.domain.M
    F = np.fft.fftn(field.samples, axes=(1, 2, 3)).reshape(3, -1) / M ** 3
    fq, _, _ = basis._flat_index
    uk = F[:, fq].T[basis.kidx]
    return basis.domain.volume * np.real(np.conj(basis.z) * np.sum(basis.e * uk, axis=1))


def curl_of(elem: BasisElement, basis: Basis) -> list:
    """Exact curl of a mode as a list of (coefficient, BasisElement)."""
    i = basis._elems.index(elem)
    col = basis.curl_matrix[:, i]
    return [(float(col[j]), basis[j]) for j in np.flatnonzero(col)]


def curl_coefficients(coeffs, basis: Basis) -> np.ndarray:
    """Coefficients of curl(sum a_i mode_i) in the same basis."""
    return basis.curl_matrix @ np.asarray(coeffs, dtype=np.float64)


def _spectral_derivatives(samples: np.ndarray, domain: TorusDomain) -> np.ndarray:
    """Gradient of each component: out[..., a, :, :, :] = d/dx_a samples."""
    M = domain.M
    kk = domain.wavenumbers() * domain.kappa
    kk[M // 2] = 0.0 if M % 2 == 0 else kk[M // 2]
    F = np.fft.fftn(samples, axes=(-3, -2, -1))
    shape = [1] * (samples.ndim - 3)
    out = []
    for a in range(3):
        ks = [1, 1, 1]
        ks[a] = M
        ka = kk.reshape(shape + ks)
        out.append(np.fft.ifftn(1j * ka * F, axes=(-3, -2, -1)).real)
    return np.stack(out, axis=-4)


def gradient(field: GridField) -> GridField:
    """Spectral gradient; vector input gives grad[i, a] = d u_i / d x_a."""
    g = _spectral_derivatives(field.samples, field.domain)
    return GridField(field.domain, g, "vector3" if field.rank == "scalar" else "tensor")


def divergence(field: GridField) -> GridField:
    g = _spectral_derivatives(field.samples, field.domain)
    return GridField(field.domain, g[0, 0] + g[1, 1] + g[2, 2], "scalar")


def curl(field: GridField) -> GridField:
    g = _spectral_derivatives(field.samples, field.domain)
    c = np.stack([g[2, 1] - g[1, 2], g[0, 2] - g[2, 0], g[1, 0] - g[0, 1]])
    return GridField(field.domain, c, "vector3")


def deformation_tensor(field: GridField) -> GridField:
    """d(u) = (grad u + grad u^T) / 2 as a tensor field."""
    if not field.is_vector:
        raise ValueError("deformation tensor needs a vector field")
    g = _spectral_derivatives(field.samples, field.domain)
    return GridField(field.domain, 0.5 * (g + g.transpose(1, 0, 2, 3, 4)), "tensor")


def inner_product(a: GridField, b: GridField, weight: GridField | None = None) -> float:
    """Trapezoidal value of the integral of weight * (a . b)."""
    if a.domain != b.domain or a.rank != b.rank:
        raise ValueError("inner product needs fields of the same rank on the same domain")
    prod = a.samples * b.samples
    if a.rank != "scalar":
        prod = prod.reshape(-1, *prod.shape[-3:]).sum(axis=0)
    if weight is not None:
        if weight.domain != a.domain or weight.rank != "scalar":
            raise ValueError("weight must be a scalar field on the same domain")
        if weight.min() <= 0:
            raise ValueError("weight must be strictly positive")
        prod = prod * weight.samples
    return float(np.sum(prod) * a.domain.cell_volume)
