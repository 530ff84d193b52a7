"""Named analytic initial data on the periodic box."""
from __future__ import annotations

import numpy as np

from .mollifier import InitialData
from .spectral_basis import GridField, TorusDomain, enumerate_modes, synthesize

PRESETS = ("zero", "beltrami", "random_smooth", "two_level", "shear", "file")


def abc_field(domain: TorusDomain, amplitude: float = 1.0) -> np.ndarray:
    """ABC field with A = B = C = amplitude on the lowest shell; curl = kappa * field."""
    x, y, z = (domain.kappa * c for c in domain.coords())
    return amplitude * np.stack([np.sin(z) + np.cos(y), np.sin(x) + np.cos(z), np.sin(y) + np.cos(x)])


def random_coefficients(domain, K, rng, amplitude=1.0, decay=1.0):
    """Gaussian coefficients on the shell |k| <= K with exp(-decay |k|^2 / 2) damping."""
    b = enumerate_modes(domain, K)
    c = rng.standard_normal(b.n) * np.exp(-0.5 * decay * b.kmag ** 2)
    return b, amplitude * c / max(np.linalg.norm(c), 1e-300)


def smooth_density(domain, rng, lo, hi, K=2):
    """Random trigonometric scalar with |k| <= K, rescaled onto [lo, hi]."""
    X = domain.coords()
    f = np.zeros(X[0].shape)
    r = range(-K, K + 1)
    for k in ((a, b, c) for a in r for b in r for c in r):
        n2 = sum(v * v for v in k)
        if 0 < n2 <= K * K:
            th = domain.kappa * sum(kv * x for kv, x in zip(k, X))
            f += np.exp(-0.5 * n2) * (rng.standard_normal() * np.cos(th) + rng.standard_normal() * np.sin(th))
    if hi == lo or np.ptp(f) == 0:
        return np.full(f.shape, lo)
    g = (f - f.min()) / np.ptp(f)
    return np.clip(lo + (hi - lo) * g, lo, hi)


def two_level_density(domain, lo, hi):
    """hi inside a centred ball of radius L/4, lo outside."""
    X = domain.coords()
    r2 = sum((x - domain.L / 2) ** 2 for x in X)
    return np.where(r2 < (domain.L / 4) ** 2, hi, lo).astype(np.float64)


def make_initial_data(domain: TorusDomain, preset: str, *, amplitude=1.0, rho_min=1.0,
                      rho_max=1.0, K_data=1, seed=0, files=None) -> InitialData:
    rng = np.random.default_rng(seed)
    zero = np.zeros((3,) + (domain.M,) * 3)
    if preset == "zero":
        rho, u, B = np.full(zero.shape[1:], rho_min), zero, zero
    elif preset == "beltrami":
        rho, u, B = np.full(zero.shape[1:], rho_min), zero, abc_field(domain, amplitude)
    elif preset == "random_smooth":
        b, cu = random_coefficients(domain, K_data, rng, amplitude)
        _, cb = random_coefficients(domain, K_data, rng, amplitude)
        u, B = synthesize(cu, b).samples, synthesize(cb, b).samples
        rho = smooth_density(domain, rng, rho_min, rho_max)
    elif preset == "two_level":
        b, cu = random_coefficients(domain, K_data, rng, amplitude)
        _, cb = random_coefficients(domain, K_data, rng, amplitude)
        u, B = synthesize(cu, b).samples, synthesize(cb, b).samples
        rho = two_level_density(domain, rho_min, rho_max)
    elif preset == "shear":
        x2 = domain.kappa * domain.coords()[1]
        u = zero.copy()
        u[0] = amplitude * np.sin(x2)
        B = abc_field(domain, amplitude)
        rho = 0.5 * (rho_min + rho_max) + 0.5 * (rho_max - rho_min) * np.cos(x2)
    elif preset == "file":
        from .io import read_snapshot
        if not files:
            raise ValueError("file preset needs snapshot paths")
        rho, u, B = (read_snapshot(files[k], domain)[0] for k in ("rho", "u", "B"))
    else:
        raise ValueError(f"unknown preset {preset!r}; choose from {', '.join(PRESETS)}")
    return InitialData(GridField(domain, rho, "scalar"), GridField(domain, u, "vector3"),
                       GridField(domain, B, "vector3"), rho_min, rho_max)
