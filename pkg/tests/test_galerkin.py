import numpy as np
import pytest
from hypothesis import given, strategies as st

from hallmhd.galerkin import (GalerkinState, LinearODE, Physics, assemble, energy_balance,
                              mass_matrix, pack, step_linear, unpack)
from hallmhd.material_laws import make_law
from hallmhd.ode import dopri45
from hallmhd.spectral_basis import (GridField, TorusDomain, curl, deformation_tensor,
                                    enumerate_modes, gradient, synthesize)


def _physics(lo=0.5, hi=2.0, h=0.7, mu="affine:0.3,0.2", sigma="quadratic:1,0.1,0.05"):
    return Physics(make_law(mu, "mu", lo, hi), make_law(sigma, "sigma", lo, hi), h, lo, hi)


def _random_inputs(d, basis, rng, lo=0.5, hi=2.0):
    x, y, z = (d.kappa * c for c in d.coords())
    rho = 0.5 * (lo + hi) + 0.5 * (hi - lo) * np.sin(x + rng.uniform(0, 6)) * np.cos(y - z)
    rho = GridField(d, np.clip(rho, lo, hi))
    v = synthesize(rng.standard_normal(basis.n), basis)
    H = synthesize(rng.standard_normal(basis.n), basis)
    return rho, v, H


def _oracle_blocks(rho, v, H, basis, physics):
    """Every block by explicit quadrature of products of basis fields."""
    d = basis.domain
    cv = d.cell_volume
    th = [el.evaluate(d).samples for el in basis]
    cth = [curl(el.evaluate(d)).samples for el in basis]
    gth = [gradient(el.evaluate(d)).samples for el in basis]
    dth = [deformation_tensor(el.evaluate(d)).samples for el in basis]
    r, vv, HH = rho.samples, v.samples, H.samples
    mu, sig = physics.mu(r), physics.sigma(r)
    n = basis.n
    out = {k: np.zeros((n, n)) for k in ("mass", "adv", "visc", "lorentz", "emf", "hall", "resist")}
    for i in range(n):
        vgrad = np.einsum("axyz,caxyz->cxyz", vv, gth[i])
        cxH = np.cross(cth[i], HH, axis=0)
        Hxt = np.cross(HH, th[i], axis=0)
        for j in range(n):
            out["mass"][i, j] = np.sum(r * np.sum(th[i] * th[j], 0)) * cv
            out["adv"][i, j] = np.sum(r * np.sum(vgrad * th[j], 0)) * cv
            out["visc"][i, j] = np.sum(2 * mu * np.sum(dth[i] * dth[j], (0, 1))) * cv
            out["lorentz"][i, j] = -np.sum(cxH * th[j]) * cv
            out["emf"][i, j] = np.sum(Hxt * cth[j]) * cv
            out["hall"][i, j] = physics.hall * np.sum(np.sum(cxH * cth[j], 0) / r) * cv
            out["resist"][i, j] = np.sum(np.sum(cth[i] * cth[j], 0) / sig) * cv
    return out


def test_blocks_match_quadrature_oracle(rng):
    d = TorusDomain(2 * np.pi, 8)
    basis = enumerate_modes(d, 1)
    phys = _physics()
    rho, v, H = _random_inputs(d, basis, rng)
    sys_ = assemble(rho, v, H, basis, phys)
    ref = _oracle_blocks(rho, v, H, basis, phys)
    for name, R in ref.items():
        A = getattr(sys_, name)
        assert np.allclose(A, R, atol=1e-11 * max(1.0, np.abs(R).max())), name


def test_mass_matrix_identity_for_unit_density(basis2, dom16):
    M = mass_matrix(GridField(dom16, np.ones((16,) * 3)), basis2)
    assert np.allclose(M, np.eye(basis2.n), atol=1e-13)


@given(st.integers(0, 2 ** 31 - 1))
def test_structure_on_random_assemblies(seed):
    rng = np.random.default_rng(seed)
    d = TorusDomain(2 * np.pi, 8)
    basis = enumerate_modes(d, 2)
    phys = _physics()
    rho, v, H = _random_inputs(d, basis, rng)
    s = assemble(rho, v, H, basis, phys)
    assert np.allclose(s.mass, s.mass.T, atol=0)
    assert np.linalg.eigvalsh(s.mass).min() >= phys.rho_lower - 1e-8
    assert np.abs(s.skew + s.skew.T).max() <= 1e-8
    assert np.abs(s.lorentz + s.emf.T).max() <= 1e-12 * max(1.0, np.abs(s.emf).max())
    assert np.abs(s.hall + s.hall.T).max() == 0.0
    assert np.linalg.eigvalsh(s.visc).min() >= -1e-10
    assert np.linalg.eigvalsh(s.resist).min() > 0


def test_raw_advection_antisymmetric_for_divergence_free_momentum(dom16, basis2):
    # rho depends on x2 only and v = (sin x2, 0, 0): div(rho v) = 0
    y = dom16.kappa * dom16.coords()[1]
    rho = GridField(dom16, 1.5 + 0.5 * np.cos(y))
    v = GridField(dom16, np.stack([np.sin(y), 0 * y, 0 * y]))
    H = GridField(dom16, np.zeros((3,) + (16,) * 3))
    s = assemble(rho, v, H, basis2, _physics())
    assert np.abs(s.adv + s.adv.T).max() <= 1e-12


def test_assemble_rejects_density_below_floor(dom16, basis1):
    phys = _physics()
    rho = GridField(dom16, np.full((16,) * 3, 0.25))
    z = GridField(dom16, np.zeros((3,) + (16,) * 3))
    with pytest.raises(ValueError):
        assemble(rho, z, z, basis1, phys)


def test_pack_unpack_roundtrip(dom16, rng):
    rho = GridField(dom16, np.ones((16,) * 3))
    s = GalerkinState(0.3, rng.standard_normal(5), rng.standard_normal(5), rho, 1.0, 2.0)
    t = unpack(pack(s), 0.3, rho)
    assert np.array_equal(t.alpha, s.alpha) and np.array_equal(t.beta, s.beta)
    assert (t.d_visc, t.d_resist) == (1.0, 2.0)


def test_energy_identity_frozen_step(dom16, basis1, rng):
    # frozen mass conserves energy exactly when div(rho v) = 0
    phys = _physics(h=1.0)
    _, _, H = _random_inputs(dom16, basis1, rng)
    y = dom16.kappa * dom16.coords()[1]
    rho = GridField(dom16, 1.25 + 0.5 * np.cos(y))
    v = GridField(dom16, np.stack([np.sin(y), 0 * y, 0 * y]))
    s0 = GalerkinState(0.0, rng.standard_normal(basis1.n), rng.standard_normal(basis1.n), rho)
    sys_ = assemble(rho, v, H, basis1, phys)
    s1 = step_linear(sys_, s0, 0.2, 1e-11)
    led = energy_balance([s0, s1], basis1)
    assert abs(led.residual[-1]) <= 1e-9 * led.total[0]
    assert led.d_visc[-1] > 0 and led.d_resist[-1] > 0


def test_time_dependent_mass_energy_identity(dom16, basis1, rng):
    """With M(t) quadratic the kinetic energy uses the instantaneous mass."""
    phys = _physics(h=0.5)
    d = dom16
    x = d.kappa * d.coords()[0]
    rhos = [GridField(d, 1.25 + 0.5 * np.sin(x + p)) for p in (0.0, 0.1, 0.2)]
    _, v, H = _random_inputs(d, basis1, rng)
    sys_ = assemble(rhos[1], v, H, basis1, phys)
    Ms = [mass_matrix(r, basis1) for r in rhos]
    f = LinearODE(sys_, Ms, (0.0, 0.5, 1.0))
    y0 = np.concatenate([rng.standard_normal(basis1.n), rng.standard_normal(basis1.n), [0, 0]])
    y1, _ = dopri45(f, 0.0, y0, 1.0, 1e-11)
    n = basis1.n
    E = lambda y, M: 0.5 * y[:n] @ M @ y[:n] + 0.5 * y[n:2 * n] @ y[n:2 * n]
    assert abs(E(y1, Ms[2]) + y1[-2] + y1[-1] - E(y0, Ms[0])) <= 1e-9 * E(y0, Ms[0])


def test_hall_zero_gives_zero_block(dom16, basis1, rng):
    phys = _physics(h=0.0)
    rho, v, H = _random_inputs(dom16, basis1, rng)
    assert not np.any(assemble(rho, v, H, basis1, phys).hall)


def test_physics_rejects_negative_hall():
    with pytest.raises(ValueError):
        _physics(h=-1.0)
