import numpy as np
import pytest
from hypothesis import given, strategies as st

from hallmhd.config import SimConfig
from hallmhd.diagnostics import (SpaceTimeMode, check_cancellations, default_test_bank,
                                 divergence_residual, total_energy, weak_residuals)
from hallmhd.galerkin import GalerkinState
from hallmhd.simulation import run_config
from hallmhd.spectral_basis import GridField, TorusDomain, enumerate_modes, project_L2, synthesize


def _shear_state(d, b, rho):
    y = d.kappa * d.coords()[1]
    u = GridField(d, np.stack([np.sin(y), 0 * y, 0 * y]))
    return GalerkinState(0.0, project_L2(u, b), np.zeros(b.n), GridField(d, rho))


def test_total_energy_of_zero_state(dom16, basis1):
    s = GalerkinState(0.0, np.zeros(basis1.n), np.zeros(basis1.n), GridField(dom16, np.ones((16,) * 3)))
    assert total_energy(s, basis1) == (0.0, 0.0)


def test_total_energy_shear_unit_density(dom16, basis1):
    ek, em = total_energy(_shear_state(dom16, basis1, np.ones((16,) * 3)), basis1)
    assert np.isclose(ek, 2 * np.pi ** 3, rtol=1e-13) and em == 0.0


def test_total_energy_variable_density_against_fine_grid():
    d = TorusDomain(2 * np.pi, 16)
    b = enumerate_modes(d, 1)
    x = d.coords()[0]
    ek, _ = total_energy(_shear_state(d, b, 2 + np.sin(x)), b)
    f = TorusDomain(2 * np.pi, 64)
    X, Y, _ = f.coords()
    ref = 0.5 * np.sum((2 + np.sin(X)) * np.sin(Y) ** 2) * f.cell_volume
    assert abs(ek - ref) <= 1e-9 * ref


@given(st.integers(0, 2 ** 31 - 1))
def test_cancellations_fuzz(seed):
    d = TorusDomain(2 * np.pi, 8)
    b = enumerate_modes(d, 2)
    rng = np.random.default_rng(seed)
    rep = check_cancellations(synthesize(rng.standard_normal(b.n), b), synthesize(rng.standard_normal(b.n), b))
    assert rep.pointwise <= 1e-14 and rep.cross <= 1e-12 and rep.ok()
    # each power is itself far from zero, so the net power really cancels
    assert abs(rep.lorentz_power) > 1e-6


def test_divergence_residual_examples(dom16, basis2, rng):
    assert divergence_residual(synthesize(rng.standard_normal(basis2.n), basis2)) <= 1e-10
    x = dom16.coords()[0]
    grad = GridField(dom16, np.stack([np.cos(x), 0 * x, 0 * x]))
    assert np.isclose(divergence_residual(grad), 1.0)
    assert divergence_residual(GridField(dom16, np.zeros((3,) + (16,) * 3))) == 0.0


def test_bank_layout():
    bank = default_test_bank()
    assert len(bank) == 12 and {tf.power for tf in bank} == {1, 2}
    tf = SpaceTimeMode(0, 2)
    assert tf.profile(1.0, 1.0) == 0.0 and np.isclose(tf.dprofile(0.0, 2.0), -1.0)


@pytest.fixture(scope="module")
def beltrami_run():
    cfg = SimConfig().with_values(**{"init.preset": "beltrami", "physics.h": 1.0, "time.T": 0.5,
                                     "time.dt_window": 0.05})
    return run_config(cfg)


def test_weak_residuals_zero_trajectory():
    traj, setup = run_config(SimConfig().with_values(**{"time.T": 0.2}))
    res = weak_residuals(traj.knots(), setup.basis, setup.physics)
    for rows in res.values():
        for _, r, _ in rows:
            assert abs(r) <= 1e-25


def test_weak_residuals_beltrami(beltrami_run):
    traj, setup = beltrami_run
    res = weak_residuals(traj.knots(), setup.basis, setup.physics)
    assert max(abs(r) / s for _, r, s in res["induction"]) <= 1e-5
    # no flow and a force-free field: the other two forms hold to roundoff
    for key in ("density", "momentum"):
        assert max(abs(r) for _, r, _ in res[key]) <= 1e-10


def test_weak_residuals_shrink_under_joint_refinement():
    base = SimConfig().with_values(**{"init.preset": "random_smooth", "modes.K": 1, "time.T": 0.4,
                                      "init.rho_max": 2.0, "physics.h": 0.5})
    worst = []
    for M, dt, tol in ((8, 0.2, 1e-8), (16, 0.1, 1e-9), (32, 0.05, 1e-10)):
        traj, setup = run_config(base.with_values(**{"domain.M": M, "time.dt_window": dt,
                                                      "solver.ode_tol": tol, "solver.picard_tol": tol}))
        res = weak_residuals(traj.knots(), setup.basis, setup.physics)
        worst.append([max(abs(r) / s for _, r, s in res[k]) for k in ("density", "momentum", "induction")])
    w = np.array(worst)
    assert np.all(np.log2(w[:-1] / w[1:]) >= 1.0)
