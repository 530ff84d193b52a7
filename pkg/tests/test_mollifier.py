import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate

from hallmhd.mollifier import (DIRECT_SUM_LIMIT, InitialData, build_initial_state, build_mollifier,
                               bump, mollify, reference_normalizer)
from hallmhd.presets import two_level_density
from hallmhd.spectral_basis import GridField, TorusDomain, enumerate_modes


def test_reference_normalizer_matches_radial_integral():
    # C = 1 / int_{|x|<1} exp(1/(|x|^2-1)) dx, done as a radial integral
    val, _ = integrate.quad(lambda r: 4 * np.pi * r * r * np.exp(1.0 / (r * r - 1.0)), 0, 1)
    assert np.isclose(reference_normalizer(), 1.0 / val, rtol=1e-10)


def test_bump_support():
    assert bump(np.array([1.0, 1.5]))[0] == 0.0 and bump(np.array([1.5]))[0] == 0.0
    assert np.isclose(bump(np.array([0.0]))[0], np.exp(-1.0))


@pytest.mark.parametrize("eps", [0.2, 0.45])
def test_unit_mass_and_normalizer(eps):
    d = TorusDomain(1.0, 32)
    m = build_mollifier(eps, d)
    assert np.isclose(m.total_mass, 1.0, rtol=1e-14)
    assert np.all(m.weights >= 0)
    # the discrete normalizer approaches the continuous one as the grid resolves the kernel
    assert abs(m.normalizer / m.reference - 1) < 0.05 * (3.0 / m.support_cells) ** 2 + 1e-3


@pytest.mark.parametrize("eps,M", [(0.05, 32), (1.0, 32), (0.0, 32), (0.6, 64)])
def test_rejects_bad_widths(eps, M):
    with pytest.raises(ValueError):
        build_mollifier(eps, TorusDomain(1.0, M))


def test_constant_is_fixed(rng):
    d = TorusDomain(1.0, 16)
    m = build_mollifier(0.25, d)
    f = GridField(d, np.full((16,) * 3, 3.7))
    assert np.allclose(mollify(f, m).samples, 3.7, rtol=1e-15)


def test_direct_and_fft_paths_agree(rng):
    d = TorusDomain(1.0, 32)
    small, big = build_mollifier(0.12, d), build_mollifier(0.3, d)
    assert len(small.weights) <= DIRECT_SUM_LIMIT < len(big.weights)
    f = rng.standard_normal((32,) * 3)
    # brute force periodic convolution for the big kernel on a handful of points
    out = mollify(GridField(d, f), big).samples
    for p in [(0, 0, 0), (5, 17, 31), (30, 2, 9)]:
        ref = sum(w * f[tuple((np.array(p) - o) % 32)] for o, w in zip(big.offsets, big.weights))
        assert np.isclose(out[p], np.clip(ref, f.min(), f.max()), atol=1e-12)


@given(st.integers(0, 2 ** 31 - 1), st.floats(0.19, 0.45))
def test_bounds_preserved(seed, eps):
    d = TorusDomain(1.0, 16)
    rng = np.random.default_rng(seed)
    f = rng.uniform(0.3, 4.0, (16,) * 3)
    out = mollify(GridField(d, f), build_mollifier(eps, d)).samples
    assert out.min() >= f.min() and out.max() <= f.max()


def test_l2_error_decreases_as_eps_halves():
    d = TorusDomain(1.0, 64)
    rho = GridField(d, two_level_density(d, 1.0, 3.0))
    errs = []
    for eps in (0.4, 0.2, 0.1, 0.05):
        r = mollify(rho, build_mollifier(eps, d))
        errs.append(np.sqrt(np.sum((r.samples - rho.samples) ** 2) * d.cell_volume))
        assert r.min() >= 1.0 and r.max() <= 3.0
    assert all(b < a for a, b in zip(errs, errs[1:]))


def test_vector_fields_mollified_componentwise(rng):
    d = TorusDomain(1.0, 16)
    m = build_mollifier(0.25, d)
    v = rng.standard_normal((3, 16, 16, 16))
    out = mollify(GridField(d, v), m).samples
    for c in range(3):
        assert np.allclose(out[c], mollify(GridField(d, v[c]), m).samples)


def test_initial_data_validation(dom16):
    z = GridField(dom16, np.zeros((3,) + (16,) * 3))
    with pytest.raises(ValueError):
        InitialData(GridField(dom16, np.full((16,) * 3, 0.5)), z, z, 1.0, 2.0)
    with pytest.raises(ValueError):
        InitialData(GridField(dom16, np.ones((16,) * 3)), z, z, 0.0, 2.0)


def test_build_initial_state_projects():
    d = TorusDomain(1.0, 16)
    b = enumerate_modes(d, 1)
    z = GridField(d, np.zeros((3,) + (16,) * 3))
    raw = InitialData(GridField(d, two_level_density(d, 1.0, 2.0)), z, z, 1.0, 2.0)
    s = build_initial_state(raw, 0.25, b)
    assert s.t == 0.0 and not np.any(s.alpha) and not np.any(s.beta)
    assert s.rho.min() >= 1.0 and s.rho.max() <= 2.0
    assert build_initial_state(raw, 0, b).rho is raw.rho0
