import numpy as np
import pytest
from hypothesis import given, strategies as st

from hallmhd.spectral_basis import (GridField, TorusDomain, curl, curl_coefficients, curl_of,
                                    deformation_tensor, divergence, enumerate_modes, gradient,
                                    inner_product, project_L2, synthesize)


def _half_space_count(K):
    r = range(-K, K + 1)
    n = sum(1 for a in r for b in r for c in r if 0 < a * a + b * b + c * c <= K * K)
    return n // 2


def test_domain_geometry():
    d = TorusDomain(2.0, 8)
    assert d.dx == 0.25 and d.volume == 8.0 and d.cell_volume == 0.25 ** 3
    assert np.isclose(d.kappa, np.pi)
    assert d.points().shape == (512, 3)


@pytest.mark.parametrize("L,M", [(0.0, 8), (-1.0, 8), (1.0, 0)])
def test_domain_rejects_bad_sizes(L, M):
    with pytest.raises(ValueError):
        TorusDomain(L, M)


@pytest.mark.parametrize("K", [1, 2, 3])
def test_mode_count(K):
    b = enumerate_modes(TorusDomain(2 * np.pi, 4 * K), K)
    assert b.n == 4 * _half_space_count(K)
    assert b.n == len(b)


def test_aliasing_and_cutoff_rules():
    with pytest.raises(ValueError):
        enumerate_modes(TorusDomain(1.0, 7), 2)
    with pytest.raises(ValueError):
        enumerate_modes(TorusDomain(1.0, 8), 0)


def test_coarse_basis_is_prefix(dom16):
    b1, b3 = enumerate_modes(dom16, 1), enumerate_modes(dom16, 3)
    for i in range(b1.n):
        assert b1[i] == b3[i]


def test_orthonormal(dom16, basis2):
    G = np.array([[inner_product(basis2[i].evaluate(dom16), basis2[j].evaluate(dom16))
                   for j in range(basis2.n)] for i in range(basis2.n)])
    assert np.allclose(G, np.eye(basis2.n), atol=1e-12)


def test_polarizations_are_transverse_unit(basis2):
    k = basis2.k.astype(float)
    assert np.allclose(np.sum(basis2.e * k, axis=1), 0, atol=1e-14)
    assert np.allclose(np.linalg.norm(basis2.e, axis=1), 1)


def test_basis_fields_divergence_free(dom16, basis2):
    for el in basis2:
        f = el.evaluate(dom16)
        assert divergence(f).norm() <= 1e-10 * f.norm()


def test_curl_matrix_matches_spectral_curl(dom16, basis2, rng):
    c = rng.standard_normal(basis2.n)
    direct = curl(synthesize(c, basis2)).samples
    via = synthesize(curl_coefficients(c, basis2), basis2).samples
    assert np.allclose(direct, via, atol=1e-12)


def test_curl_of_single_element(dom16, basis1):
    el = basis1[0]
    pieces = curl_of(el, basis1)
    total = sum(c * e.evaluate(dom16).samples for c, e in pieces)
    assert np.allclose(total, curl(el.evaluate(dom16)).samples, atol=1e-12)


@given(st.integers(0, 2 ** 31 - 1))
def test_projection_inverts_synthesis(seed):
    d = TorusDomain(2 * np.pi, 8)
    b = enumerate_modes(d, 2)
    c = np.random.default_rng(seed).standard_normal(b.n)
    assert np.allclose(project_L2(synthesize(c, b), b), c, atol=1e-12)


@given(st.integers(0, 2 ** 31 - 1))
def test_synthesis_is_isometry(seed):
    d = TorusDomain(3.0, 8)
    b = enumerate_modes(d, 2)
    c = np.random.default_rng(seed).standard_normal(b.n)
    f = synthesize(c, b)
    assert np.isclose(inner_product(f, f), c @ c, rtol=1e-12)


def test_synthesis_matches_element_sum(dom16, basis1, rng):
    c = rng.standard_normal(basis1.n)
    ref = sum(ci * el.evaluate(dom16).samples for ci, el in zip(c, basis1))
    assert np.allclose(synthesize(c, basis1).samples, ref, atol=1e-13)


def test_gradient_and_deformation_of_shear(dom16):
    x, y, _ = dom16.coords()
    u = np.stack([np.sin(y), np.zeros_like(y), np.zeros_like(y)])
    g = gradient(GridField(dom16, u)).samples.copy()
    assert np.allclose(g[0, 1], np.cos(y), atol=1e-12)
    g[0, 1] = 0
    assert np.allclose(g, 0, atol=1e-12)
    D = deformation_tensor(GridField(dom16, u)).samples
    assert np.allclose(D[0, 1], 0.5 * np.cos(y)) and np.allclose(D[1, 0], 0.5 * np.cos(y))


def test_weighted_inner_product(dom16):
    x = dom16.coords()[0]
    u = GridField(dom16, np.stack([np.sin(x), 0 * x, 0 * x]))
    w = GridField(dom16, 2 + np.cos(x))
    # int (2 + cos x) sin^2 x over the box = 2 pi * (2 pi)^2
    assert np.isclose(inner_product(u, u, w), 2 * np.pi * (2 * np.pi) ** 2, rtol=1e-12)


def test_gridfield_rejects_non_finite(dom16):
    s = np.zeros((16, 16, 16))
    s[0, 0, 0] = np.nan
    with pytest.raises(ValueError):
        GridField(dom16, s)
