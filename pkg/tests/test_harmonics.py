import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import lpmv

from conftest import random_coeffs, random_vector
from spherebie.harmonics import (VectorCoeffs, alpha_beta, assoc_legendre, convert_vwx_ygx, degree_of,
                                 eval_vector_harmonic, get_grid, idx, legendre_tables, ncoeffs, nm_arrays,
                                 pack, resize, sht_eval, sht_forward, sht_inverse, unpack, vsh_eval,
                                 vsht_forward, vsht_inverse, vwx_to_ygx, ygx_to_vwx, ynm_eval)


def test_packing_layout():
    assert ncoeffs(3) == 16
    assert idx(2, -1) == 5
    assert degree_of(25) == 4
    with pytest.raises(ValueError):
        degree_of(7)
    c = np.arange(ncoeffs(4)) + 0j
    assert np.array_equal(pack(unpack(c)), c)
    assert np.array_equal(resize(resize(c, 6), 4), c)


def test_legendre_matches_scipy_with_condon_shortley():
    x = np.linspace(-0.99, 0.99, 9)
    for n, m in [(2, 1), (5, 3), (10, 0), (7, 7)]:
        assert np.allclose(assoc_legendre(n, m, x), lpmv(m, n, x), atol=1e-12 * 10**m)
    assert np.isclose(assoc_legendre(2, 1, 0.5), -3 * 0.5 * np.sqrt(0.75))


def test_legendre_derivatives_by_finite_differences():
    t = np.array([0.3, 1.2, 2.5])
    h = 1e-5
    L, Lp, Lm = (legendre_tables(12, t + s) for s in (0, h, -h))
    assert np.max(np.abs(L.dP - (Lp.P - Lm.P) / (2 * h))) < 1e-7


def test_alpha_beta_recurrence(rng):
    nmax = 10
    al, be = alpha_beta(nmax)
    n, m = nm_arrays(nmax)
    tt = rng.uniform(0.1, 3.0, 5)
    L = legendre_tables(nmax + 1, tt)
    for k in range(len(n)):
        a = abs(m[k])
        lhs = np.sin(tt) * L.dP[:, n[k], a]
        rhs = al[k] * L.P[:, n[k] + 1, a] - (be[k] * L.P[:, n[k] - 1, a] if a <= n[k] - 1 else 0)
        assert np.allclose(lhs, rhs, atol=1e-12)


def test_y21_unit_norm_by_quadrature():
    g = get_grid(8)
    th, ph = g.angles()
    assert abs(g.integrate(np.abs(ynm_eval(2, 1, th, ph)) ** 2) - 1) < 1e-13


def test_grid_weights_integrate_area():
    for p in (1, 4, 9):
        g = get_grid(p)
        assert np.isclose(g.integrate(np.ones(g.shape)), 4 * np.pi)
        assert np.all(np.diff(g.theta) > 0)


@settings(max_examples=25, deadline=None)
@given(p=st.integers(1, 20), seed=st.integers(0, 2**32 - 1))
def test_scalar_roundtrip_property(p, seed):
    rng = np.random.default_rng(seed)
    g = get_grid(p)
    c = random_coeffs(rng, p)
    assert np.max(np.abs(sht_forward(sht_inverse(c, g), g) - c)) < 1e-11 * max(1, p)


@settings(max_examples=15, deadline=None)
@given(p=st.integers(1, 16), seed=st.integers(0, 2**32 - 1))
def test_vector_roundtrip_property(p, seed):
    rng = np.random.default_rng(seed)
    g = get_grid(p)
    v = random_vector(rng, p)
    back = vsht_forward(vsht_inverse(v, g), g)
    assert np.max(np.abs((back - v).to_array())) < 1e-11 * max(1, p)


def test_batched_transforms_match_loop(rng):
    g = get_grid(6)
    c = random_coeffs(rng, 6, (2, 3))
    f = sht_inverse(c, g)
    assert f.shape == (2, 3) + g.shape
    assert np.allclose(f[1, 2], sht_inverse(c[1, 2], g))
    assert np.allclose(sht_forward(f, g), c)


def test_inverse_folds_orders_beyond_nyquist(rng):
    g = get_grid(4)
    c = random_coeffs(rng, 9)
    th, ph = g.angles()
    assert np.allclose(sht_inverse(c, g), sht_eval(c, th, ph), atol=1e-12)


def test_vector_eval_matches_grid(rng):
    g = get_grid(7)
    v = random_vector(rng, 7)
    th, ph = g.angles()
    assert np.allclose(vsh_eval(v, th, ph), vsht_inverse(v, g), atol=1e-11)


def test_ez_is_a_single_w_mode():
    g = get_grid(8)
    th, _ = g.angles()
    ez = np.stack([np.cos(th), -np.sin(th), 0 * th])
    c = vsht_forward(ez, g)
    assert np.isclose(c.w[idx(1, 0)], np.sqrt(4 * np.pi / 3))
    c.w[idx(1, 0)] = 0
    assert np.max(np.abs(c.to_array())) < 1e-13


def test_w1_closed_form():
    val = eval_vector_harmonic("W", 1, 0, 0.4, 0.2)
    assert np.allclose(val, np.sqrt(3 / (4 * np.pi)) * np.array([np.cos(0.4), -np.sin(0.4), 0]))


def test_basis_conversion_roundtrip(rng):
    v = random_vector(rng, 6)
    assert np.allclose(ygx_to_vwx(vwx_to_ygx(v)).to_array(), v.to_array())
    assert np.allclose(convert_vwx_ygx(convert_vwx_ygx(v)).to_array(), v.to_array())


def test_degree_zero_tangential_channels_vanish(rng):
    g = get_grid(4)
    c = vsht_forward(np.stack([np.ones(g.shape), np.zeros(g.shape), np.zeros(g.shape)]), g)
    assert c.w[0] == 0 and c.x[0] == 0
    assert abs(c.v[0] + np.sqrt(4 * np.pi)) < 1e-13


def test_shape_errors():
    g = get_grid(4)
    with pytest.raises(ValueError):
        sht_forward(np.zeros((3, 3)), g)
    with pytest.raises(ValueError):
        get_grid(0)
