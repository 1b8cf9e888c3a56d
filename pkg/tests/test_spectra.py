from fractions import Fraction

import numpy as np
import pytest

from conftest import random_coeffs, random_vector
from spherebie.harmonics import VectorCoeffs
from spherebie.spectra import (ODE_SOLUTIONS, OperatorKind, apply_diagonal, apply_laplace_k_pv,
                               derive_layer_coefficients, eigenvalue, laplace_radial, ode_residual,
                               radial_from_weights, stokes_radial)

STOKES_PAIRS = [("StokesDplus", "StokesDminus", 1), ("StokesKplus", "StokesKminus", -1)]


@pytest.mark.parametrize("plus,minus,jump", STOKES_PAIRS)
def test_stokes_jumps(plus, minus, jump):
    for n in range(1, 65):
        for ch in "VWX":
            assert abs(eigenvalue(plus, n, ch) - eigenvalue(minus, n, ch) - jump) < 1e-14


def test_laplace_jumps_and_pv():
    for n in range(65):
        assert eigenvalue("LaplaceDplus", n, exact=True) - eigenvalue("LaplaceDminus", n, exact=True) == 1
        assert eigenvalue("LaplaceKplus", n, exact=True) - eigenvalue("LaplaceKminus", n, exact=True) == -1
        pv = (eigenvalue("LaplaceKplus", n) + eigenvalue("LaplaceKminus", n)) / 2
        assert np.isclose(apply_laplace_k_pv(np.ones(1))[0] if n == 0 else pv, -1 / (2 * (2 * n + 1)))


def test_exact_rationals():
    assert eigenvalue("StokesS", 2, "V", exact=True) == Fraction(2, 35)
    assert eigenvalue("StokesS", 1, "X", exact=True) == Fraction(1, 3)
    assert eigenvalue("LaplaceS", 5, exact=True) == Fraction(1, 11)


def test_single_layer_mode_one_is_one_third():
    # the classical single-layer eigenvalue for a rigid translation mode
    assert np.isclose(eigenvalue("StokesS", 1, "W"), 2 / 3)


@pytest.mark.parametrize("kind", ["StokesS", "StokesDplus", "StokesDminus", "StokesKplus", "StokesKminus"])
def test_radial_limits_match_surface_values(kind):
    k = OperatorKind.parse(kind)
    for n in (1, 2, 5, 10, 30):
        for side, r in (("exterior", 1 + 1e-12), ("interior", 1 - 1e-12)):
            if k.default_side and k.default_side != side:
                continue
            R = stokes_radial(kind, n, r, side)
            for ch, val in zip("VWX", (R.gV, R.gW, R.gX)):
                assert abs(val - eigenvalue(kind, n, ch)) < 1e-9


def test_laplace_radial_decays():
    assert np.isclose(laplace_radial("LaplaceS", 3, 2.0), 2.0**-4 / 7)
    assert np.isclose(laplace_radial("LaplaceS", 3, 0.5), 0.5**3 / 7)


def test_ode_solutions_satisfy_equations():
    for e in ODE_SOLUTIONS:
        r = np.linspace(1.1, 5, 20) if e.side == "exterior" else np.linspace(0.05, 0.95, 20)
        assert max(ode_residual(e, n, r) for n in range(1, 33)) < 1e-10


@pytest.mark.parametrize("pot,kind", [("S", "StokesS"), ("D", "StokesDplus")])
def test_derived_weights_reproduce_tables(pot, kind):
    for n in range(1, 33):
        w = derive_layer_coefficients(n, pot)
        r = 1.7
        R = stokes_radial(kind, n, r)
        fV, gV, _, _ = radial_from_weights(w, n, r, "V")
        fW, gW, _, PW = radial_from_weights(w, n, r, "W")
        _, _, hX, _ = radial_from_weights(w, n, r, "X")
        assert np.allclose([fV, gW, fW, hX, PW], [R.gV, R.gW, R.gCross, R.gX, R.q], rtol=1e-10, atol=1e-14)


def test_apply_diagonal_types(rng):
    v = random_vector(rng, 4)
    out = apply_diagonal("StokesS", v)
    assert np.allclose(out.x[1:4], v.x[1:4] / 3)
    with pytest.raises(TypeError):
        apply_diagonal("StokesS", random_coeffs(rng, 4))
    with pytest.raises(TypeError):
        apply_diagonal("LaplaceS", v)
    with pytest.raises(ValueError):
        eigenvalue("LaplaceS", 1, "V")
    with pytest.raises(ValueError):
        derive_layer_coefficients(0, "S")
