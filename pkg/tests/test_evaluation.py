import numpy as np
import pytest

from conftest import random_coeffs, random_vector, rel
from spherebie.evaluation import (ApplyStats, GeometryError, Sphere, Suspension, TargetBatch, auto_p_eval,
                                  composite_apply, cubic_lattice, evaluate, far_backend_direct,
                                  kernel_laplace_dn, kernel_stokeslet, kernel_stresslet, near_eval_direct,
                                  near_eval_fft, pole_aligned_normals, precompute_traction_coupling,
                                  self_eval, smooth_quadrature_eval, traction_coefficients, well_separated)
from spherebie.evaluation.near import pole_aligned_normals_printed
from spherebie.harmonics import VectorCoeffs, cartesian_to_spherical, get_grid
from spherebie.spectra import OperatorKind, apply_diagonal

KINDS = ["LaplaceS", "LaplaceDplus", "LaplaceKplus", "StokesS", "StokesDplus", "StokesKplus"]


def dens_for(kind, rng, p):
    return random_vector(rng, p) if OperatorKind.parse(kind).is_stokes else random_coeffs(rng, p)


def test_gauss_law_for_double_layer_kernel():
    s = Sphere((0.2, -0.1, 0.3), 1.3, 16)
    x = np.array([0.4, 0.1, 0.2])
    val = np.sum(s.weights() * kernel_laplace_dn(x, s.points(), s.normals()))
    assert abs(val + 1) < 1e-10


def test_kernel_symmetries(rng):
    x, y = rng.standard_normal((2, 3))
    G = kernel_stokeslet(x, y)
    assert np.allclose(G, G.T)
    T = kernel_stresslet(x, y)
    assert np.allclose(T, np.transpose(T, (1, 0, 2))) and np.allclose(T, np.transpose(T, (2, 1, 0)))


@pytest.mark.parametrize("kind", KINDS)
def test_quadrature_matches_formulas_far(kind, rng):
    sph = Sphere((0.3, -0.2, 0.5), 1.7, 24)
    dens = dens_for(kind, rng, 8)
    dens = dens.resize(24) if isinstance(dens, VectorCoeffs) else np.pad(dens, (0, 625 - dens.size))
    d = rng.standard_normal((12, 3))
    d /= np.linalg.norm(d, axis=1)[:, None]
    t = TargetBatch(sph.c + d * sph.radius * rng.uniform(2.0, 4.0, 12)[:, None], d)
    assert rel(near_eval_direct(kind, dens, sph, t), smooth_quadrature_eval(kind, sph, dens, t)) < 1e-10


def test_stokes_pressure_formulas(rng):
    sph = Sphere((0, 0, 0), 1.0, 24)
    dens = random_vector(rng, 6).resize(24)
    t = TargetBatch(rng.standard_normal((6, 3)) * 0.5 + [3.0, 0, 0])
    for kind in ("StokesS", "StokesDplus"):
        _, pa = near_eval_direct(kind, dens, sph, t, pressure=True)
        _, pb = smooth_quadrature_eval(kind, sph, dens, t, pressure=True)
        assert rel(pa, pb) < 1e-10


@pytest.mark.parametrize("kind", ["StokesS", "StokesDplus", "StokesKplus", "LaplaceS"])
def test_radius_scaling(kind, rng):
    sph = Sphere((0.1, 0, 0), 0.6, 24)
    dens = dens_for(kind, rng, 4)
    dens = dens.resize(24) if isinstance(dens, VectorCoeffs) else np.pad(dens, (0, 625 - dens.size))
    t = TargetBatch([[2.0, 0.5, 0.3], [0.0, -1.9, 1.0]], [[1.0, 0, 0], [0, 0.6, 0.8]])
    assert rel(near_eval_direct(kind, dens, sph, t), smooth_quadrature_eval(kind, sph, dens, t)) < 1e-10


def test_self_eval_is_the_spectrum(rng):
    s = Sphere((0, 0, 0), 1.0, 6)
    v = random_vector(rng, 6)
    assert np.allclose(self_eval("StokesDplus", v, s).to_array(), apply_diagonal("StokesDplus", v).to_array())


def test_pole_aligned_normals_unit_and_printed_form_differs():
    th = np.linspace(0.1, 3.0, 7)
    n = pole_aligned_normals(0.7, 2.5, th)
    assert np.allclose(np.linalg.norm(n, axis=-1), 1)
    assert not np.allclose(n, pole_aligned_normals_printed(0.7, 2.5, th))


def test_auto_p_eval_grows_as_spheres_approach():
    assert auto_p_eval(8, 1.0, 3.0) < auto_p_eval(8, 1.0, 2.1) <= 256
    assert auto_p_eval(8, 1.0, 3.0) >= 8


@pytest.mark.parametrize("kind", KINDS)
def test_fft_matches_direct(kind, rng):
    p = 8
    src = Sphere((0.1, 0.2, 0.3), 1.0, p, 0)
    d = rng.standard_normal(3)
    d /= np.linalg.norm(d)
    tgt = Sphere(src.c + d * (1.0 + 0.6 + 0.01), 0.6, p, 1)
    dens = dens_for(kind, rng, p)
    g = tgt.grid
    t = TargetBatch(tgt.points().reshape(-1, 3), tgt.normals().reshape(-1, 3))
    dv = near_eval_direct(kind, dens, src, t)
    if OperatorKind.parse(kind).is_stokes:
        th, ph = g.angles()
        dv = cartesian_to_spherical(dv.reshape((3,) + g.shape), th, ph)
    else:
        dv = dv.reshape(g.shape)
    fv = near_eval_fft(kind, dens, src, tgt, p_eval="auto", out="values")
    assert rel(fv, dv) < 1e-11


def test_traction_tables_banded_and_exact_on_surface(rng):
    T = precompute_traction_coupling(4)
    assert T.band_violation() < 1e-12
    d = random_vector(rng, 4)
    c = traction_coefficients(d, [1.0], [[1.0, 0.0, 0.0]], T)
    ref = apply_diagonal("StokesKplus", d).resize(5)
    assert np.max(np.abs(c.to_array()[0] - ref.to_array())) < 1e-12


def test_geometry_validation():
    with pytest.raises(GeometryError):
        Suspension([Sphere((0, 0, 0), 1.0, 4, 0), Sphere((1.5, 0, 0), 1.0, 4, 1)])
    with pytest.raises(GeometryError):
        Sphere((0, 0, 0), -1.0, 4)
    with pytest.raises(GeometryError):
        cubic_lattice(2, 4, 4, poly=True)
    a, b = Sphere((0, 0, 0), 1.0, 4), Sphere((4.5, 0, 0), 1.0, 4, 1)
    assert well_separated(a, b) and not well_separated(a, Sphere((3.5, 0, 0), 1.0, 4, 1))


def test_lattice_counts_and_gap():
    s = cubic_lattice(2, 1, 4)
    assert len(s) == 8 and np.isclose(s.min_gap(), 1.0)
    s = cubic_lattice(2, 1, 4, poly=True)
    assert len(s) == 8 + 1 + 6


def test_evaluate_rejects_points_inside():
    s = Suspension([Sphere((0, 0, 0), 1.0, 4)])
    with pytest.raises(GeometryError):
        evaluate("LaplaceS", s, [np.zeros(25)], [[0.1, 0, 0]])


def _reference(kind, susp, dens):
    """Self term exactly, every other sphere by exact formulas."""
    out = []
    for t, tg in enumerate(susp.spheres):
        v = self_eval(kind, dens[t], tg, out="values")
        tb = TargetBatch(tg.points().reshape(-1, 3), tg.normals().reshape(-1, 3))
        acc = sum(near_eval_direct(kind, dens[s], sc, tb) for s, sc in enumerate(susp.spheres) if s != t)
        th, ph = tg.grid.angles()
        if OperatorKind.parse(kind).is_stokes:
            v = v + cartesian_to_spherical(acc.reshape((3,) + tg.grid.shape), th, ph)
        else:
            v = v + acc.reshape(tg.grid.shape)
        out.append(v)
    return out


@pytest.mark.parametrize("kind", ["LaplaceKminus", "StokesS", "StokesDplus", "StokesKminus"])
def test_composite_apply_close_pair(kind, rng):
    p = 12
    s = Suspension([Sphere((0, 0, 0), 1.0, p, 0), Sphere((2.01, 0.005, 0.003), 0.8, p, 1),
                    Sphere((0, 0, 5), 0.7, p, 2)])
    n = np.floor(np.sqrt(np.arange((p + 1) ** 2)))
    dens = [dens_for(kind, rng, p) * 1.0 for _ in s.spheres]
    dens = [d * (1 + n) ** -3.0 if not isinstance(d, VectorCoeffs) else
            VectorCoeffs(d.v * (1 + n) ** -3.0, d.w * (1 + n) ** -3.0, d.x * (1 + n) ** -3.0) for d in dens]
    ref = _reference(kind, s, dens)
    for near in ("fft", "direct"):
        got = composite_apply(kind, s, dens, near=near)
        err = max(np.max(np.abs(a - b)) for a, b in zip(got, ref)) / max(np.max(np.abs(b)) for b in ref)
        assert err < 1e-6


def test_composite_is_deterministic_and_reports_stats(rng):
    s = cubic_lattice(2, 4, 4)
    dens = [random_vector(rng, 4) for _ in s.spheres]
    st = ApplyStats()
    a = composite_apply("StokesS", s, dens, stats=st)
    b = composite_apply("StokesS", s, dens)
    assert all(np.array_equal(x, y) for x, y in zip(a, b))
    assert st["near_pairs"] == 56 and st["near"] > 0


def test_composite_single_sphere_is_self(rng):
    s = Suspension([Sphere((1, 2, 3), 0.7, 6)])
    d = random_vector(rng, 6)
    out = composite_apply("StokesKminus", s, [d], out="coeffs")[0]
    assert np.allclose(out.to_array(), apply_diagonal("StokesKminus", d).to_array(), atol=1e-12)


def test_far_backend_chunking_is_transparent(rng):
    pts = rng.standard_normal((40, 3))
    w = rng.uniform(0.1, 1, 40)
    vals = rng.standard_normal((40, 3))
    tg = rng.standard_normal((30, 3)) + 10
    a = far_backend_direct("StokesS", pts, w, vals, None, tg)
    b = far_backend_direct("StokesS", pts, w, vals, None, tg, block=50)
    assert np.allclose(a, b)
