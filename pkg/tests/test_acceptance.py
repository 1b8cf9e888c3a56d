"""Acceptance criteria 1-10. Each test prints one PASS/FAIL line with its numbers."""
import time
from fractions import Fraction

import numpy as np
import pytest

from conftest import random_coeffs, random_vector
from spherebie import experiments as ex
from spherebie.applications import MagneticParams, magneto_solve, squirmer_slip
from spherebie.evaluation import (Sphere, Suspension, TargetBatch, composite_apply, cubic_lattice,
                                  near_eval_direct, near_eval_fft, self_eval, smooth_quadrature_eval)
from spherebie.harmonics import VectorCoeffs, cartesian_to_spherical
from spherebie.solver import (BodyForce, RigidMotion, grand_mobility, solve_mobility, solve_resistance,
                              solve_squirmer)
from spherebie.spectra import (ODE_SOLUTIONS, OperatorKind, derive_layer_coefficients, eigenvalue,
                               laplace_radial, ode_residual, radial_from_weights, stokes_radial)


@pytest.fixture
def report(capsys):
    def emit(n, ok, detail, seconds):
        with capsys.disabled():
            print(f"\n[criterion {n:2d}] {'PASS' if ok else 'FAIL'}  {detail}  ({seconds:.1f}s)")
        assert ok, detail
    return emit


def padded(d, p):
    if isinstance(d, VectorCoeffs):
        return d.resize(p)
    return np.pad(d, (0, (p + 1) ** 2 - d.size))


# closed forms on the unit sphere, written out independently of the package
LAPLACE = {"LaplaceS": lambda n: Fraction(1, 2 * n + 1), "LaplaceDplus": lambda n: Fraction(n, 2 * n + 1),
           "LaplaceDminus": lambda n: Fraction(-(n + 1), 2 * n + 1)}
STOKES = {
    ("StokesS", "V"): lambda n: Fraction(n, (2 * n + 1) * (2 * n + 3)),
    ("StokesS", "W"): lambda n: Fraction(n + 1, (2 * n + 1) * (2 * n - 1)),
    ("StokesS", "X"): lambda n: Fraction(1, 2 * n + 1),
    ("StokesDplus", "V"): lambda n: Fraction(2 * n * n + 4 * n + 3, (2 * n + 1) * (2 * n + 3)),
    ("StokesDplus", "W"): lambda n: Fraction(2 * (n + 1) * (n - 1), (2 * n + 1) * (2 * n - 1)),
    ("StokesDplus", "X"): lambda n: Fraction(n - 1, 2 * n + 1),
    ("StokesDminus", "V"): lambda n: Fraction(-2 * n * (n + 2), (2 * n + 1) * (2 * n + 3)),
    ("StokesDminus", "W"): lambda n: Fraction(-(2 * n * n + 1), (2 * n + 1) * (2 * n - 1)),
    ("StokesDminus", "X"): lambda n: Fraction(-(n + 2), 2 * n + 1),
}


def test_c1_spectra_tables(report):
    t0 = time.perf_counter()
    worst_exact = 0
    for n in (0, 1, 2, 5, 10):
        for k, f in LAPLACE.items():
            worst_exact += eigenvalue(k, n, exact=True) != f(n)
        for (k, ch), f in STOKES.items():
            if n == 0 and ch != "V":
                continue
            worst_exact += eigenvalue(k, n, ch, exact=True) != f(n)
            twin = {"StokesDminus": "StokesKplus", "StokesDplus": "StokesKminus"}.get(k)
            if twin:
                worst_exact += eigenvalue(twin, n, ch, exact=True) != f(n)
    lim = jump = 0.0
    for n in range(65):
        for k, side in (("LaplaceS", "exterior"), ("LaplaceDplus", "exterior"), ("LaplaceDminus", "interior")):
            lim = max(lim, abs(laplace_radial(k, n, 1.0, side) - eigenvalue(k, n)))
        jump = max(jump, abs(eigenvalue("LaplaceDplus", n) - eigenvalue("LaplaceDminus", n) - 1),
                   abs(eigenvalue("LaplaceKplus", n) - eigenvalue("LaplaceKminus", n) + 1))
        if n == 0:
            continue
        for k, side in (("StokesS", "exterior"), ("StokesS", "interior"), ("StokesDplus", "exterior"),
                        ("StokesDminus", "interior"), ("StokesKplus", "exterior"), ("StokesKminus", "interior")):
            R = stokes_radial(k, n, 1.0, side)
            for ch, v in zip("VWX", (R.gV, R.gW, R.gX)):
                lim = max(lim, abs(v - eigenvalue(k, n, ch)))
        for ch in "VWX":
            jump = max(jump, abs(eigenvalue("StokesDplus", n, ch) - eigenvalue("StokesDminus", n, ch) - 1),
                       abs(eigenvalue("StokesKplus", n, ch) - eigenvalue("StokesKminus", n, ch) + 1))
    dt = time.perf_counter() - t0
    ok = worst_exact == 0 and lim < 1e-14 and jump < 1e-14 and dt < 1
    report(1, ok, f"rational mismatches={worst_exact} max |limit-eig|={lim:.1e} max jump err={jump:.1e}", dt)


def test_c2_quadrature_vs_formulas(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(2)
    p = 24
    sph = Sphere((0.4, -0.3, 0.2), 1.0, p)
    worst = {}
    for kind in OperatorKind:
        if kind.default_side == "interior":
            continue
        dens = padded(random_vector(rng, 8) if kind.is_stokes else random_coeffs(rng, 8), p)
        d = rng.standard_normal((40, 3))
        d /= np.linalg.norm(d, axis=1)[:, None]
        nrm = rng.standard_normal((40, 3))
        nrm /= np.linalg.norm(nrm, axis=1)[:, None]
        t = TargetBatch(sph.c + d * (sph.radius + rng.uniform(1.0, 4.0, 40))[:, None], nrm)
        a = near_eval_direct(kind, dens, sph, t)
        b = smooth_quadrature_eval(kind, sph, dens, t)
        worst[kind.value] = float(np.max(np.abs(a - b)) / np.max(np.abs(a)))
    dt = time.perf_counter() - t0
    top = max(worst, key=worst.get)
    report(2, worst[top] <= 1e-10 and dt < 30, f"{len(worst)} kinds, worst {top} rel err {worst[top]:.1e}", dt)


def test_c3_layer_coefficient_closure(report):
    t0 = time.perf_counter()
    err = 0.0
    for pot, kind in (("S", "StokesS"), ("D", "StokesDplus")):
        for n in range(1, 33):
            w = derive_layer_coefficients(n, pot)
            for r, side in ((1.7, "exterior"), (0.6, "interior")):
                R = stokes_radial(kind if side == "exterior" or pot == "S" else "StokesDminus", n, r, side)
                fV, gV, _, _ = radial_from_weights(w, n, r, "V")
                fW, gW, _, _ = radial_from_weights(w, n, r, "W")
                _, _, hX, _ = radial_from_weights(w, n, r, "X")
                cross = gV if side == "interior" else fW
                got = np.array([fV, gW, hX, cross])
                want = np.array([R.gV, R.gW, R.gX, R.gCross])
                err = max(err, float(np.max(np.abs(got - want) / np.maximum(1, np.abs(want)))))
    res = 0.0
    for e in ODE_SOLUTIONS:
        r = np.linspace(1.05, 4, 30) if e.side == "exterior" else np.linspace(0.05, 0.95, 30)
        res = max(res, max(ode_residual(e, n, r) / max(1.0, np.max(r) ** (n + 2)) for n in range(1, 33)))
    dt = time.perf_counter() - t0
    report(3, err < 1e-10 and res < 1e-10 and dt < 5,
           f"derived vs tables {err:.1e}, worst ODE residual {res:.1e}", dt)


def test_c4_near_singular_robustness(report):
    t0 = time.perf_counter()
    p_values = (4, 8, 16)
    rows = ex.convergence_synthetic(["StokesS", "StokesDplus"], p_values, ex.LADDER, decay=2.0, pmax=16, targets=64)
    dt = time.perf_counter() - t0

    def series(kind, p, scheme, ref):
        sel = sorted((r for r in rows if (r["kind"], r["p"], r["scheme"], r["reference"]) == (kind, p, scheme, ref)),
                     key=lambda r: -r["distance"])
        return {r["distance"]: r["median_log10"] for r in sel}

    spread, gain = {}, {}
    for kind in ("StokesS", "StokesDplus"):
        for p in p_values:
            s = series(kind, p, "near", "full")
            spread[kind, p] = max(s.values()) - min(s.values())
            sm = series(kind, p, "smooth", "full")
            gain[kind, p] = sm[min(sm, key=lambda d: abs(d - 1e-3))] - sm[1.0]
    ok_near = all(v < 1 for v in spread.values())
    ok_smooth = all(gain[k, 16] >= 4 for k in ("StokesS", "StokesDplus"))
    detail = ("near spread (decades, full-density reference) "
              + " ".join(f"{k[6:]}/p{p}={v:.2f}" for (k, p), v in spread.items())
              + "; smooth 1e-3 vs 1 gain " + " ".join(f"{k[6:]}/p{p}={v:.1f}" for (k, p), v in gain.items()))
    report(4, ok_near and ok_smooth and dt < 120, detail, dt)


@pytest.mark.slow
def test_c5_three_sphere_bie(report):
    t0 = time.perf_counter()
    rows = ex.bie_three_spheres([24], ex.LADDER, targets=16, tol=1e-13)
    dt = time.perf_counter() - t0
    near = [r for r in rows if r["scheme"] == "near"]
    worst = {op: max(r["rel_error"] for r in near if r["operator"] == op) for op in "SKD"}
    smooth_close = max(r["rel_error"] for r in rows if r["scheme"] == "smooth" and r["distance"] < 1e-5)
    its = (rows[0]["gmres_mobility"], rows[0]["gmres_resistance"])
    detail = (f"p=24 worst near rel err S={worst['S']:.1e} K={worst['K']:.1e} D={worst['D']:.1e}; "
              f"smooth at 1e-6 {smooth_close:.1e}; GMRES its {its}")
    report(5, max(worst.values()) <= 1e-8 and dt < 600, detail, dt)


def test_c6_physics_oracles(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(6)
    a = 0.8
    susp = Suspension([Sphere((0.3, 0.1, -0.2), a, 8)])
    F, T = rng.standard_normal((2, 3))
    m = solve_mobility(susp, [BodyForce(F, T)], tol=1e-12).motions[0]
    e_mob = max(np.max(np.abs(m.v - F / (6 * np.pi * a))), np.max(np.abs(m.omega - T / (8 * np.pi * a**3))))
    v, w = rng.standard_normal((2, 3))
    f = solve_resistance(susp, [RigidMotion(v, w)], tol=1e-12).forces[0]
    e_res = max(abs(np.linalg.norm(f.F) - 6 * np.pi * a * np.linalg.norm(v)),
                abs(np.linalg.norm(f.T) - 8 * np.pi * a**3 * np.linalg.norm(w)))
    e = rng.standard_normal(3)
    e /= np.linalg.norm(e)
    sq = solve_squirmer(susp, [squirmer_slip(susp.spheres[0], e, 1.3, 0.4)], tol=1e-12).motions[0]
    e_sq = float(np.max(np.abs(sq.v - 2 * 1.3 / 3 * e)))
    prm = MagneticParams((0.2, -0.4, 1.0), 3.5, 1.0)
    mom = magneto_solve(susp, prm).dipole_moments()[0]
    cm = mom / (4 * np.pi * a**3 * np.asarray(prm.H0))
    e_cm = float(np.max(np.abs(cm - (3.5 - 1) / (3.5 + 2))))
    dt = time.perf_counter() - t0
    ok = max(e_mob, e_res, e_sq) <= 1e-8 and e_cm <= 1e-10 and dt < 60
    report(6, ok, f"mobility {e_mob:.1e} resistance {e_res:.1e} squirmer {e_sq:.1e} Clausius-Mossotti {e_cm:.1e}",
           dt)


def test_c7_fft_path_equivalence_and_speed(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(7)
    kinds = [k for k in OperatorKind if k.default_side != "interior"]
    worst = 0.0
    for _ in range(100):
        kind = kinds[rng.integers(len(kinds))]
        p = int(rng.integers(3, 13))
        rs, rt = rng.uniform(0.3, 1.5, 2)
        d = rng.standard_normal(3)
        d /= np.linalg.norm(d)
        gap = 10 ** rng.uniform(-3, 0) * 2 * max(rs, rt)
        src = Sphere(rng.standard_normal(3), rs, p, 0)
        tgt = Sphere(src.c + d * (rs + rt + gap), rt, p, 1)
        dens = random_vector(rng, p) if kind.is_stokes else random_coeffs(rng, p)
        g = tgt.grid
        batch = TargetBatch(tgt.points().reshape(-1, 3), tgt.normals().reshape(-1, 3))
        ref = near_eval_direct(kind, dens, src, batch)
        if kind.is_stokes:
            th, ph = g.angles()
            ref = cartesian_to_spherical(ref.reshape((3,) + g.shape), th, ph)
        else:
            ref = ref.reshape(g.shape)
        got = near_eval_fft(kind, dens, src, tgt, p_eval="auto", out="values")
        worst = max(worst, float(np.max(np.abs(got - ref)) / np.max(np.abs(ref))))
    bench = ex.bench_near([64], "StokesS", reps=5)[0]
    dt = time.perf_counter() - t0
    ok = worst <= 1e-11 and bench["speedup"] >= 10 and dt < 300
    report(7, ok, f"100 trials worst rel err {worst:.1e}; p=64 fft {bench['fft_seconds']:.3f}s "
                  f"direct {bench['direct_seconds']:.3f}s speedup {bench['speedup']:.1f}x", dt)


def _dense_reference(kind, susp, dens):
    """Self term from the spectrum, near pairs by exact formulas, all other pairs by direct quadrature."""
    out = []
    for t, tg in enumerate(susp.spheres):
        v = self_eval(kind, dens[t], tg, out="values")
        tb = TargetBatch(tg.points().reshape(-1, 3), tg.normals().reshape(-1, 3))
        acc = 0
        for s, sc in enumerate(susp.spheres):
            if s == t:
                continue
            if s in susp.near_pairs()[t]:
                acc = acc + near_eval_direct(kind, dens[s], sc, tb)
            else:
                acc = acc + smooth_quadrature_eval(kind, sc, dens[s], tb)
        th, ph = tg.grid.angles()
        if OperatorKind.parse(kind).is_stokes:
            out.append(v + cartesian_to_spherical(acc.reshape((3,) + tg.grid.shape), th, ph))
        else:
            out.append(v + acc.reshape(tg.grid.shape))
    return out


def test_c8_composite_apply(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(8)
    susp = cubic_lattice(2, 1, 8)
    worst = {}
    for kind in ("StokesS", "StokesDplus", "StokesKminus", "LaplaceS"):
        dens = [random_vector(rng, 8) if OperatorKind.parse(kind).is_stokes else random_coeffs(rng, 8)
                for _ in susp.spheres]
        got = composite_apply(kind, susp, dens)
        ref = _dense_reference(kind, susp, dens)
        worst[kind] = max(float(np.max(np.abs(a - b))) for a, b in zip(got, ref)) / \
            max(float(np.max(np.abs(b))) for b in ref)
    dt = time.perf_counter() - t0
    report(8, max(worst.values()) <= 1e-9 and dt < 120,
           "n_b=8 p=8 rel err " + " ".join(f"{k}={v:.1e}" for k, v in worst.items()), dt)


@pytest.mark.slow
def test_c9_lattice_scaling(report):
    t0 = time.perf_counter()
    fits = {}
    lines = []
    for p in (4, 8):
        small = ex.bench_lattice([2, 3], [4], [p], reps=3, far=False)
        big = ex.bench_lattice([5, 9], [4], [p], reps=1, far=False)
        rows = small + big
        fits[p] = ex.fit_exponent([r["n_b"] for r in rows], [r["near_self_seconds"] for r in rows])
        lines.append(f"p={p}: " + ", ".join(f"{r['n_b']}->{r['near_self_seconds']:.2f}s" for r in rows)
                     + f" exponent {fits[p]:.2f}")
    dt = time.perf_counter() - t0
    report(9, max(fits.values()) <= 1.2 and dt < 1200, "; ".join(lines), dt)


def test_c10_grand_mobility_symmetry(report):
    t0 = time.perf_counter()
    susp = Suspension([Sphere((0, 0, 0), 1.0, 16, 0), Sphere((2.6, 0.4, -0.3), 0.8, 16, 1)])
    M = grand_mobility(susp, tol=1e-12)
    asym = float(np.max(np.abs(M - M.T)) / np.max(np.abs(M)))
    dt = time.perf_counter() - t0
    report(10, M.shape == (12, 12) and asym <= 1e-7 and dt < 300, f"12x12 max|M-M^T|/max|M| = {asym:.1e}", dt)
