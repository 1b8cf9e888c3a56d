"""Numerical experiments behind the CLI: transform diagnostics, spectra tables,
near-singular convergence sweeps, a three-sphere BIE test and timing benchmarks.

Every function returns a list of flat dict rows ready for CSV output.
"""
import logging
import statistics
import time

import numpy as np

from .evaluation import (ApplyStats, Sphere, Suspension, TargetBatch, composite_apply, cubic_lattice,
                         evaluate, far_backend_direct, near_eval_direct, near_eval_fft,
                         smooth_quadrature_eval)
from .evaluation import kernels
from .harmonics import (VectorCoeffs, cartesian_to_spherical, get_grid, ncoeffs, nm_arrays, resize,
                        sht_forward, sht_inverse, vsht_forward, vsht_inverse)
from .solver import _complex_moments, apply_mobility, apply_resistance, gmres, join, split
from .spectra import OperatorKind, eigenvalue

log = logging.getLogger(__name__)

LADDER = tuple(10.0 ** (-0.5 * k) for k in range(13))


def _rel(err, ref):
    den = np.max(np.abs(ref))
    return float(np.max(np.abs(err)) / den) if den > 0 else float(np.max(np.abs(err)))


def _log10(x):
    return float(np.log10(max(x, 1e-300)))


# ---------------------------------------------------------------- transforms and spectra

def transform_table(p_values, seed=0):
    rng = np.random.default_rng(seed)
    rows = []
    for p in p_values:
        g = get_grid(p)
        K = ncoeffs(p)
        c = rng.standard_normal(K) + 1j * rng.standard_normal(K)
        scalar = _rel(sht_forward(sht_inverse(c, g), g) - c, c)
        v = VectorCoeffs(*(rng.standard_normal((3, K)) + 1j * rng.standard_normal((3, K))))
        v.w[0] = v.x[0] = 0
        back = vsht_forward(vsht_inverse(v, g), g)
        vector = _rel(back.to_array() - v.to_array(), v.to_array())
        Y = sht_inverse(np.eye(K), g)
        gram = np.einsum("aij,bij,i->ab", Y, Y.conj(), g.weights)
        ortho = float(np.max(np.abs(gram - np.eye(K))))
        rows.append({"p": p, "nodes": g.nlat * g.nlon, "scalar_roundtrip": scalar,
                     "vector_roundtrip": vector, "orthonormality": ortho})
    return rows


def spectra_table(nmax, kinds=None):
    kinds = [OperatorKind.parse(k) for k in kinds] if kinds else list(OperatorKind)
    rows = []
    for kind in kinds:
        for ch in ("VWX" if kind.is_stokes else "Y"):
            for n in range(nmax + 1):
                val = 0.0 if (ch in "WX" and n == 0) else eigenvalue(kind, n, ch)
                rows.append({"kind": kind.value, "channel": ch, "n": n, "value": val})
    return rows


# ---------------------------------------------------------------- synthetic near-singular sweep

def synthetic_density(pmax, decay, rng, vector=True):
    """Random coefficients scaled by (1 + n)^-decay."""
    n, _ = nm_arrays(pmax)
    s = (1.0 + n) ** -decay

    def draw():
        return (rng.standard_normal(n.size) + 1j * rng.standard_normal(n.size)) * s

    if not vector:
        return draw()
    v = VectorCoeffs(draw(), draw(), draw())
    v.w[0] = v.x[0] = 0
    return v


def shell_targets(sphere, distance, count, rng):
    """Random points at the given surface distance, with outward radial normals."""
    d = rng.standard_normal((count, 3))
    d /= np.linalg.norm(d, axis=1)[:, None]
    return TargetBatch(sphere.c + (sphere.radius + distance) * d, d)


def _truncate(dens, p):
    return dens.resize(p) if isinstance(dens, VectorCoeffs) else resize(dens, p)


def _pointwise(val, ref):
    """Per-target error norms relative to the largest reference value on the shell."""
    err = np.abs(val - ref)
    if err.ndim > 1:
        err = np.linalg.norm(err, axis=0)
        ref = np.linalg.norm(ref, axis=0)
    return err / max(np.max(np.abs(ref)), 1e-300)


def convergence_synthetic(kinds, p_values, distances=LADDER, decay=2.0, pmax=16, targets=64, seed=0):
    """Log relative error of smooth quadrature and the near-singular path on a unit sphere.

    The density has degree pmax and each scheme works with its degree-p truncation
    on the order-p grid. Two references are reported: 'full' evaluates the whole
    density exactly (errors include truncation of the density), 'band' evaluates
    the degree-p truncation exactly (pure evaluation error). Errors are per target,
    normalized by the largest reference value on the shell; the table keeps the
    median and the maximum over the shell.
    """
    rng = np.random.default_rng(seed)
    rows = []
    for kind in kinds:
        kind = OperatorKind.parse(kind)
        dens = synthetic_density(pmax, decay, rng, kind.is_stokes)
        ref_sphere = Sphere((0, 0, 0), 1.0, max(pmax, 1))
        shells = [(d, shell_targets(ref_sphere, d, targets, rng)) for d in distances]
        full = [near_eval_direct(kind, dens, ref_sphere, t) for _, t in shells]
        for p in p_values:
            sph = Sphere((0, 0, 0), 1.0, p)
            dp = _truncate(dens, p)
            for (d, t), ref_full in zip(shells, full):
                near = near_eval_direct(kind, dp, sph, t)
                smooth = smooth_quadrature_eval(kind, sph, dp, t)
                for ref_name, ref in (("full", ref_full), ("band", near)):
                    for scheme, val in (("near", near), ("smooth", smooth)):
                        e = _pointwise(val, ref)
                        rows.append({"kind": kind.value, "p": p, "distance": d, "scheme": scheme,
                                     "reference": ref_name, "median_log10": _log10(np.median(e)),
                                     "max_log10": _log10(np.max(e))})
    return rows


# ---------------------------------------------------------------- three-sphere BIE experiment

THREE_SPHERES = (((0.0, 0.0, 0.0), 0.903), ((1.6, 0.0, 0.0), 0.510), ((0.2, 1.3, 0.3), 0.262))


def _point_sources(susp, rng):
    """One source inside each sphere at half its radius, random direction and strength."""
    out = []
    for s in susp.spheres:
        d = rng.standard_normal(3)
        d /= np.linalg.norm(d)
        f = rng.standard_normal(3)
        out.append((s.c + 0.5 * s.radius * d, f))
    return out


def _stokeslets(x, sources):
    return sum(kernels.kernel_stokeslet(x, y) @ f for y, f in sources)


def _stresslets(x, n, sources):
    return sum(np.einsum("...ijk,j,...k->...i", kernels.kernel_stresslet(x, y), f, n) for y, f in sources)


def _surface_coeffs(susp, field):
    """field(points, normals) -> Cartesian (..., 3); projected per sphere."""
    out = []
    for s in susp.spheres:
        g = s.grid
        th, ph = g.angles()
        F = field(s.points(), s.normals())
        out.append(vsht_forward(cartesian_to_spherical(np.moveaxis(F, -1, 0), th, ph), g))
    return out


def _bie_targets(susp, distances, count, rng):
    """Per distance: points at r_l * d from each sphere, dropped if inside a neighbor."""
    shells = []
    for d in distances:
        pts, nrm = [], []
        for s in susp.spheres:
            t = shell_targets(s, s.radius * d, count, rng)
            ok = np.ones(len(t), dtype=bool)
            for o in susp.spheres:
                ok &= np.linalg.norm(t.points - o.c, axis=1) > o.radius * (1 + 1e-9)
            pts.append(t.points[ok])
            nrm.append(t.normals[ok])
        shells.append((d, TargetBatch(np.concatenate(pts), np.concatenate(nrm))))
    return shells


def _exact_sum(kind, susp, dens, targets):
    return sum(near_eval_direct(kind, c, s, targets) for s, c in zip(susp.spheres, dens))


def _smooth_sum(kind, susp, dens, targets):
    return sum(smooth_quadrature_eval(kind, s, c, targets) for s, c in zip(susp.spheres, dens))


def _completion_at(susp, psi, x):
    u = 0
    for s, b in zip(susp.spheres, psi):
        F, T = _complex_moments(s, b)
        u = u + kernels.kernel_stokeslet(x, s.c) @ F + kernels.rotlet(x, s.c, T)
    return np.moveaxis(u, -1, 0)


def bie_three_spheres(p_values, distances=LADDER, targets=16, seed=0, tol=1e-13, spheres=THREE_SPHERES):
    """Solve the mobility- and resistance-type equations driven by interior point sources.

    Errors of S[mu] and K[mu] are measured against exact per-sphere evaluation of
    the computed density; D[psi] against the closed form (sum of Stokeslets minus
    the completion flow), which holds because the exterior solution is unique.
    """
    rng = np.random.default_rng(seed)
    rows = []
    geo = [Sphere(c, r, 1, i) for i, (c, r) in enumerate(spheres)]
    sources = _point_sources(Suspension(geo), rng)
    shells = _bie_targets(Suspension(geo), distances, targets, rng)
    for p in p_values:
        susp = Suspension([Sphere(s.center, s.radius, p, s.id) for s in geo])
        tau = _surface_coeffs(susp, lambda x, n: _stresslets(x, n, sources))
        gam = _surface_coeffs(susp, lambda x, n: _stokeslets(x, sources))
        mu_x, rep_m = gmres(lambda v: apply_mobility(susp, v), join(tau), tol=tol)
        psi_x, rep_r = gmres(lambda v: apply_resistance(susp, v), join(gam), tol=tol)
        mu, psi = split(mu_x, susp), split(psi_x, susp)
        log.info("p=%d: mobility %d its, resistance %d its", p, rep_m.iterations, rep_r.iterations)
        for d, t in shells:
            cases = (("S", "StokesS", mu, _exact_sum("StokesS", susp, mu, t)),
                     ("K", "StokesKplus", mu, _exact_sum("StokesKplus", susp, mu, t)),
                     ("D", "StokesDplus", psi,
                      np.moveaxis(_stokeslets(t.points, sources), -1, 0) - _completion_at(susp, psi, t.points)))
            for name, kind, dens, ref in cases:
                near = evaluate(kind, susp, dens, t)
                smooth = _smooth_sum(kind, susp, dens, t)
                for scheme, val in (("near", near), ("smooth", smooth)):
                    e = _rel(val - ref, ref)
                    rows.append({"operator": name, "p": p, "distance": d, "scheme": scheme,
                                 "rel_error": e, "log10_error": _log10(e),
                                 "gmres_mobility": rep_m.iterations, "gmres_resistance": rep_r.iterations})
    return rows


# ---------------------------------------------------------------- timing

def timed(fn, reps=5, warmup=1):
    """Median wall-clock seconds of fn() over reps runs after warm-up runs."""
    for _ in range(warmup):
        fn()
    ts = []
    for _ in range(reps):
        t0 = time.perf_counter()
        fn()
        ts.append(time.perf_counter() - t0)
    return statistics.median(ts)


def bench_near(p_values, kind="StokesS", gap=0.1, targets=None, reps=5, seed=0, p_eval="auto"):
    """FFT versus direct evaluation of one source sphere on a neighboring sphere's grid."""
    rng = np.random.default_rng(seed)
    kind = OperatorKind.parse(kind)
    rows = []
    for p in p_values:
        src = Sphere((0, 0, 0), 1.0, p)
        tgt = Sphere((2.0 + gap, 0, 0), 1.0, p, 1)
        dens = synthetic_density(p, 2.0, rng, kind.is_stokes)
        batch = TargetBatch(tgt.points().reshape(-1, 3),
                            tgt.normals().reshape(-1, 3) if kind.family == "K" else None)
        t_fft = timed(lambda: near_eval_fft(kind, dens, src, tgt, p_eval=p_eval, out="values"), reps)
        t_dir = timed(lambda: near_eval_direct(kind, dens, src, batch), reps)
        rows.append({"p": p, "kind": kind.value, "fft_seconds": t_fft, "direct_seconds": t_dir,
                     "speedup": t_dir / t_fft})
    return rows


def bench_lattice(ks, qs, p_values, kind="StokesS", reps=5, far=True, seed=0, poly=False):
    """Composite apply time per lattice; near+self is reported separately from far."""
    rng = np.random.default_rng(seed)
    kind = OperatorKind.parse(kind)
    rows = []
    for q in qs:
        for p in p_values:
            for k in ks:
                susp = cubic_lattice(k, q, p, poly=poly)
                dens = [synthetic_density(p, 2.0, rng, kind.is_stokes) for _ in susp.spheres]
                runs = []

                def once():
                    st = ApplyStats()
                    composite_apply(kind, susp, dens, far_backend=far_backend_direct if far else None,
                                    stats=st)
                    runs.append(st)

                total = timed(once, reps)
                runs = runs[-reps:]
                near_self = statistics.median(r.get("near", 0) + r.get("self", 0) + r.get("transform", 0)
                                              for r in runs)
                far_t = statistics.median(r.get("far", 0) for r in runs)
                rows.append({"q": q, "p": p, "k": k, "n_b": len(susp), "near_pairs": runs[-1]["near_pairs"],
                             "total_seconds": total, "near_self_seconds": near_self,
                             "far_seconds": far_t if far else float("nan")})
                log.info("lattice q=%d p=%d n_b=%d: %.2fs", q, p, len(susp), total)
    return rows


def fit_exponent(n, t):
    """Least-squares slope of log t against log n."""
    return float(np.polyfit(np.log(np.asarray(n, dtype=float)), np.log(np.asarray(t, dtype=float)), 1)[0])
