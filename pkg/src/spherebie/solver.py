"""Second-kind boundary integral formulations for rigid spheres, solved with GMRES.

Unknowns are vector-harmonic coefficients (V, W, X) of degree p per sphere,
flattened in suspension order; the squirmer problem appends (v, omega) per body.
Viscosity is 1. Forces and torques returned by the resistance solver, and
accepted by the mobility solver, are those applied to the bodies (equal and
opposite to the hydrodynamic traction integrals).
"""
import logging
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse.linalg import LinearOperator
from scipy.sparse.linalg import gmres as _scipy_gmres

from .evaluation import kernels
from .evaluation.composite import composite_apply
from .harmonics import (VectorCoeffs, cartesian_to_spherical, ncoeffs, spherical_to_cartesian,
                        vsht_forward, vsht_inverse)

log = logging.getLogger(__name__)


@dataclass
class BodyForce:
    F: np.ndarray = field(default_factory=lambda: np.zeros(3))
    T: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        self.F = np.asarray(self.F, dtype=float)
        self.T = np.asarray(self.T, dtype=float)
        if not (np.all(np.isfinite(self.F)) and np.all(np.isfinite(self.T))):
            raise ValueError("force and torque must be finite")


@dataclass
class RigidMotion:
    v: np.ndarray = field(default_factory=lambda: np.zeros(3))
    omega: np.ndarray = field(default_factory=lambda: np.zeros(3))
    residual: float = 0.0

    def __post_init__(self):
        self.v = np.asarray(self.v, dtype=float)
        self.omega = np.asarray(self.omega, dtype=float)
        if not (np.all(np.isfinite(self.v)) and np.all(np.isfinite(self.omega))):
            raise ValueError("rigid motion must be finite")


@dataclass
class GmresReport:
    converged: bool
    iterations: int
    residuals: list
    info: int
    seconds: float

    @property
    def final_residual(self):
        return self.residuals[-1] if self.residuals else 0.0


class ConvergenceError(RuntimeError):
    def __init__(self, msg, report):
        super().__init__(msg)
        self.report = report


# ---------------------------------------------------------------- GMRES

def gmres(apply, rhs, tol=1e-10, restart=50, maxiter=200, strict=False, scale=None):
    """Restarted GMRES on a matrix-free operator; returns (x, GmresReport).

    Stops when |r| <= tol * max(|rhs|, scale). `scale` guards right-hand sides
    that are pure roundoff (e.g. a single sphere in the mobility problem).
    maxiter counts inner iterations. Non-convergence is reported in the
    report (and raised when strict=True).
    """
    rhs = np.asarray(rhs, dtype=complex)
    n = rhs.size
    t0 = time.perf_counter()
    bnorm = max(np.linalg.norm(rhs), scale or 0.0)
    if bnorm == 0:
        return np.zeros_like(rhs), GmresReport(True, 0, [0.0], 0, 0.0)
    hist = []
    op = LinearOperator((n, n), matvec=lambda v: np.asarray(apply(v), dtype=complex), dtype=complex)
    outer = max(1, -(-maxiter // restart))
    x, info = _scipy_gmres(op, rhs, rtol=0.0, atol=tol * bnorm, restart=min(restart, n), maxiter=outer,
                           callback=hist.append, callback_type="pr_norm")
    res = float(np.linalg.norm(apply(x) - rhs) / bnorm)
    report = GmresReport(info == 0 and res <= 10 * tol, len(hist), [float(h) for h in hist] + [res],
                         int(info), time.perf_counter() - t0)
    log.info("gmres: %d iterations, relative residual %.3e", report.iterations, res)
    if strict and not report.converged:
        raise ConvergenceError(f"GMRES did not converge (residual {res:.3e})", report)
    return x, report


# ---------------------------------------------------------------- layout helpers

def _block(p):
    return 3 * ncoeffs(p)


def split(x, susp):
    """Flat vector -> list of VectorCoeffs (extra trailing entries ignored)."""
    k = _block(susp.p)
    return [VectorCoeffs.from_array(x[i * k:(i + 1) * k]) for i in range(len(susp))]


def join(blocks):
    return np.concatenate([b.to_array() for b in blocks])


def _cartesian_samples(c, sphere):
    g = sphere.grid
    th, ph = g.angles()
    return np.moveaxis(spherical_to_cartesian(vsht_inverse(c, g), th, ph), 0, -1)


def _from_cartesian(F, sphere):
    g = sphere.grid
    th, ph = g.angles()
    return vsht_forward(cartesian_to_spherical(np.moveaxis(F, -1, 0), th, ph), g)


def moments(sphere, samples):
    """(integral of f, integral of (y - c) x f) for Cartesian samples (nlat, nlon, 3)."""
    w = sphere.weights()[..., None]
    rel = sphere.points() - sphere.c
    return np.sum(w * samples, axis=(0, 1)).real, np.sum(w * np.cross(rel, samples), axis=(0, 1)).real


def _rigid(sphere, v, omega):
    rel = sphere.points() - sphere.c
    return _from_cartesian(v + np.cross(omega, rel), sphere)


def rigid_field(sphere, motion):
    """Coefficients of v + omega x (x - c) on the sphere."""
    return _rigid(sphere, motion.v, motion.omega)


# ---------------------------------------------------------------- bookkeeping

def rho_from_forces(sphere, body_force):
    """Density with integral F and first moment T: F/(4 pi a^2) + 3/(8 pi a^4) T x (y - c)."""
    a = sphere.radius
    rel = sphere.points() - sphere.c
    F = body_force.F / (4 * np.pi * a**2) + 3 / (8 * np.pi * a**4) * np.cross(body_force.T, rel)
    return _from_cartesian(np.broadcast_to(F, rel.shape), sphere)


def net_force_torque(sphere, traction):
    """Quadrature of a traction field given as spherical components (3, nlat, nlon)."""
    g = sphere.grid
    th, ph = g.angles()
    f = np.moveaxis(spherical_to_cartesian(np.asarray(traction), th, ph), 0, -1)
    F, T = moments(sphere, f)
    return BodyForce(F, T)


def extract_rigid_motion(sphere, velocity):
    """Least-squares rigid motion of a surface velocity (3, nlat, nlon) spherical components."""
    g = sphere.grid
    th, ph = g.angles()
    u = np.moveaxis(spherical_to_cartesian(np.asarray(velocity), th, ph), 0, -1).real
    a = sphere.radius
    F, T = moments(sphere, u)
    v = F / (4 * np.pi * a**2)
    om = 3 * T / (8 * np.pi * a**4)
    rel = sphere.points() - sphere.c
    fit = v + np.cross(om, rel)
    w = sphere.weights()[..., None]
    num = np.sqrt(np.sum(w * (u - fit) ** 2))
    den = np.sqrt(np.sum(w * u**2))
    return RigidMotion(v, om, float(num / den) if den > 0 else 0.0)


# ---------------------------------------------------------------- operators

def _composite(kinds, susp, blocks, **kw):
    total = None
    for k in kinds:
        r = composite_apply(k, susp, blocks, out="coeffs", **kw)
        total = r if total is None else [a + b for a, b in zip(total, r)]
    return total


def apply_porous(susp, mu, **kw):
    """(S + D_+)[mu] on every surface, i.e. 1/2 mu + sum_k (S_k + D_k)[mu]."""
    return join(_composite(("StokesS", "StokesDplus"), susp, split(mu, susp), **kw))


def rhs_porous(susp, u_inf):
    u_inf = np.asarray(u_inf, dtype=float)
    return join([rigid_field(s, RigidMotion(-u_inf, np.zeros(3))) for s in susp.spheres])


def _completion_L(sphere, c):
    F, T = _complex_moments(sphere, c)
    return _rigid(sphere, F, T)


def apply_mobility(susp, mu, **kw):
    """(1/2 + K)[mu] + L[mu] with K the interior-limit traction; L acts on its own body."""
    blocks = split(mu, susp)
    out = _composite(("StokesKminus",), susp, blocks, **kw)
    return join([o + _completion_L(s, b) for o, s, b in zip(out, susp.spheres, blocks)])


def rhs_mobility(susp, forces, **kw):
    rho = [rho_from_forces(s, f) for s, f in zip(susp.spheres, forces)]
    return -join(_composite(("StokesKminus",), susp, rho, **kw))


def _completion_N(susp, blocks):
    """Stokeslet plus rotlet at each center with the density's force and torque moments."""
    out = []
    strengths = [_complex_moments(s, b) for s, b in zip(susp.spheres, blocks)]
    for tgt in susp.spheres:
        x = tgt.points()
        u = np.zeros(x.shape, dtype=complex)
        for src, (F, T) in zip(susp.spheres, strengths):
            u += kernels.kernel_stokeslet(x, src.c) @ F + kernels.rotlet(x, src.c, T)
        out.append(_from_cartesian(u, tgt))
    return out


def apply_resistance(susp, psi, **kw):
    blocks = split(psi, susp)
    out = _composite(("StokesDplus",), susp, blocks, **kw)
    return join([o + n for o, n in zip(out, _completion_N(susp, blocks))])


def rhs_resistance(susp, motions):
    return join([rigid_field(s, m) for s, m in zip(susp.spheres, motions)])


def _closure_scales(sphere):
    a = sphere.radius
    return 1 / (4 * np.pi * a**2), 3 / (8 * np.pi * a**4)


def apply_squirmer(susp, x, **kw):
    """Augmented system: surface rows (S + D_+)[mu] - v - omega x (x - c); closure rows on mu moments."""
    nb = len(susp)
    k = _block(susp.p)
    blocks = split(x, susp)
    rig = x[nb * k:].reshape(nb, 6)
    out = _composite(("StokesS", "StokesDplus"), susp, blocks, **kw)
    rows = []
    clos = []
    for i, s in enumerate(susp.spheres):
        rows.append(out[i] - _rigid(s, rig[i, :3], rig[i, 3:]))
        F, T = _complex_moments(s, blocks[i])
        cf, ct = _closure_scales(s)
        clos.append(np.concatenate([F * cf, T * ct]))
    return np.concatenate([join(rows), np.concatenate(clos)])


def _complex_moments(sphere, c):
    f = _cartesian_samples(c, sphere)
    w = sphere.weights()[..., None]
    rel = sphere.points() - sphere.c
    return np.sum(w * f, axis=(0, 1)), np.sum(w * np.cross(rel, f), axis=(0, 1))


def rhs_squirmer(susp, slips):
    return np.concatenate([join(slips), np.zeros(6 * len(susp), dtype=complex)])


# ---------------------------------------------------------------- drivers

@dataclass
class MobilityResult:
    motions: list
    mu: list
    rho: list
    report: GmresReport


def solve_mobility(susp, forces, tol=1e-10, restart=50, maxiter=200, **kw):
    rho = [rho_from_forces(s, f) for s, f in zip(susp.spheres, forces)]
    rhs = rhs_mobility(susp, forces, **kw)
    x, rep = gmres(lambda v: apply_mobility(susp, v, **kw), rhs, tol, restart, maxiter,
                   scale=np.linalg.norm(join(rho)))
    mu = split(x, susp)
    dens = [a + b for a, b in zip(mu, rho)]
    vel = composite_apply("StokesS", susp, dens, **kw)
    motions = [extract_rigid_motion(s, u) for s, u in zip(susp.spheres, vel)]
    return MobilityResult(motions, mu, rho, rep)


@dataclass
class ResistanceResult:
    forces: list
    psi: list
    report: GmresReport


def solve_resistance(susp, motions, tol=1e-10, restart=50, maxiter=200, **kw):
    rhs = rhs_resistance(susp, motions)
    x, rep = gmres(lambda v: apply_resistance(susp, v, **kw), rhs, tol, restart, maxiter)
    psi = split(x, susp)
    forces = [BodyForce(*moments(s, _cartesian_samples(b, s))) for s, b in zip(susp.spheres, psi)]
    return ResistanceResult(forces, psi, rep)


@dataclass
class PorousResult:
    mu: list
    report: GmresReport


def solve_porous(susp, u_inf, tol=1e-10, restart=50, maxiter=200, **kw):
    rhs = rhs_porous(susp, u_inf)
    x, rep = gmres(lambda v: apply_porous(susp, v, **kw), rhs, tol, restart, maxiter)
    return PorousResult(split(x, susp), rep)


@dataclass
class SquirmerResult:
    motions: list
    mu: list
    report: GmresReport


def solve_squirmer(susp, slips, tol=1e-10, restart=50, maxiter=200, **kw):
    rhs = rhs_squirmer(susp, slips)
    x, rep = gmres(lambda v: apply_squirmer(susp, v, **kw), rhs, tol, restart, maxiter)
    nb = len(susp)
    rig = x[nb * _block(susp.p):].reshape(nb, 6).real
    motions = [RigidMotion(r[:3], r[3:]) for r in rig]
    return SquirmerResult(motions, split(x, susp), rep)


def grand_mobility(susp, **kw):
    """6n x 6n matrix mapping stacked (F, T) per body to stacked (v, omega)."""
    nb = len(susp)
    M = np.zeros((6 * nb, 6 * nb))
    for col in range(6 * nb):
        e = np.zeros(6 * nb)
        e[col] = 1.0
        forces = [BodyForce(e[6 * i:6 * i + 3], e[6 * i + 3:6 * i + 6]) for i in range(nb)]
        res = solve_mobility(susp, forces, **kw)
        M[:, col] = np.concatenate([np.concatenate([m.v, m.omega]) for m in res.motions])
    return M
