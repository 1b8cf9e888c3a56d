"""Magnetostatic bead suspensions and squirmer dynamics on top of the solvers."""
import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.transform import Rotation as _Rot

from .evaluation import Suspension, composite_apply, evaluate
from .harmonics import (VectorCoeffsYGX, cartesian_to_spherical, sht_forward, sht_inverse,
                        vsht_forward, vsht_inverse, ygx_to_vwx)
from .rotation import align_pole, rotate_vector
from .solver import RigidMotion, gmres, net_force_torque, solve_mobility, solve_squirmer

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class MagneticParams:
    H0: tuple = (0.0, 0.0, 1.0)
    mu_particle: float = 2.0
    mu_fluid: float = 1.0

    def __post_init__(self):
        if self.mu_particle <= 0 or self.mu_fluid <= 0:
            raise ValueError("permeabilities must be positive")

    @property
    def eta_m(self):
        return (self.mu_particle - self.mu_fluid) / (self.mu_particle + self.mu_fluid)

    @property
    def clausius_mossotti(self):
        return (self.mu_particle - self.mu_fluid) / (self.mu_particle + 2 * self.mu_fluid)


@dataclass
class SquirmerParams:
    B1: float = 1.0
    B2: float = 0.0
    orientations: np.ndarray = None

    def __post_init__(self):
        if self.orientations is not None:
            o = np.atleast_2d(np.asarray(self.orientations, dtype=float))
            if np.any(np.abs(np.linalg.norm(o, axis=1) - 1) > 1e-12):
                raise ValueError("orientations must be unit vectors")
            self.orientations = o


@dataclass
class SimState:
    time: float
    centers: np.ndarray
    orientations: np.ndarray
    motions: list = field(default_factory=list)
    step: int = 0

    def to_dict(self):
        return {"time": self.time, "step": self.step, "centers": self.centers.tolist(),
                "orientations": self.orientations.tolist(),
                "motions": [{"v": m.v.tolist(), "omega": m.omega.tolist()} for m in self.motions]}

    @classmethod
    def from_dict(cls, d):
        mot = [RigidMotion(m["v"], m["omega"]) for m in d.get("motions", [])]
        return cls(d["time"], np.array(d["centers"], dtype=float), np.array(d["orientations"], dtype=float),
                   mot, d.get("step", 0))


# ---------------------------------------------------------------- magnetostatics

@dataclass
class MagnetoResult:
    suspension: Suspension
    params: MagneticParams
    q: list
    report: object

    def potential(self, points):
        """phi(x) = -H0 . x + sum_k S_k[q_k](x) at fluid points."""
        points = np.atleast_2d(points)
        phi = -points @ np.asarray(self.params.H0, dtype=float)
        return phi + evaluate("LaplaceS", self.suspension, self.q, points).real

    def dipole_moments(self):
        """First moments of each q, the strength of its far-field dipole."""
        out = []
        for s, q in zip(self.suspension.spheres, self.q):
            vals = sht_inverse(q, s.grid).real
            rel = s.points() - s.c
            out.append(np.sum((s.weights() * vals)[..., None] * rel, axis=(0, 1)))
        return np.array(out)


def _split_scalar(x, susp):
    k = (susp.p + 1) ** 2
    return [x[i * k:(i + 1) * k] for i in range(len(susp))]


def magneto_solve(susp, params, tol=1e-12, **kw):
    """Solve (1/2 + eta K_pv)[q] = eta H0 . n for every bead."""
    eta = params.eta_m
    H0 = np.asarray(params.H0, dtype=float)

    def apply(x):
        qs = _split_scalar(x, susp)
        km = composite_apply("LaplaceKminus", susp, qs, out="coeffs", **kw)
        # K_minus = K_pv + 1/2 on the own sphere
        return np.concatenate([0.5 * q + eta * (k - 0.5 * q) for q, k in zip(qs, km)])

    rhs = np.concatenate([sht_forward(eta * s.normals() @ H0, s.grid) for s in susp.spheres])
    x, rep = gmres(apply, rhs, tol=tol, scale=eta * np.linalg.norm(H0) + (eta == 0))
    return MagnetoResult(susp, params, _split_scalar(x, susp), rep)


def _surface_grad(c, sphere):
    """Surface gradient (spherical components) of a scalar expansion on the sphere."""
    z = np.zeros_like(c)
    return vsht_inverse(ygx_to_vwx(VectorCoeffsYGX(z, c, z)), sphere.grid) / sphere.radius


def maxwell_traction(result, index):
    """Jump of the Maxwell stress, exterior minus interior, on sphere `index`.

    Returns spherical components (3, nlat, nlon).
    """
    susp = result.suspension
    prm = result.params
    s = susp.spheres[index]
    g = s.grid
    th, ph = g.angles()
    H0 = np.asarray(prm.H0, dtype=float)
    H0s = cartesian_to_spherical(np.broadcast_to(H0[:, None, None], (3,) + g.shape), th, ph)
    phi = composite_apply("LaplaceS", susp, result.q, out="coeffs")[index]
    tang = _surface_grad(phi, s).real
    out = 0
    for kind, mu, sign in (("LaplaceKplus", prm.mu_fluid, 1), ("LaplaceKminus", prm.mu_particle, -1)):
        dn = composite_apply(kind, susp, result.q)[index].real
        H = H0s - tang
        H[0] = H0s[0] - dn
        Hn = H[0]
        T = mu * (H * Hn - 0.5 * np.sum(H * H, axis=0) * np.array([1.0, 0, 0])[:, None, None])
        out = out + sign * T
    return out


def magnetic_forces(result):
    return [net_force_torque(s, maxwell_traction(result, i)) for i, s in enumerate(result.suspension.spheres)]


# ---------------------------------------------------------------- squirmers

def squirmer_slip(sphere, orientation, B1, B2):
    """Tangential slip (B1 + B2 cos t) sin t e_t about the orientation axis, as VectorCoeffs.

    Built with the pole on +z and rotated into place.
    """
    g = sphere.grid
    th, _ = g.angles()
    F = np.zeros((3,) + g.shape)
    F[1] = (B1 + B2 * np.cos(th)) * np.sin(th)
    c = vsht_forward(F, g)
    return rotate_vector(c, align_pole(orientation))


def _suspension(base, centers):
    return base.moved(centers)


def _rates(susp, orientations, params, kw):
    slips = [squirmer_slip(s, o, params.B1, params.B2) for s, o in zip(susp.spheres, orientations)]
    res = solve_squirmer(susp, slips, **kw)
    return res.motions


def _rotate_orientation(e, omega, dt):
    e2 = _Rot.from_rotvec(omega * dt).apply(e)
    return e2 / np.linalg.norm(e2)


def _advance(state, susp0, dt, rate_fn, integrator):
    """One explicit step; rate_fn(suspension, orientations) -> motions."""
    x0 = state.centers
    e0 = state.orientations
    if integrator == "euler":
        mot = rate_fn(_suspension(susp0, x0), e0)
        x1 = x0 + dt * np.array([m.v for m in mot])
        e1 = np.array([_rotate_orientation(e, m.omega, dt) for e, m in zip(e0, mot)])
    elif integrator == "rk4":
        def f(x, e):
            mot = rate_fn(_suspension(susp0, x), e / np.linalg.norm(e, axis=1)[:, None])
            v = np.array([m.v for m in mot])
            w = np.array([m.omega for m in mot])
            return v, np.cross(w, e), mot
        k1x, k1e, mot = f(x0, e0)
        k2x, k2e, _ = f(x0 + 0.5 * dt * k1x, e0 + 0.5 * dt * k1e)
        k3x, k3e, _ = f(x0 + 0.5 * dt * k2x, e0 + 0.5 * dt * k2e)
        k4x, k4e, _ = f(x0 + dt * k3x, e0 + dt * k3e)
        x1 = x0 + dt / 6 * (k1x + 2 * k2x + 2 * k3x + k4x)
        e1 = e0 + dt / 6 * (k1e + 2 * k2e + 2 * k3e + k4e)
        e1 = e1 / np.linalg.norm(e1, axis=1)[:, None]
    else:
        raise ValueError(f"unknown integrator {integrator!r}")
    _suspension(susp0, x1)  # raises GeometryError on overlap
    return SimState(state.time + dt, x1, e1, list(mot), state.step + 1)


def squirmer_step(state, susp, params, dt, integrator="euler", **kw):
    return _advance(state, susp, dt, lambda s, e: _rates(s, e, params, kw), integrator)


def mhd_rates(susp, params, **kw):
    """Rigid motions of beads driven by the magnetic traction."""
    mag = magneto_solve(susp, params)
    forces = magnetic_forces(mag)
    return solve_mobility(susp, forces, **kw).motions, forces


def mhd_step(state, susp, params, dt, integrator="euler", **kw):
    return _advance(state, susp, dt, lambda s, e: mhd_rates(s, params, **kw)[0], integrator)


def initial_state(susp, orientations=None):
    nb = len(susp)
    if orientations is None:
        orientations = np.tile([0.0, 0.0, 1.0], (nb, 1))
    return SimState(0.0, susp.centers().copy(), np.array(orientations, dtype=float))
