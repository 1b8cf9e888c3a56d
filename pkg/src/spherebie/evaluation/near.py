"""Self, direct near-singular and FFT-accelerated near-singular evaluation.

Fields are computed from closed-form radial factors in source-centered
coordinates scaled by the source radius a. Homogeneity of the kernels gives the
physical prefactors: single layer velocity/potential times a, pressure of the
double layer times 1/a, everything else unchanged.
"""
from functools import lru_cache

import numpy as np

from ..harmonics import (VectorCoeffs, cart_to_sph, cartesian_to_spherical, get_grid, local_frame,
                         resize, sht_forward, sht_inverse, spherical_to_cartesian, vsht_forward,
                         vsht_inverse)
from ..rotation import align_pole, rotate_scalar, rotate_vector
from ..spectra import OperatorKind, apply_diagonal
from .fields import ring_modes
from .geometry import GeometryError, TargetBatch


def scale_factor(kind, radius, pressure=False):
    kind = OperatorKind.parse(kind)
    if kind.family == "S" and not pressure:
        return radius
    if kind.family == "D" and pressure and kind.is_stokes:
        return 1 / radius
    return 1.0


# ---------------------------------------------------------------- self

def self_eval(kind, dens, sphere, out="coeffs"):
    """On-surface operator via its spectrum; 'coeffs' or grid 'values' (spherical components)."""
    kind = OperatorKind.parse(kind)
    res = apply_diagonal(kind, dens) * scale_factor(kind, sphere.radius)
    if out == "coeffs":
        return res
    if kind.is_stokes:
        return vsht_inverse(res, sphere.grid)
    return sht_inverse(res, sphere.grid)


# ---------------------------------------------------------------- direct near

def _local_normals(normals, theta, phi):
    er, et, ep = local_frame(theta, phi)
    return np.stack([np.sum(normals * e, axis=-1) for e in (er, et, ep)], axis=-1)


def near_eval_direct(kind, dens, sphere, targets, pressure=False, interior=False, chunk=256):
    """Exact evaluation of a band-limited layer potential at arbitrary targets.

    Laplace kinds return (nt,); Stokes kinds (3, nt) Cartesian, with pressure
    (nt,) as a second result when requested. K kinds need target normals.
    """
    kind = OperatorKind.parse(kind)
    if not isinstance(targets, TargetBatch):
        targets = TargetBatch(targets)
    r, th, ph = cart_to_sph(sphere.local(targets.points))
    inside = r < 1
    if np.any(inside) and not interior:
        raise GeometryError("target inside the source sphere; pass interior=True")
    if interior and np.any(~inside):
        raise GeometryError("interior evaluation needs all targets inside")
    nu = None
    if kind.family == "K":
        if targets.normals is None:
            raise ValueError(f"{kind.value} needs target normals")
        nu = _local_normals(targets.normals, th, ph)
    stokes = kind.is_stokes
    ncomp = (4 if pressure and kind.family != "K" else 3) if stokes else 1
    vals = np.empty((ncomp, r.size), dtype=complex)
    for lo in range(0, r.size, chunk):
        sl = slice(lo, lo + chunk)
        F = ring_modes(kind, dens, r[sl], th[sl], None if nu is None else nu[sl], pressure)
        M = (F.shape[-1] - 1) // 2
        e = np.exp(1j * np.outer(ph[sl], np.arange(-M, M + 1)))
        vals[:, sl] = np.einsum("jcm,jm->cj", F, e)
    if not stokes:
        return vals[0] * scale_factor(kind, sphere.radius)
    u = spherical_to_cartesian(vals[:3], th, ph) * scale_factor(kind, sphere.radius)
    if pressure and kind.family != "K":
        return u, vals[3] * scale_factor(kind, sphere.radius, pressure=True)
    return u


# ---------------------------------------------------------------- pole-aligned geometry

def pole_aligned_normals(R, Cz, theta):
    """Target-sphere normal in source spherical components on each latitude disc.

    Target sphere of radius R centered at (0, 0, Cz); nu_phi vanishes.
    """
    theta = np.asarray(theta, dtype=float)
    d = np.sqrt(R**2 + 2 * R * Cz * np.cos(theta) + Cz**2)
    return np.stack([(R + Cz * np.cos(theta)) / d, Cz * np.sin(theta) / d, 0 * theta], axis=-1)


def pole_aligned_normals_printed(R, Cz, theta):
    """The published closed form, whose root lacks R in the cross term (test comparison only)."""
    theta = np.asarray(theta, dtype=float)
    d = np.sqrt(R**2 + 2 * Cz * np.cos(theta) + Cz**2)
    return np.stack([(R + Cz * np.cos(theta)) / d, Cz * np.sin(theta) / d, 0 * theta], axis=-1)


@lru_cache(maxsize=4096)
def _disc_geometry(rho, Cz, p_eval):
    """Source-frame (r_j, Theta_j) of the target discs and the target normals there."""
    g = get_grid(p_eval)
    ct, st = g.t, g.sin
    z = Cz + rho * ct
    rxy = rho * st
    r = np.hypot(rxy, z)
    Th = np.arctan2(rxy, z)
    nu = pole_aligned_normals(rho, Cz, g.theta)
    for a in (r, Th, nu):
        a.setflags(write=False)
    return r, Th, nu


def auto_p_eval(p, rho, Cz, tol=1e-15, cap=256):
    """Target-grid order that resolves the evaluated field on the target sphere.

    The field is a degree-p multipole sum at the source center; re-expanded about
    the target center its degree-l part is bounded by C(p+l, l) (rho/Cz)^l.
    """
    x = rho / Cz
    if x <= 0:
        return p
    logb = 0.0
    for l in range(1, cap + 1):
        logb += np.log((p + l) / l)
        if logb + l * np.log(x) < np.log(tol) and l >= p:
            return l
    return cap


def _modes_to_grid(F, nlon):
    """Sum_m F_m exp(i m phi_k) on nlon equispaced longitudes (orders folded)."""
    M = (F.shape[-1] - 1) // 2
    buf = np.zeros(F.shape[:-1] + (nlon,), dtype=complex)
    for m in range(-M, M + 1):
        buf[..., m % nlon] += F[..., m + M]
    return np.fft.ifft(buf, axis=-1) * nlon


def near_eval_fft_batch(kind, dens, src_radius, tgt_radius, offset, p_eval=None, pressure=False):
    """FFT-accelerated evaluation on a target sphere, batched over densities.

    dens: coefficients with leading batch axes (all sharing this geometry).
    offset: target center minus source center (physical units).
    Returns coefficients of degree p_eval of the field on the target sphere
    in the target's own spherical frame (VectorCoeffs for Stokes).
    """
    kind = OperatorKind.parse(kind)
    stokes = kind.is_stokes
    p = dens.nmax if stokes else int(np.sqrt(np.asarray(dens).shape[-1]) - 1)
    d = np.asarray(offset, dtype=float) / src_radius
    Cz = float(np.linalg.norm(d))
    rho = tgt_radius / src_radius
    if Cz - rho <= 1:
        raise GeometryError("target sphere must lie outside the source sphere")
    if p_eval is None:
        p_eval = p
    elif p_eval == "auto":
        p_eval = auto_p_eval(p, rho, Cz)
    rot = align_pole(d)
    inv = rot.inverse()
    # stage 1: density in the frame where the target center sits on +z
    if stokes:
        dr = rotate_vector(dens, inv)
    else:
        dr = rotate_scalar(dens, inv)
    # stage 2: per-disc modes and FFT in longitude
    r, Th, nu = _disc_geometry(round(rho, 15), round(Cz, 15), p_eval)
    g = get_grid(p_eval)
    F = ring_modes(kind, dr, r, Th, nu if kind.family == "K" else None, pressure)
    vals = np.swapaxes(_modes_to_grid(F, g.nlon), -3, -2) * scale_factor(kind, src_radius)
    # stage 3: back to the target frame, transform, rotate back
    if not stokes:
        c = sht_forward(vals[..., 0, :, :], g)
        return rotate_scalar(c, rot)
    th_s = np.broadcast_to(Th[:, None], g.shape)
    th_t, ph = g.angles()
    u = vals[..., :3, :, :]
    u = np.moveaxis(u, -3, 0)
    cart = spherical_to_cartesian(u, th_s, ph)
    sph = cartesian_to_spherical(cart, th_t, ph)
    c = vsht_forward(np.moveaxis(sph, 0, -3), g)
    out = rotate_vector(c, rot)
    if pressure and kind.family != "K":
        pc = sht_forward(vals[..., 3, :, :] * (scale_factor(kind, src_radius, True)
                                             / scale_factor(kind, src_radius)), g)
        return out, rotate_scalar(pc, rot)
    return out


def near_eval_fft(kind, dens, source, target, p_eval=None, out="coeffs", pressure=False):
    """Field of a source-sphere layer potential on a neighboring target sphere.

    out='coeffs' gives degree-p_eval coefficients in the target frame;
    out='values' gives samples on the target's own grid (orders beyond p folded).
    """
    res = near_eval_fft_batch(kind, dens, source.radius, target.radius, target.c - source.c,
                              p_eval, pressure)
    if out == "coeffs":
        return res
    g = target.grid
    kind = OperatorKind.parse(kind)
    if kind.is_stokes:
        if pressure and kind.family != "K":
            return _vec_values(res[0], g), sht_inverse(res[1], g)
        return _vec_values(res, g)
    return sht_inverse(res, g)


def _vec_values(c, g):
    return vsht_inverse(c, g)


def truncate(c, p):
    if isinstance(c, VectorCoeffs):
        return c.resize(p)
    return resize(c, p)
