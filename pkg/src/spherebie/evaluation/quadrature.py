"""Smooth (far-field) quadrature and the direct O(N^2) far backend."""
import numpy as np

from ..harmonics import VectorCoeffs, sht_inverse, spherical_to_cartesian, vsht_inverse
from ..spectra import OperatorKind
from . import kernels
from .geometry import TargetBatch


def density_samples(dens, sphere):
    """Grid samples of a density; vector densities come back Cartesian, (nlat, nlon, 3)."""
    g = sphere.grid
    if isinstance(dens, VectorCoeffs):
        th, ph = g.angles()
        F = spherical_to_cartesian(vsht_inverse(dens, g), th, ph)
        return np.moveaxis(F, 0, -1)
    return sht_inverse(dens, g)


def point_sources(sphere, samples):
    """Flattened (points, weights, values, normals) for a sphere's weighted nodes."""
    pts = sphere.points().reshape(-1, 3)
    w = sphere.weights().ravel()
    nrm = sphere.normals().reshape(-1, 3)
    vals = samples.reshape((pts.shape[0],) + samples.shape[2:])
    return pts, w, vals, nrm


def far_backend_direct(kind, points, weights, values, normals, targets, target_normals=None,
                       pressure=False, block=2_000_000):
    """Exact summation of weighted point sources.

    This is the interface a fast multipole code would satisfy: source points,
    quadrature weights, density values (scalar or Cartesian 3-vectors), source
    normals, target points and optional target normals. Laplace kinds return
    (nt,), Stokes kinds (3, nt), plus pressure (nt,) if requested. Targets are
    processed in chunks of about `block` source-target pairs.
    """
    kind = OperatorKind.parse(kind)
    targets = np.atleast_2d(targets)
    step = max(1, block // max(1, len(points)))
    parts = [_direct_chunk(kind, points, weights, values, normals, targets[lo:lo + step],
                           None if target_normals is None else target_normals[lo:lo + step], pressure)
             for lo in range(0, len(targets), step)]
    if len(parts) == 1:
        return parts[0]
    if isinstance(parts[0], tuple):
        return tuple(np.concatenate(z, axis=-1) for z in zip(*parts))
    return np.concatenate(parts, axis=-1)


def _direct_chunk(kind, points, weights, values, normals, targets, target_normals, pressure):
    fam = kind.family
    if kind.is_stokes:
        f = values * weights[:, None]
        if fam == "S":
            return kernels.sum_stokes_s(targets, points, f, pressure)
        if fam == "D":
            return kernels.sum_stokes_d(targets, points, f, normals, pressure)
        return kernels.sum_stokes_traction(targets, target_normals, points, f)
    q = values * weights
    if fam == "S":
        return kernels.sum_laplace_s(targets, points, q)
    if fam == "D":
        return kernels.sum_laplace_d(targets, points, q, normals)
    grad = kernels.sum_laplace_s_grad(targets, points, q)
    return np.einsum("it,ti->t", grad, target_normals)


def smooth_quadrature_eval(kind, sphere, dens, targets, pressure=False, backend=far_backend_direct):
    """Layer potential from one sphere by the grid quadrature rule (targets must be well separated)."""
    if not isinstance(targets, TargetBatch):
        targets = TargetBatch(targets)
    pts, w, vals, nrm = point_sources(sphere, density_samples(dens, sphere))
    return backend(kind, pts, w, vals, nrm, targets.points, targets.normals, pressure)
