"""Free-space Laplace and Stokes kernels (viscosity 1). Points broadcast over leading axes."""
import numpy as np


def _diff(x, y):
    r = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
    d = np.linalg.norm(r, axis=-1)
    if np.any(d == 0):
        raise ZeroDivisionError("coincident source and target")
    return r, d


def kernel_laplace(x, y):
    _, d = _diff(x, y)
    return 1 / (4 * np.pi * d)


def kernel_laplace_dn(x, y, n_y):
    """Normal derivative in the source variable, d/dn_y G(x, y)."""
    r, d = _diff(x, y)
    return np.sum(r * n_y, axis=-1) / (4 * np.pi * d**3)


def kernel_laplace_flux(x, y, n_x):
    """n_x . grad_x G(x, y)."""
    r, d = _diff(x, y)
    return -np.sum(r * n_x, axis=-1) / (4 * np.pi * d**3)


def kernel_stokeslet(x, y):
    r, d = _diff(x, y)
    eye = np.eye(3)
    return (eye / d[..., None, None] + r[..., :, None] * r[..., None, :] / d[..., None, None] ** 3) / (8 * np.pi)


def kernel_stresslet(x, y):
    """T_ijk = -3/(4 pi) r_i r_j r_k / |r|^5 with r = x - y."""
    r, d = _diff(x, y)
    return -3 / (4 * np.pi) * np.einsum("...i,...j,...k->...ijk", r, r, r) / d[..., None, None, None] ** 5


def stokeslet_pressure(x, y):
    """Pressure vector P_j: p = P_j f_j for a point force f at y."""
    r, d = _diff(x, y)
    return r / (4 * np.pi * d[..., None] ** 3)


def stresslet_pressure(x, y):
    """Pressure tensor Q_jk: p = Q_jk mu_j n_k for the double layer."""
    r, d = _diff(x, y)
    eye = np.eye(3)
    dd = d[..., None, None]
    return (-eye / dd**3 + 3 * r[..., :, None] * r[..., None, :] / dd**5) / (2 * np.pi)


def rotlet(x, c, t):
    """Velocity of a point torque t at c: t x (x - c) / (8 pi |x - c|^3)."""
    r, d = _diff(x, c)
    return np.cross(t, r) / (8 * np.pi * d[..., None] ** 3)


# ---------------------------------------------------------------- batched sums

def _pairs(targets, sources):
    r = targets[:, None, :] - sources[None, :, :]
    d2 = np.einsum("tsi,tsi->ts", r, r)
    if np.any(d2 == 0):
        raise ZeroDivisionError("coincident source and target")
    return r, d2


def sum_laplace_s(targets, sources, q):
    """sum_s q_s G(t, s); q may carry leading batch axes (..., ns)."""
    _, d2 = _pairs(targets, sources)
    return q @ (1 / np.sqrt(d2)).T / (4 * np.pi)


def sum_laplace_d(targets, sources, q, normals):
    r, d2 = _pairs(targets, sources)
    k = np.einsum("tsi,si->ts", r, normals) / d2**1.5
    return q @ k.T / (4 * np.pi)


def sum_laplace_s_grad(targets, sources, q):
    """Gradient of the single layer at targets, shape (3, nt)."""
    r, d2 = _pairs(targets, sources)
    w = q[None, :] / d2**1.5
    return -np.einsum("ts,tsi->it", w, r) / (4 * np.pi)


def sum_stokes_s(targets, sources, f, pressure=False):
    """Stokeslet sum; f is (ns, 3). Returns velocity (3, nt) [and pressure (nt,)]."""
    r, d2 = _pairs(targets, sources)
    inv = 1 / np.sqrt(d2)
    rf = np.einsum("tsi,si->ts", r, f)
    u = (np.einsum("ts,si->it", inv, f) + np.einsum("ts,tsi->it", rf * inv**3, r)) / (8 * np.pi)
    if not pressure:
        return u
    return u, np.sum(rf * inv**3, axis=1) / (4 * np.pi)


def sum_stokes_d(targets, sources, mu, normals, pressure=False):
    """Double-layer sum with density mu (ns, 3) and source normals (ns, 3).

    Uses T(y, x) = -T(x, y) so that the jump across the surface is +mu.
    """
    r, d2 = _pairs(targets, sources)
    inv2 = 1 / d2
    rm = np.einsum("tsi,si->ts", r, mu)
    rn = np.einsum("tsi,si->ts", r, normals)
    w = rm * rn * inv2**2.5
    u = 3 / (4 * np.pi) * np.einsum("ts,tsi->it", w, r)
    if not pressure:
        return u
    mn = np.sum(mu * normals, axis=1)
    p = np.sum(-mn[None, :] * inv2**1.5 + 3 * w, axis=1) / (2 * np.pi)
    return u, p


def sum_stokes_traction(targets, tnormals, sources, f):
    """Traction of the Stokeslet sum at targets with normals tnormals (nt, 3)."""
    r, d2 = _pairs(targets, sources)
    rf = np.einsum("tsi,si->ts", r, f)
    rn = np.einsum("tsi,ti->ts", r, tnormals)
    return -3 / (4 * np.pi) * np.einsum("ts,tsi->it", rf * rn / d2**2.5, r)
