"""Precomputed traction coupling tables and their application on rings.

For u = g(r) Z with Z one of V, W, X (degree n, order m) and pressure P(r) Y,
the traction with unit normal nu is

    g'(r) [(e_r . nu) Z + (Z . nu) e_r] + g(r)/r (grad Z + grad^T Z) nu - P(r) Y nu.

Each bracket is linear in nu. The tables hold the vector-harmonic expansion of
each bracket for three normal fields: e_r, sin(theta) e_theta, sin(theta) e_phi.
The tangential ones carry sin(theta) so that the products stay band-limited;
the caller divides nu_theta and nu_phi by sin(theta).
"""
from dataclasses import dataclass

import numpy as np

from ..harmonics import (VectorCoeffs, VectorCoeffsYGX, cartesian_to_spherical, get_grid, local_frame,
                         ncoeffs, nm_arrays, sht_forward, sht_inverse, spherical_to_cartesian,
                         vsht_forward, vsht_inverse, ygx_to_vwx)
from ..spectra import OperatorKind, radial_eval, radial_terms

NORMALS = ("r", "t", "p")
BRACKETS = ("radial", "shear", "pressure")


@dataclass
class TractionCouplingTables:
    """tables[(normal, bracket)]: source coefficients (degree p) -> target (degree p+1).

    Vector sources are VWX-stacked, length 3 (p+1)^2; the pressure bracket takes
    scalar coefficients of length (p+1)^2. Targets are VWX-stacked, 3 (p+2)^2.
    """
    p: int
    tables: dict

    def __getitem__(self, key):
        return self.tables[key]

    def band_violation(self):
        """Largest entry outside |n' - n| <= 1, m' = m (and outside n' = n for e_r)."""
        worst = 0.0
        n_s, m_s = nm_arrays(self.p)
        n_t, m_t = nm_arrays(self.p + 1)
        for (nrm, br), M in self.tables.items():
            ok = (m_t[:, None] == m_s[None, :])
            if nrm == "r":
                ok &= n_t[:, None] == n_s[None, :]
            else:
                ok &= np.abs(n_t[:, None] - n_s[None, :]) <= 1
            k = 3 if br != "pressure" else 1
            mask = np.tile(ok, (3, k))
            worst = max(worst, float(np.max(np.abs(M[~mask]), initial=0.0)))
        return worst


def _normal_fields(grid):
    th, ph = grid.angles()
    er, et, ep = local_frame(th, ph)
    s = np.sin(th)[..., None]
    return {"r": er, "t": et * s, "p": ep * s}


def _project(Fc, grid, nmax):
    """Cartesian samples (..., nlat, nlon, 3) -> VWX-stacked coefficients."""
    th, ph = grid.angles()
    sph = cartesian_to_spherical(np.moveaxis(Fc, -1, 0), th, ph)
    c = vsht_forward(np.moveaxis(sph, 0, -3), grid, nmax)
    return c.to_array()


def precompute_traction_coupling(p):
    if p < 1:
        raise ValueError("p must be >= 1")
    P1 = p + 1
    grid = get_grid(P1)
    th, ph = grid.angles()
    K = ncoeffs(p)
    eye = np.eye(K, dtype=complex)
    zero = np.zeros_like(eye)
    normals = _normal_fields(grid)
    er = normals["r"]
    out = {}
    # basis fields Z, one per column of the stacked VWX identity
    cols = []
    for ch in range(3):
        parts = [zero, zero, zero]
        parts[ch] = eye
        cols.append(VectorCoeffs(*parts).resize(P1))
    Zc = []
    Gr = []
    for c in cols:
        z = spherical_to_cartesian(np.moveaxis(vsht_inverse(c, grid), -3, 0), th, ph)  # (3, K, ..)
        z = np.moveaxis(z, 0, -1)  # (K, nlat, nlon, 3)
        # surface gradient of each Cartesian component: grad[..., i, j] = d_j Z_i
        a = sht_forward(np.moveaxis(z, -1, -3), grid, P1)  # (K, 3, n)
        gc = ygx_to_vwx(VectorCoeffsYGX(np.zeros_like(a), a, np.zeros_like(a)))
        gs = vsht_inverse(gc, grid)  # (K, 3comp_i, 3sph, nlat, nlon)
        gcart = spherical_to_cartesian(np.moveaxis(gs, -3, 0), th, ph)  # (3_j, K, 3_i, ...)
        Zc.append(z)
        Gr.append(np.moveaxis(np.moveaxis(gcart, 0, -1), 1, -2))  # (K, nlat, nlon, 3_i, 3_j)
    Z = np.concatenate(Zc)
    G = np.concatenate(Gr)
    Y = sht_inverse(np.eye(K, ncoeffs(P1)), grid)  # (K, nlat, nlon)
    for key, e in normals.items():
        ern = np.sum(er * e, axis=-1)
        zn = np.einsum("kabi,abi->kab", Z, e)
        rad = ern[..., None] * Z + zn[..., None] * er
        shear = np.einsum("kabij,abj->kabi", G, e) + np.einsum("kabji,abj->kabi", G, e)
        pres = Y[..., None] * e
        out[(key, "radial")] = _project(rad, grid, P1).T
        out[(key, "shear")] = _project(shear, grid, P1).T
        out[(key, "pressure")] = _project(pres, grid, P1).T
    return TractionCouplingTables(p, out)


_CACHE = {}


def coupling_tables(p):
    if p not in _CACHE:
        _CACHE[p] = precompute_traction_coupling(p)
    return _CACHE[p]


def _packed_radial(terms, nmax, r, deriv=0):
    n, _ = nm_arrays(nmax)
    return radial_eval(terms, n[None, :].astype(float), r[:, None], deriv)


def traction_coefficients(dens, r, nu, tables=None):
    """Coefficients (degree p+1, one row per ring) of the single-layer traction.

    dens: VectorCoeffs of degree p. r: ring radii (all on one side of the unit sphere).
    nu: (J, 3) normal components (nu_r, nu_theta/sin, nu_phi/sin) on each ring.
    """
    p = dens.nmax
    tables = coupling_tables(p) if tables is None else tables
    r = np.atleast_1d(np.asarray(r, dtype=float))
    ext = bool(np.all(r >= 1))
    terms = radial_terms(OperatorKind.StokesS, ext)
    v, w, x = dens.v, dens.w, dens.x
    rr = r[:, None]

    def fgh(deriv):
        gV, gW, gX, gC = (_packed_radial(terms[k], p, r, deriv) for k in ("V", "W", "X", "C"))
        if ext:
            return gV * v + gC * w, gW * w, gX * x
        return gV * v, gW * w + gC * v, gX * x

    rad = np.concatenate(fgh(1), axis=-1)
    shear = np.concatenate(fgh(0), axis=-1) / rr
    pres = _packed_radial(terms["q"], p, r) * (w if ext else v)
    nu = np.atleast_2d(nu)
    out = 0
    for k, key in enumerate(NORMALS):
        s = nu[:, k, None]
        if not np.any(s):
            continue
        out = out + s * (rad @ tables[(key, "radial")].T + shear @ tables[(key, "shear")].T
                         - pres @ tables[(key, "pressure")].T)
    return VectorCoeffs.from_array(out)
