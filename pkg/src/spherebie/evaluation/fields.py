"""Off-surface layer-potential fields from closed-form radial factors.

Everything here works in source-centered coordinates scaled to the unit sphere.
A "ring" is a set of targets at fixed (r, theta) and varying phi; along a ring
every output is sum_m F_m exp(i m phi), and ring_modes returns the F_m.
"""
import numpy as np

from ..harmonics import VectorCoeffs, degree_of, legendre_tables, unpack
from ..spectra import OperatorKind, radial_eval, radial_terms


def output_components(kind, pressure=False):
    kind = OperatorKind.parse(kind)
    if not kind.is_stokes:
        return 1
    if kind.family == "K":
        return 3
    return 4 if pressure else 3


class _Tables:
    """Legendre data at ring angles, expanded to signed m."""

    def __init__(self, nmax, theta, second=False):
        L = legendre_tables(nmax, theta)
        m = np.arange(-nmax, nmax + 1)
        am = np.abs(m)
        self.m = m
        self.P = L.P[:, :, am]
        self.dP = L.dP[:, :, am]
        self.mS = m * L.S[:, :, am]
        if second:
            self.d2P = L.d2P[:, :, am]
            self.dmS = m * L.dS[:, :, am]


def _sum(coef, table):
    return np.einsum("...jnm,jnm->...jm", coef, table)


def _radial(terms, n, r, deriv=0):
    return radial_eval(terms, n[None, :], r[:, None], deriv)[:, :, None]


def _laplace_modes(kind, c2, nmax, r, theta, nu):
    n = np.arange(nmax + 1, dtype=float)
    ext = bool(np.all(r >= 1))
    terms = radial_terms(kind, ext)["Y"]
    T = _Tables(nmax, theta)
    if kind.family != "K":
        return _sum(_radial(terms, n, r) * c2, T.P)[..., None, :]
    f = _radial(terms, n, r) * c2 / r[:, None, None]
    fp = _radial(terms, n, r, 1) * c2
    gr = _sum(fp, T.P)
    gt = _sum(f, T.dP)
    gp = 1j * _sum(f, T.mS)
    return (nu[:, 0, None] * gr + nu[:, 1, None] * gt + nu[:, 2, None] * gp)[..., None, :]


def _fgh(terms, dens, n, r, ext, deriv=0):
    v, w, x = dens
    gV = _radial(terms["V"], n, r, deriv)
    gW = _radial(terms["W"], n, r, deriv)
    gX = _radial(terms["X"], n, r, deriv)
    gC = _radial(terms["C"], n, r, deriv)
    if ext:
        return gV * v + gC * w, gW * w, gX * x
    return gV * v, gW * w + gC * v, gX * x


def _stokes_modes(kind, dens, nmax, r, theta, nu, pressure):
    n = np.arange(nmax + 1, dtype=float)
    nn = n[None, :, None]
    ext = bool(np.all(r >= 1))
    terms = radial_terms(OperatorKind.StokesS if kind.family == "K" else kind, ext)
    f, g, h = _fgh(terms, dens, n, r, ext)
    A = -(nn + 1) * f + nn * g
    B = f + g
    C = h
    if kind.family != "K":
        T = _Tables(nmax, theta)
        ur = _sum(A, T.P)
        ut = _sum(B, T.dP) - 1j * _sum(C, T.mS)
        up = 1j * _sum(B, T.mS) + _sum(C, T.dP)
        out = [ur, ut, up]
        if pressure:
            src = dens[1] if ext else dens[0]
            out.append(_sum(_radial(terms["q"], n, r) * src, T.P))
        return np.stack(out, axis=-2)

    # traction of the single layer with target normal nu (local spherical components)
    T = _Tables(nmax, theta, second=True)
    fp, gp, hp = _fgh(terms, dens, n, r, ext, deriv=1)
    Ap = -(nn + 1) * fp + nn * gp
    Bp = fp + gp
    Cp = hp
    rr = r[:, None, None]
    nl = nn * (nn + 1)
    Pi = _radial(terms["q"], n, r) * (dens[1] if ext else dens[0])
    e_rr = 2 * _sum(Ap, T.P)
    e_tt = 2 * (_sum(A / rr, T.P) + _sum(B / rr, T.d2P) - 1j * _sum(C / rr, T.dmS))
    e_pp = 2 * (_sum(A / rr, T.P) - _sum(B * nl / rr, T.P) - _sum(B / rr, T.d2P)
                + 1j * _sum(C / rr, T.dmS))
    e_tp = 2j * _sum(B / rr, T.dmS) + _sum(C / rr, 2 * T.d2P) + _sum(C * nl / rr, T.P)
    k1 = Bp + (A - B) / rr
    k2 = Cp - C / rr
    e_rt = _sum(k1, T.dP) - 1j * _sum(k2, T.mS)
    e_rp = 1j * _sum(k1, T.mS) + _sum(k2, T.dP)
    p = _sum(Pi, T.P)
    nr, nt, nph = (nu[:, k, None] for k in range(3))
    tr = (e_rr - p) * nr + e_rt * nt + e_rp * nph
    tt = e_rt * nr + (e_tt - p) * nt + e_tp * nph
    tp = e_rp * nr + e_tp * nt + (e_pp - p) * nph
    return np.stack([tr, tt, tp], axis=-2)


def ring_modes(kind, dens, r, theta, nu=None, pressure=False):
    """Fourier modes F[..., j, comp, m + nmax] of the field on rings (r_j, theta_j).

    dens: packed scalar coefficients (Laplace) or VectorCoeffs (Stokes); leading
    batch axes on the coefficients are carried through to the output.
    nu: (J, 3) target normals in local (r, theta, phi) components, required for K.
    All r must lie on one side of the unit sphere (r >= 1 means exterior).
    Stokes components are (r, theta, phi) [+ pressure].
    """
    kind = OperatorKind.parse(kind)
    r = np.atleast_1d(np.asarray(r, dtype=float))
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    if not (np.all(r >= 1) or np.all(r < 1)):
        raise ValueError("rings must all be exterior or all interior")
    if kind.family == "K":
        if nu is None:
            raise ValueError("normal-dependent kinds need target normals")
        nu = np.atleast_2d(np.asarray(nu, dtype=float))
    if kind.is_stokes:
        if not isinstance(dens, VectorCoeffs):
            raise TypeError("Stokes kinds need VectorCoeffs")
        nmax = dens.nmax
        d2 = tuple(unpack(c)[..., None, :, :] for c in (dens.v, dens.w, dens.x))
        return _stokes_modes(kind, d2, nmax, r, theta, nu, pressure)
    if isinstance(dens, VectorCoeffs):
        raise TypeError("Laplace kinds need scalar coefficients")
    dens = np.asarray(dens)
    nmax = degree_of(dens.shape[-1])
    return _laplace_modes(kind, unpack(dens)[..., None, :, :], nmax, r, theta, nu)
