"""Scalar and vector spherical harmonics on the Gauss-Legendre x equispaced grid.

Convention: Y_n^m(theta, phi) = Pt_n^{|m|}(cos theta) exp(i m phi) where Pt is the
fully normalized associated Legendre function including the (-1)^m phase of
scipy.special.lpmv. With this choice Y_n^{-m} = conj(Y_n^m).

Coefficients are stored packed, n-major, m from -n to n: index n*n + n + m.
Vector fields are sampled as (3, nlat, nlon) arrays of spherical components
(r, theta, phi).
"""
from dataclasses import dataclass
from functools import lru_cache
from math import isqrt

import numpy as np
from scipy.special import factorial, lpmv


# ---------------------------------------------------------------- indexing

def ncoeffs(nmax):
    return (nmax + 1) ** 2


def idx(n, m):
    return n * n + n + m


def degree_of(ncoef):
    nmax = isqrt(ncoef) - 1
    if (nmax + 1) ** 2 != ncoef:
        raise ValueError(f"{ncoef} is not a valid coefficient count")
    return nmax


@lru_cache(maxsize=None)
def nm_arrays(nmax):
    """Degree and order of every packed slot."""
    n = np.concatenate([np.full(2 * k + 1, k) for k in range(nmax + 1)])
    m = np.concatenate([np.arange(-k, k + 1) for k in range(nmax + 1)])
    n.setflags(write=False)
    m.setflags(write=False)
    return n, m


def unpack(c, nmax=None):
    """Packed -> dense (..., nmax+1, 2*nmax+1) with column m + nmax."""
    c = np.asarray(c)
    src = degree_of(c.shape[-1])
    nmax = src if nmax is None else nmax
    out = np.zeros(c.shape[:-1] + (nmax + 1, 2 * nmax + 1), dtype=complex)
    for n in range(min(src, nmax) + 1):
        out[..., n, nmax - n:nmax + n + 1] = c[..., n * n:(n + 1) ** 2]
    return out


def pack(c2):
    c2 = np.asarray(c2)
    nmax = c2.shape[-2] - 1
    w = (c2.shape[-1] - 1) // 2
    out = np.empty(c2.shape[:-2] + (ncoeffs(nmax),), dtype=complex)
    for n in range(nmax + 1):
        out[..., n * n:(n + 1) ** 2] = c2[..., n, w - n:w + n + 1]
    return out


def resize(c, nmax):
    """Truncate or zero-pad packed coefficients to degree nmax."""
    c = np.asarray(c)
    k = min(c.shape[-1], ncoeffs(nmax))
    out = np.zeros(c.shape[:-1] + (ncoeffs(nmax),), dtype=complex)
    out[..., :k] = c[..., :k]
    return out


def is_real_symmetric(c, tol=1e-12):
    """True when c describes a real field: c[n,-m] == conj(c[n,m])."""
    c = np.asarray(c)
    n, m = nm_arrays(degree_of(c.shape[-1]))
    mirror = n * n + n - m
    scale = max(1.0, np.abs(c).max(initial=0.0))
    return bool(np.all(np.abs(c[..., mirror] - np.conj(c)) <= tol * scale))


# ---------------------------------------------------------------- Legendre

@lru_cache(maxsize=None)
def _recurrence(nmax):
    n = np.arange(nmax + 1, dtype=float)[:, None]
    m = np.arange(nmax + 1, dtype=float)[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        a = np.sqrt((4 * n**2 - 1) / (n**2 - m**2))
        b = np.sqrt(((n - 1) ** 2 - m**2) / (4 * (n - 1) ** 2 - 1))
    lower = m < n
    a = np.where(lower, a, 0.0)
    b = np.where(lower & (m < n - 1), b, 0.0)
    seed = np.empty(nmax + 1)
    seed[0] = 1 / np.sqrt(4 * np.pi)
    for k in range(1, nmax + 1):
        seed[k] = -np.sqrt((2 * k + 1) / (2 * k)) * seed[k - 1]
    return a, b, seed


@dataclass(frozen=True)
class LegendreTables:
    """Normalized Legendre data at a set of polar angles.

    Arrays have shape (npts, nmax+1, nmax+1) indexed [point, n, m >= 0].
    S = P / sin(theta), dS = d/dtheta of S; both vanish for m = 0.
    """
    P: np.ndarray
    dP: np.ndarray
    d2P: np.ndarray
    S: np.ndarray
    dS: np.ndarray


def _family(nmax, x, s, derivs):
    a, b, seed = _recurrence(nmax)
    npts = x.size
    mm = np.arange(nmax + 1)
    sp = s[:, None] ** mm[None, :]
    P = np.zeros((npts, nmax + 1, nmax + 1))
    if derivs:
        S = np.zeros_like(P)
        T = np.zeros_like(P)
        V = np.zeros_like(P)
        Z = np.zeros_like(P)
        sm1 = s[:, None] ** np.maximum(mm - 1, 0)[None, :]
        sm2 = s[:, None] ** np.maximum(mm - 2, 0)[None, :]
    xc = x[:, None]
    for n in range(nmax + 1):
        P[:, n, n] = seed[n] * sp[:, n]
        if derivs:
            if n >= 1:
                S[:, n, n] = seed[n] * sm1[:, n]
            if n >= 2:
                T[:, n, n] = seed[n] * sm2[:, n]
        if n == 0:
            continue
        an, bn = a[n, :n], b[n, :n]

        def step(X):
            lo = X[:, n - 2, :n] if n >= 2 else 0.0
            return an * (xc * X[:, n - 1, :n] - bn * lo)

        P[:, n, :n] = step(P)
        if derivs:
            S[:, n, :n] = step(S)
            T[:, n, :n] = step(T)
            Vlo = V[:, n - 2, :n] if n >= 2 else 0.0
            Zlo = Z[:, n - 2, :n] if n >= 2 else 0.0
            Vn = an * (P[:, n - 1, :n] + xc * V[:, n - 1, :n] - bn * Vlo)
            Z[:, n, :n] = an * (2 * V[:, n - 1, :n] + xc * Z[:, n - 1, :n] - bn * Zlo)
            V[:, n, :n] = Vn
    if not derivs:
        return P, None
    return P, (S, T, V, Z)


def legendre_tables(nmax, theta, derivs=True):
    """Pole-safe normalized Legendre values and theta-derivatives.

    Writing P = sin^m(theta) Q(cos theta), the factors S = P/sin, P/sin^2 and
    sin^m Q', sin^m Q'' obey the same recurrence as P, so nothing is divided
    by sin(theta) and the poles are handled exactly.
    """
    theta = np.atleast_1d(np.asarray(theta, dtype=float)).ravel()
    x, s = np.cos(theta), np.sin(theta)
    P, extra = _family(nmax, x, s, derivs)
    if not derivs:
        return LegendreTables(P, None, None, None, None)
    S, T, V, Z = extra
    m = np.arange(nmax + 1)[None, None, :]
    c = x[:, None, None]
    sn = s[:, None, None]
    dP = m * c * S - sn * V
    d2P = -m * sn * S + m * (m - 1) * c**2 * T - (2 * m + 1) * c * V + sn**2 * Z
    dS = np.where(m > 0, (m - 1) * c * T - V, 0.0)
    S = np.where(m > 0, S, 0.0)
    return LegendreTables(P, dP, d2P, S, dS)


def legendre_p(nmax, x):
    """Normalized Pt_n^m(x) for all n <= nmax, m >= 0; shape (npts, n, m)."""
    x = np.atleast_1d(np.asarray(x, dtype=float)).ravel()
    P, _ = _family(nmax, x, np.sqrt(np.clip(1 - x * x, 0, None)), False)
    return P


def assoc_legendre(n, m, x, normalized=False):
    """Associated Legendre function P_n^m(x), Condon-Shortley phase included.

    The unnormalized value is only offered up to n = 32; beyond that it
    overflows for large m and the normalized variant should be used.
    """
    x = np.asarray(x, dtype=float)
    if not (0 <= m <= n) or np.any(np.abs(x) > 1):
        raise ValueError("need 0 <= m <= n and |x| <= 1")
    if normalized:
        return legendre_p(n, x)[:, n, m].reshape(x.shape)
    if n > 32:
        raise ValueError("unnormalized Legendre values limited to n <= 32")
    return lpmv(m, n, x)


def norm_factor(n, m):
    m = abs(m)
    return np.sqrt((2 * n + 1) / (4 * np.pi) * factorial(n - m) / factorial(n + m))


def ynm_eval(n, m, theta, phi):
    if abs(m) > n:
        raise ValueError("|m| must not exceed n")
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    P = legendre_p(n, np.cos(theta))[:, n, abs(m)].reshape(theta.shape)
    return P * np.exp(1j * m * phi)


# ---------------------------------------------------------------- grid

class SphGrid:
    """(p+1) Gauss-Legendre polar nodes by (2p+2) equispaced longitudes.

    theta increases with the row index. `weights` are the per-node area
    weights of the unit sphere, 2 pi lambda_j / (2p+2).
    """

    def __init__(self, p):
        if p < 1:
            raise ValueError("p must be >= 1")
        self.p = int(p)
        t, lam = np.polynomial.legendre.leggauss(self.p + 1)
        self.t = t[::-1].copy()
        self.lam = lam[::-1].copy()
        self.theta = np.arccos(self.t)
        self.nlat = self.p + 1
        self.nlon = 2 * self.p + 2
        self.phi = 2 * np.pi * np.arange(self.nlon) / self.nlon
        self.sin = np.sin(self.theta)
        self.weights = 2 * np.pi * self.lam / self.nlon
        for arr in (self.t, self.lam, self.theta, self.phi, self.sin, self.weights):
            arr.setflags(write=False)
        self._tables = {}

    @property
    def shape(self):
        return (self.nlat, self.nlon)

    def __repr__(self):
        return f"SphGrid(p={self.p})"

    def legendre(self, nmax):
        if nmax not in self._tables:
            P = legendre_p(nmax, self.t)
            P.setflags(write=False)
            self._tables[nmax] = P
        return self._tables[nmax]

    def angles(self):
        """Meshgrid of (theta, phi), each (nlat, nlon)."""
        return np.meshgrid(self.theta, self.phi, indexing="ij")

    def unit_points(self):
        th, ph = self.angles()
        st = np.sin(th)
        return np.stack([st * np.cos(ph), st * np.sin(ph), np.cos(th)], axis=-1)

    def area_weights(self):
        """Unit-sphere quadrature weights broadcast to (nlat, nlon)."""
        return np.broadcast_to(self.weights[:, None], self.shape)

    def integrate(self, f, radius=1.0):
        return np.sum(f * self.weights[:, None], axis=(-2, -1)) * radius**2


@lru_cache(maxsize=64)
def get_grid(p):
    return SphGrid(p)


def local_frame(theta, phi):
    """Unit vectors (e_r, e_theta, e_phi), each with trailing axis of size 3."""
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    st, ct, sp, cp = np.sin(theta), np.cos(theta), np.sin(phi), np.cos(phi)
    er = np.stack([st * cp, st * sp, ct], axis=-1)
    et = np.stack([ct * cp, ct * sp, -st], axis=-1)
    ep = np.stack([-sp, cp, np.zeros_like(st)], axis=-1)
    return er, et, ep


def spherical_to_cartesian(F, theta, phi):
    """(3, ...) spherical components -> (3, ...) Cartesian components."""
    er, et, ep = local_frame(theta, phi)
    out = F[0][..., None] * er + F[1][..., None] * et + F[2][..., None] * ep
    return np.moveaxis(out, -1, 0)


def cartesian_to_spherical(F, theta, phi):
    er, et, ep = local_frame(theta, phi)
    Fc = np.moveaxis(np.asarray(F), 0, -1)
    return np.stack([np.sum(Fc * e, axis=-1) for e in (er, et, ep)])


def cart_to_sph(points):
    """Cartesian points (..., 3) -> (r, theta, phi)."""
    points = np.asarray(points, dtype=float)
    r = np.linalg.norm(points, axis=-1)
    with np.errstate(invalid="ignore", divide="ignore"):
        theta = np.arccos(np.clip(np.where(r > 0, points[..., 2] / r, 1.0), -1, 1))
    phi = np.mod(np.arctan2(points[..., 1], points[..., 0]), 2 * np.pi)
    return r, theta, phi


# ---------------------------------------------------------------- scalar transforms

def _parity_blocks(grid, nmax):
    """Per order m: Legendre rows on the northern half split by the parity of n - m.

    P~_n^m(-x) = (-1)^(n-m) P~_n^m(x) and the Gauss nodes are symmetric, so
    each order needs two half-size products instead of one full one.
    """
    key = ("parity", nmax)
    if key not in grid._tables:
        P = grid.legendre(nmax)
        h = grid.nlat // 2
        rows_e = np.arange(h + grid.nlat % 2)
        blocks = []
        for m in range(nmax + 1):
            n = np.arange(m, nmax + 1)
            ne, no = n[(n - m) % 2 == 0], n[(n - m) % 2 == 1]
            Ae = np.ascontiguousarray(P[rows_e][:, ne, m])
            Ao = np.ascontiguousarray(P[:h][:, no, m])
            blocks.append((ne, Ae, no, Ao))
        grid._tables[key] = blocks
    return grid._tables[key]


def _rview(z):
    """Complex (k, b) -> real (k, 2b) sharing memory; real matrices act on rows."""
    return np.ascontiguousarray(z).view(float)


def _analysis(grid, Fm, nmax, mcut):
    """Fm: (nlat, nlon, B) weighted Fourier data -> (nmax+1, 2nmax+1, B) coefficients."""
    B = Fm.shape[-1]
    h = grid.nlat // 2
    out = np.zeros((nmax + 1, 2 * nmax + 1, B), dtype=complex)
    north = Fm[:h]
    south = Fm[grid.nlat - 1:grid.nlat - 1 - h:-1] if h else Fm[:0]
    S = north + south
    D = north - south
    if grid.nlat % 2:
        S = np.concatenate([S, Fm[h:h + 1]])
    blocks = _parity_blocks(grid, nmax)
    nl = grid.nlon
    for m in range(mcut + 1):
        ne, Ae, no, Ao = blocks[m]
        cols = [m] if m == 0 else [m, nl - m]
        mcol = [nmax + m] if m == 0 else [nmax + m, nmax - m]
        k = len(cols)
        if len(ne):
            r = (Ae.T @ _rview(S[:, cols].reshape(len(S), k * B))).view(complex)
            out[ne[:, None], mcol] = r.reshape(len(ne), k, B)
        if len(no):
            r = (Ao.T @ _rview(D[:, cols].reshape(h, k * B))).view(complex)
            out[no[:, None], mcol] = r.reshape(len(no), k, B)
    return out


def _synthesis(grid, c2, nmax):
    """c2: (nmax+1, 2nmax+1, B) -> Fourier data (nlat, nlon, B), orders folded."""
    B = c2.shape[-1]
    h = grid.nlat // 2
    he = h + grid.nlat % 2
    nl = grid.nlon
    out = np.zeros((grid.nlat, nl, B), dtype=complex)
    blocks = _parity_blocks(grid, nmax)
    for m in range(nmax + 1):
        ne, Ae, no, Ao = blocks[m]
        mcol = [nmax + m] if m == 0 else [nmax + m, nmax - m]
        k = len(mcol)
        E = (Ae @ _rview(c2[ne][:, mcol].reshape(len(ne), k * B))).view(complex).reshape(he, k, B)
        if len(no):
            O = (Ao @ _rview(c2[no][:, mcol].reshape(len(no), k * B))).view(complex).reshape(h, k, B)
        else:
            O = np.zeros((h, k, B), dtype=complex)
        cols = [m % nl] if m == 0 else [m % nl, (-m) % nl]
        for i, col in enumerate(cols):
            out[:h, col] += E[:h, i] + O[:, i]
            if h:
                out[grid.nlat - 1:grid.nlat - 1 - h:-1, col] += E[:h, i] - O[:, i]
            if grid.nlat % 2:
                out[h, col] += E[h, i]
    return out


def sht_forward(f, grid, nmax=None):
    """Grid samples (..., nlat, nlon) -> packed coefficients to degree nmax.

    Orders |m| > p cannot be resolved by 2p+2 longitudes and are returned as 0.
    """
    f = np.asarray(f)
    if f.shape[-2:] != grid.shape:
        raise ValueError(f"samples have shape {f.shape[-2:]}, grid wants {grid.shape}")
    nmax = grid.p if nmax is None else nmax
    lead = f.shape[:-2]
    F = np.fft.fft(f.reshape((-1,) + grid.shape), axis=-1) * (2 * np.pi / grid.nlon)
    F = np.moveaxis(F, 0, -1) * grid.lam[:, None, None]
    c2 = _analysis(grid, F, nmax, min(nmax, grid.p))
    return pack(np.moveaxis(c2, -1, 0).reshape(lead + c2.shape[:2]))


def sht_inverse(c, grid):
    """Packed coefficients (..., ncoef) -> grid samples (..., nlat, nlon).

    Orders beyond the Nyquist limit are folded, which is exact for sampling.
    """
    c = np.asarray(c)
    nmax = degree_of(c.shape[-1])
    lead = c.shape[:-1]
    c2 = np.moveaxis(unpack(c.reshape((-1, c.shape[-1])).astype(complex)), 0, -1)
    out = _synthesis(grid, c2, nmax)
    out = np.fft.ifft(np.moveaxis(out, -1, 0), axis=-1) * grid.nlon
    return out.reshape(lead + grid.shape)


def sht_eval(c, theta, phi, chunk=2048):
    """Direct summation of a scalar expansion at arbitrary angles."""
    c = np.asarray(c)
    nmax = degree_of(c.shape[-1])
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    shape = np.broadcast(theta, phi).shape
    th = np.broadcast_to(theta, shape).ravel()
    ph = np.broadcast_to(phi, shape).ravel()
    n, m = nm_arrays(nmax)
    out = np.empty(c.shape[:-1] + (th.size,), dtype=complex)
    for lo in range(0, th.size, chunk):
        sl = slice(lo, lo + chunk)
        P = legendre_p(nmax, np.cos(th[sl]))[:, n, np.abs(m)]
        basis = P * np.exp(1j * ph[sl, None] * m[None, :])
        out[..., sl] = c @ basis.T
    return out.reshape(c.shape[:-1] + shape)


# ---------------------------------------------------------------- vector harmonics

@lru_cache(maxsize=None)
def alpha_beta(nmax):
    """alpha_n^m, beta_n^m on the packed index, with

    sin(theta) d/dtheta Y_n^m = alpha_n^m Y_{n+1}^m - beta_n^m Y_{n-1}^m.
    """
    n, m = nm_arrays(nmax)
    n = n.astype(float)
    al = np.sqrt(n**2 * ((n + 1) ** 2 - m**2) / ((2 * n + 1) * (2 * n + 3)))
    be = np.sqrt(np.clip((n + 1) ** 2 * (n**2 - m**2) / ((2 * n + 1) * (2 * n - 1)), 0, None))
    al.setflags(write=False)
    be.setflags(write=False)
    return al, be


@dataclass
class VectorCoeffs:
    """Coefficients in the {V, W, X} basis, each channel packed."""
    v: np.ndarray
    w: np.ndarray
    x: np.ndarray

    def __post_init__(self):
        self.v = np.asarray(self.v, dtype=complex)
        self.w = np.asarray(self.w, dtype=complex)
        self.x = np.asarray(self.x, dtype=complex)

    @classmethod
    def zeros(cls, nmax):
        z = np.zeros(ncoeffs(nmax), dtype=complex)
        return cls(z, z.copy(), z.copy())

    @classmethod
    def from_array(cls, a):
        a = np.asarray(a)
        k = a.shape[-1] // 3
        return cls(a[..., :k], a[..., k:2 * k], a[..., 2 * k:])

    @property
    def nmax(self):
        return degree_of(self.v.shape[-1])

    def to_array(self):
        return np.concatenate([self.v, self.w, self.x], axis=-1)

    def resize(self, nmax):
        return type(self)(resize(self.v, nmax), resize(self.w, nmax), resize(self.x, nmax))

    def copy(self):
        return type(self)(self.v.copy(), self.w.copy(), self.x.copy())

    def __add__(self, o):
        return type(self)(self.v + o.v, self.w + o.w, self.x + o.x)

    def __sub__(self, o):
        return type(self)(self.v - o.v, self.w - o.w, self.x - o.x)

    def __mul__(self, s):
        return type(self)(self.v * s, self.w * s, self.x * s)

    __rmul__ = __mul__

    def norm(self):
        return float(np.linalg.norm(self.to_array()))


class VectorCoeffsYGX(VectorCoeffs):
    """Same storage, channels read as (y, g, x): F = y Y e_r + g grad Y + x X."""

    @property
    def y(self):
        return self.v

    @property
    def g(self):
        return self.w


def vwx_to_ygx(c):
    n, _ = nm_arrays(c.nmax)
    y = -(n + 1) * c.v + n * c.w
    g = np.where(n > 0, c.v + c.w, 0.0)
    x = np.where(n > 0, c.x, 0.0)
    return VectorCoeffsYGX(y, g, x)


def ygx_to_vwx(c):
    n, _ = nm_arrays(c.nmax)
    v = (n * c.g - c.y) / (2 * n + 1)
    w = np.where(n > 0, ((n + 1) * c.g + c.y) / (2 * n + 1), 0.0)
    x = np.where(n > 0, c.x, 0.0)
    return VectorCoeffs(v, w, x)


def convert_vwx_ygx(c, direction=None):
    """Convert between bases; direction is 'vwx->ygx' or 'ygx->vwx' (inferred if None)."""
    if direction is None:
        direction = "ygx->vwx" if isinstance(c, VectorCoeffsYGX) else "vwx->ygx"
    if direction == "vwx->ygx":
        return vwx_to_ygx(c)
    if direction == "ygx->vwx":
        return ygx_to_vwx(c)
    raise ValueError(f"unknown direction {direction!r}")


def _shift_sinth(c, nmax):
    """Coefficients of sin(theta) d/dtheta f, f given to degree nmax; result degree nmax+1."""
    al, be = alpha_beta(nmax)
    n, m = nm_arrays(nmax)
    out = np.zeros(c.shape[:-1] + (ncoeffs(nmax + 1),), dtype=complex)
    up = (n + 1) ** 2 + (n + 1) + m
    out[..., up] += al * c
    keep = np.abs(m) <= n - 1
    down = (n - 1) ** 2 + (n - 1) + m
    out[..., down[keep]] -= (be * c)[..., keep]
    return out


def _adjoint_sinth(A, nmax):
    """Given A to degree nmax+1, return alpha_n A_{n+1} - beta_n A_{n-1} for n <= nmax."""
    al, be = alpha_beta(nmax)
    n, m = nm_arrays(nmax)
    up = (n + 1) ** 2 + (n + 1) + m
    out = al * A[..., up]
    keep = np.abs(m) <= n - 1
    down = (n - 1) ** 2 + (n - 1) + m
    out = out.astype(complex)
    out[..., keep] -= be[keep] * A[..., down[keep]]
    return out


def vsht_forward(F, grid, nmax=None):
    """Spherical-component samples (3, nlat, nlon) -> VectorCoeffs (V, W, X)."""
    F = np.asarray(F)
    if F.shape[-3:] != (3,) + grid.shape:
        raise ValueError(f"vector samples must have shape (3, {grid.nlat}, {grid.nlon})")
    nmax = grid.p if nmax is None else nmax
    s = grid.sin[:, None]
    y = sht_forward(F[..., 0, :, :], grid, nmax)
    AB = sht_forward(F[..., 1:, :, :] / s, grid, nmax + 1)
    A, B = AB[..., 0, :], AB[..., 1, :]
    n, m = nm_arrays(nmax)
    nn1 = np.where(n > 0, n * (n + 1), 1.0)
    base = n * n + n + m
    g = (_adjoint_sinth(A, nmax) - 1j * m * B[..., base]) / nn1
    x = (1j * m * A[..., base] + _adjoint_sinth(B, nmax)) / nn1
    g = np.where(n > 0, g, 0.0)
    x = np.where(n > 0, x, 0.0)
    return ygx_to_vwx(VectorCoeffsYGX(y, g, x))


def _tangential_sin(c):
    """Coefficients of sin*f_theta and sin*f_phi to degree nmax+1."""
    nmax = c.nmax
    _, m = nm_arrays(nmax)
    a = _shift_sinth(c.g, nmax)
    b = _shift_sinth(c.x, nmax)
    k = ncoeffs(nmax)
    a[..., :k] -= 1j * m * c.x
    b[..., :k] += 1j * m * c.g
    return a, b


def vsht_inverse(c, grid):
    """VectorCoeffs -> spherical-component samples (3, nlat, nlon) on grid."""
    yc = vwx_to_ygx(c)
    fr = sht_inverse(yc.y, grid)
    a, b = _tangential_sin(yc)
    ft = sht_inverse(np.stack([a, b], axis=-2), grid) / grid.sin[:, None]
    return np.concatenate([fr[..., None, :, :], ft], axis=-3)


def vsh_eval(c, theta, phi, chunk=1024):
    """Direct summation of a vector expansion at arbitrary angles -> (3, ...)."""
    yc = vwx_to_ygx(c)
    nmax = c.nmax
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    shape = np.broadcast(theta, phi).shape
    th = np.broadcast_to(theta, shape).ravel()
    ph = np.broadcast_to(phi, shape).ravel()
    n, m = nm_arrays(nmax)
    am = np.abs(m)
    out = np.empty((3, th.size), dtype=complex)
    for lo in range(0, th.size, chunk):
        sl = slice(lo, lo + chunk)
        L = legendre_tables(nmax, th[sl])
        e = np.exp(1j * ph[sl, None] * m[None, :])
        P = L.P[:, n, am] * e
        dP = L.dP[:, n, am] * e
        mS = (m * L.S[:, n, am]) * e
        out[0, sl] = P @ yc.y
        out[1, sl] = dP @ yc.g - 1j * (mS @ yc.x)
        out[2, sl] = 1j * (mS @ yc.g) + dP @ yc.x
    return out.reshape((3,) + shape)


def eval_vector_harmonic(basis, n, m, theta, phi):
    """V, W or X harmonic of degree n, order m in spherical components (3, ...)."""
    if abs(m) > n:
        raise ValueError("|m| must not exceed n")
    if basis.lower() not in ("v", "w", "x"):
        raise ValueError(f"unknown basis {basis!r}")
    c = VectorCoeffs.zeros(n)
    getattr(c, basis.lower())[idx(n, m)] = 1.0
    return vsh_eval(c, theta, phi)
