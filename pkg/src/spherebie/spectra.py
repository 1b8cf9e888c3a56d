"""Closed-form spectra and radial evaluation coefficients on the unit sphere.

A density of degree n in channel V, W or X (Stokes) or Y (Laplace) produces, at
radius r, a field of the same degree and order whose coefficients are the
functions below. Exterior branches hold for r >= 1, interior for r <= 1.
Stokes pressures are physical pressures p = q(r) Y_n^m. Traction ("K") is the
single-layer traction on the sphere of radius r with normal e_r.
"""
import enum
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .harmonics import VectorCoeffs, degree_of, nm_arrays


class OperatorKind(enum.Enum):
    LaplaceS = "LaplaceS"
    LaplaceDplus = "LaplaceDplus"
    LaplaceDminus = "LaplaceDminus"
    LaplaceKplus = "LaplaceKplus"
    LaplaceKminus = "LaplaceKminus"
    StokesS = "StokesS"
    StokesDplus = "StokesDplus"
    StokesDminus = "StokesDminus"
    StokesKplus = "StokesKplus"
    StokesKminus = "StokesKminus"

    @property
    def is_stokes(self):
        return self.value.startswith("Stokes")

    @property
    def family(self):
        """'S', 'D' or 'K'."""
        return self.value.removeprefix("Laplace").removeprefix("Stokes")[0]

    @property
    def default_side(self):
        if self.value.endswith("plus"):
            return "exterior"
        if self.value.endswith("minus"):
            return "interior"
        return None

    @classmethod
    def parse(cls, k):
        return k if isinstance(k, cls) else cls(k)


LAPLACE = [k for k in OperatorKind if not k.is_stokes]
STOKES = [k for k in OperatorKind if k.is_stokes]


def _side(kind, r, side):
    if side is not None:
        if side in ("exterior", "ext", "+", 1):
            return True
        if side in ("interior", "int", "-", -1):
            return False
        raise ValueError(f"unknown side {side!r}")
    r = np.asarray(r, dtype=float)
    if np.all(r > 1):
        return True
    if np.all(r < 1):
        return False
    default = kind.default_side
    if default == "exterior" and np.all(r >= 1):
        return True
    if default == "interior" and np.all(r <= 1):
        return False
    if default is None and kind.family == "S" and (np.all(r >= 1) or np.all(r <= 1)):
        return bool(np.all(r >= 1))
    raise ValueError(f"{kind.value} at r=1 needs an explicit side")


# ---------------------------------------------------------------- Laplace

def laplace_radial(kind, n, r, side=None):
    """Coefficient of Y_n^m at radius r produced by a unit Y_n^m density.

    For the K family this is d/dr of the single layer.
    """
    kind = OperatorKind.parse(kind)
    if kind.is_stokes:
        raise ValueError("laplace_radial needs a Laplace kind")
    ext = _side(kind, r, side)
    return radial_eval(radial_terms(kind, ext)["Y"], n, r, 1 if kind.family == "K" else 0)


# ---------------------------------------------------------------- Stokes

@dataclass
class StokesRadialCoeffs:
    """Per-channel radial factors at (n, r).

    gCross maps a V source to W in the interior and a W source to V in the
    exterior. q is the pressure factor of the channel that has one.
    """
    gV: np.ndarray
    gW: np.ndarray
    gX: np.ndarray
    gCross: np.ndarray
    q: np.ndarray
    exterior: bool


# Power-term tables: channel -> [(coef(n), exponent(n)), ...]; value = sum c r**e.
# 'C' is the cross channel, 'q' the pressure.
_TERMS = {
    ("S", True): {
        "V": [(lambda n: n / ((2 * n + 1) * (2 * n + 3)), lambda n: -n - 2)],
        "W": [(lambda n: (n + 1) / ((2 * n + 1) * (2 * n - 1)), lambda n: -n)],
        "X": [(lambda n: 1 / (2 * n + 1), lambda n: -n - 1)],
        "C": [(lambda n: n / (4 * n + 2), lambda n: -n - 2),
              (lambda n: -n / (4 * n + 2), lambda n: -n)],
        "q": [(lambda n: n, lambda n: -n - 1)],
    },
    ("S", False): {
        "V": [(lambda n: n / ((2 * n + 1) * (2 * n + 3)), lambda n: n + 1)],
        "W": [(lambda n: (n + 1) / ((2 * n + 1) * (2 * n - 1)), lambda n: n - 1)],
        "X": [(lambda n: 1 / (2 * n + 1), lambda n: n)],
        "C": [(lambda n: (n + 1) / (4 * n + 2), lambda n: n + 1),
              (lambda n: -(n + 1) / (4 * n + 2), lambda n: n - 1)],
        "q": [(lambda n: n + 1, lambda n: n)],
    },
    ("D", True): {
        "V": [(lambda n: (2 * n * n + 4 * n + 3) / ((2 * n + 1) * (2 * n + 3)), lambda n: -n - 2)],
        "W": [(lambda n: 2 * (n + 1) * (n - 1) / ((2 * n + 1) * (2 * n - 1)), lambda n: -n)],
        "X": [(lambda n: (n - 1) / (2 * n + 1), lambda n: -n - 1)],
        "C": [(lambda n: 2 * n * (n - 1) / (4 * n + 2), lambda n: -n - 2),
              (lambda n: -2 * n * (n - 1) / (4 * n + 2), lambda n: -n)],
        "q": [(lambda n: 2 * n * (n - 1), lambda n: -n - 1)],
    },
    ("D", False): {
        "V": [(lambda n: -2 * n * (n + 2) / ((2 * n + 1) * (2 * n + 3)), lambda n: n + 1)],
        "W": [(lambda n: -(2 * n * n + 1) / ((2 * n + 1) * (2 * n - 1)), lambda n: n - 1)],
        "X": [(lambda n: -(n + 2) / (2 * n + 1), lambda n: n)],
        "C": [(lambda n: (n + 1) * (n + 2) / (2 * n + 1), lambda n: n - 1),
              (lambda n: -(n + 1) * (n + 2) / (2 * n + 1), lambda n: n + 1)],
        "q": [(lambda n: -2 * (n + 1) * (n + 2), lambda n: n)],
    },
    ("K", True): {
        "V": [(lambda n: -2 * n * (n + 2) / ((2 * n + 1) * (2 * n + 3)), lambda n: -n - 3)],
        "W": [(lambda n: -(2 * n * n + 1) / ((2 * n + 1) * (2 * n - 1)), lambda n: -n - 1)],
        "X": [(lambda n: -(n + 2) / (2 * n + 1), lambda n: -n - 2)],
        "C": [(lambda n: n * (n + 2) / (2 * n + 1), lambda n: -n - 1),
              (lambda n: -n * (n + 2) / (2 * n + 1), lambda n: -n - 3)],
        "q": [],
    },
    ("K", False): {
        "V": [(lambda n: (2 * n * n + 4 * n + 3) / ((2 * n + 1) * (2 * n + 3)), lambda n: n)],
        "W": [(lambda n: 2 * (n + 1) * (n - 1) / ((2 * n + 1) * (2 * n - 1)), lambda n: n - 2)],
        "X": [(lambda n: (n - 1) / (2 * n + 1), lambda n: n - 1)],
        "C": [(lambda n: (n - 1) * (n + 1) / (2 * n + 1), lambda n: n),
              (lambda n: -(n - 1) * (n + 1) / (2 * n + 1), lambda n: n - 2)],
        "q": [],
    },
    ("LS", True): {"Y": [(lambda n: 1 / (2 * n + 1), lambda n: -n - 1)]},
    ("LS", False): {"Y": [(lambda n: 1 / (2 * n + 1), lambda n: n)]},
    ("LD", True): {"Y": [(lambda n: n / (2 * n + 1), lambda n: -n - 1)]},
    ("LD", False): {"Y": [(lambda n: -(n + 1) / (2 * n + 1), lambda n: n)]},
}


def radial_eval(terms, n, r, deriv=0):
    """Evaluate sum c(n) r**e(n) or its deriv-th r-derivative; broadcasts n against r."""
    n = np.asarray(n, dtype=float)
    r = np.asarray(r, dtype=float)
    out = np.zeros(np.broadcast(n, r).shape)
    for cf, ef in terms:
        c, e = cf(n), ef(n)
        fall = np.ones_like(e)
        for j in range(deriv):
            fall = fall * (e - j)
        out = out + c * fall * r ** (e - deriv)
    return out


def radial_terms(kind, exterior):
    kind = OperatorKind.parse(kind)
    fam = kind.family
    if not kind.is_stokes:
        fam = "LD" if fam == "D" else "LS"
    return _TERMS[(fam, bool(exterior))]


def stokes_radial(kind, n, r, side=None):
    """Radial factors of a Stokes layer potential (or of the single-layer
    traction for the K kinds) at radius r."""
    kind = OperatorKind.parse(kind)
    if not kind.is_stokes:
        raise ValueError("stokes_radial needs a Stokes kind")
    ext = _side(kind, r, side)
    t = radial_terms(kind, ext)
    ev = {k: radial_eval(v, n, r) for k, v in t.items()}
    return StokesRadialCoeffs(ev["V"], ev["W"], ev["X"], ev["C"], ev["q"], ext)


# ---------------------------------------------------------------- eigenvalues

# on-surface values as functions of n; exact when n is a Fraction
_EIG = {
    ("S", "V"): (lambda n: n / ((2 * n + 1) * (2 * n + 3)),) * 2,
    ("S", "W"): (lambda n: (n + 1) / ((2 * n + 1) * (2 * n - 1)),) * 2,
    ("S", "X"): (lambda n: 1 / (2 * n + 1),) * 2,
    ("D", "V"): (lambda n: (2 * n * n + 4 * n + 3) / ((2 * n + 1) * (2 * n + 3)),
                 lambda n: -2 * n * (n + 2) / ((2 * n + 1) * (2 * n + 3))),
    ("D", "W"): (lambda n: 2 * (n + 1) * (n - 1) / ((2 * n + 1) * (2 * n - 1)),
                 lambda n: -(2 * n * n + 1) / ((2 * n + 1) * (2 * n - 1))),
    ("D", "X"): (lambda n: (n - 1) / (2 * n + 1),
                 lambda n: -(n + 2) / (2 * n + 1)),
    ("K", "V"): (lambda n: -2 * n * (n + 2) / ((2 * n + 1) * (2 * n + 3)),
                 lambda n: (2 * n * n + 4 * n + 3) / ((2 * n + 1) * (2 * n + 3))),
    ("K", "W"): (lambda n: -(2 * n * n + 1) / ((2 * n + 1) * (2 * n - 1)),
                 lambda n: 2 * (n + 1) * (n - 1) / ((2 * n + 1) * (2 * n - 1))),
    ("K", "X"): (lambda n: -(n + 2) / (2 * n + 1),
                 lambda n: (n - 1) / (2 * n + 1)),
    ("S", "Y"): (lambda n: 1 / (2 * n + 1),) * 2,
    ("D", "Y"): (lambda n: n / (2 * n + 1), lambda n: -(n + 1) / (2 * n + 1)),
    ("K", "Y"): (lambda n: -(n + 1) / (2 * n + 1), lambda n: n / (2 * n + 1)),
}


def eigenvalue(kind, n, channel=None, exact=False):
    """Surface eigenvalue of kind on degree n in channel V, W, X (or Y for Laplace).

    Returns a Fraction when exact is True.
    """
    kind = OperatorKind.parse(kind)
    channel = channel or ("V" if kind.is_stokes else "Y")
    if kind.is_stokes == (channel == "Y"):
        raise ValueError(f"channel {channel} does not belong to {kind.value}")
    ext = kind.default_side != "interior"
    f = _EIG[(kind.family, channel)][0 if ext else 1]
    return f(Fraction(n)) if exact else float(f(Fraction(n)))


def laplace_k_pv_eigenvalue(n):
    """Principal value of the normal derivative of S: mean of the two limits."""
    return -1.0 / (2 * (2 * np.asarray(n, dtype=float) + 1))


@lru_cache(maxsize=None)
def _eig_table(kind, nmax):
    n, _ = nm_arrays(nmax)
    nn = np.arange(nmax + 1)
    if not kind.is_stokes:
        t = np.array([eigenvalue(kind, k, "Y") for k in nn])[n]
        t.setflags(write=False)
        return t
    out = []
    for ch in "VWX":
        t = np.array([eigenvalue(kind, k, ch) for k in nn])[n]
        if ch != "V":
            t[n == 0] = 0.0
        t.setflags(write=False)
        out.append(t)
    return tuple(out)


def apply_diagonal(kind, density):
    """Surface operator applied channelwise to coefficients."""
    kind = OperatorKind.parse(kind)
    if kind.is_stokes:
        if not isinstance(density, VectorCoeffs):
            raise TypeError("Stokes operators act on VectorCoeffs")
        tv, tw, tx = _eig_table(kind, density.nmax)
        return VectorCoeffs(tv * density.v, tw * density.w, tx * density.x)
    if isinstance(density, VectorCoeffs):
        raise TypeError("Laplace operators act on scalar coefficients")
    density = np.asarray(density)
    return _eig_table(kind, degree_of(density.shape[-1])) * density


def apply_laplace_k_pv(density):
    density = np.asarray(density)
    n, _ = nm_arrays(degree_of(density.shape[-1]))
    return laplace_k_pv_eigenvalue(n) * density


# ---------------------------------------------------------------- traction on the sphere

def traction_on_sphere(n, f, df, g, dg, h, dh, q):
    """V, W, X coefficients of the traction of u = fV + gW + hX, p = (q/r) Y at r=1.

    Pressure follows the radial ODE convention: the physical pressure is -q/r.
    """
    d = 2 * n + 1
    tV = ((3 * n + 2) * df - n * (n + 2) * f - n * dg + n * (n - 1) * g - q) / d
    tW = (-(n + 1) * df - (n + 1) * (n + 2) * f + (3 * n + 1) * dg + (n + 1) * (n - 1) * g + q) / d
    tX = dh - h
    return tV, tW, tX


# ---------------------------------------------------------------- radial ODE

@dataclass(frozen=True)
class OdeSolutionEntry:
    """Closed-form solution of the radial Stokes ODEs as exponent/coefficient data.

    Each of f, g, h, q is c * r**e, stored as (c(n), e(n)) callables; c = 0 means absent.
    """
    label: str
    side: str
    f: tuple
    g: tuple
    h: tuple
    q: tuple

    def terms(self, n):
        return {k: (float(c(n)), float(e(n))) for k, (c, e) in
                zip("fghq", (self.f, self.g, self.h, self.q))}


_NIL = (lambda n: 0.0, lambda n: 0.0)


def _ca(n):
    return -n * (2 * n - 1) / (2 * (n + 1))


def _cc(n):
    return (n + 1) * (2 * n + 3) / (2 * n)


ODE_SOLUTIONS = (
    OdeSolutionEntry("i", "exterior", (lambda n: 1.0, lambda n: -n - 2), _NIL, _NIL, _NIL),
    OdeSolutionEntry("ii", "exterior", (_ca, lambda n: -n), (lambda n: 1.0, lambda n: -n), _NIL,
                     (lambda n: (4 * n + 2) * _ca(n), lambda n: -n)),
    OdeSolutionEntry("iii", "exterior", _NIL, _NIL, (lambda n: 1.0, lambda n: -n - 1), _NIL),
    OdeSolutionEntry("iv", "interior", _NIL, (lambda n: 1.0, lambda n: n - 1), _NIL, _NIL),
    OdeSolutionEntry("v", "interior", (lambda n: 1.0, lambda n: n + 1), (_cc, lambda n: n + 1), _NIL,
                     (lambda n: -(4 * n + 2) * _cc(n), lambda n: n + 1)),
    OdeSolutionEntry("vi", "interior", _NIL, _NIL, (lambda n: 1.0, lambda n: n), _NIL),
)


def _power(term, r, k=0):
    c, e = term
    out = c * r**e
    for j in range(k):
        out = out * (e - j) / r
    return out


def ode_residual(entry, n, r):
    """Max absolute residual of the four radial equations over r."""
    r = np.asarray(r, dtype=float)
    t = entry.terms(n)
    f, g, h, q = (t[k] for k in "fghq")
    F, F1, F2 = (_power(f, r, k) for k in range(3))
    G, G1, G2 = (_power(g, r, k) for k in range(3))
    H, H1, H2 = (_power(h, r, k) for k in range(3))
    Q, Q1 = _power(q, r), _power(q, r, 1)
    d = 2 * n + 1
    res = [
        r**2 * F2 + 2 * r * F1 - (n + 1) * (n + 2) * F + (-r * Q1 + (n + 1) * Q) / d,
        r**2 * G2 + 2 * r * G1 - n * (n - 1) * G + (r * Q1 + n * Q) / d,
        r**2 * H2 + 2 * r * H1 - n * (n + 1) * H,
        (n + 1) * r * F1 + (n + 1) * (n + 2) * F - n * r * G1 + n * (n - 1) * G,
    ]
    return max(float(np.max(np.abs(x))) for x in res)


def _entry(label):
    return next(e for e in ODE_SOLUTIONS if e.label == label)


def _on_sphere(labels, n):
    """Rows [f, g, tV, tW] at r=1 for each solution label (columns)."""
    cols = []
    for lab in labels:
        t = _entry(lab).terms(n)
        f, g, q = t["f"], t["g"], t["q"]
        tv, tw, _ = traction_on_sphere(n, _power(f, 1.0), _power(f, 1.0, 1), _power(g, 1.0),
                                       _power(g, 1.0, 1), 0.0, 0.0, _power(q, 1.0))
        cols.append([_power(f, 1.0), _power(g, 1.0), tv, tw])
    return np.array(cols).T


def derive_layer_coefficients(n, potential):
    """Weights of the six radial solutions for a unit V, W or X density.

    Returns {'V': (c_i, c_ii, c_iv, c_v), 'W': (...), 'X': (c_iii, c_vi)}, found by
    enforcing the velocity and traction jumps of the single ('S') or double ('D')
    layer numerically.
    """
    if n < 1:
        raise ValueError("derivation needs n >= 1")
    if potential not in ("S", "D"):
        raise ValueError("potential must be 'S' or 'D'")
    E = _on_sphere(("i", "ii"), n)
    I = _on_sphere(("iv", "v"), n)
    M = np.hstack([E, -I])
    out = {}
    for k, ch in enumerate("VW"):
        unit = np.zeros(2)
        unit[k] = 1.0
        # rows: [[u]]_V, [[u]]_W, [[t]]_V, [[t]]_W
        rhs = np.concatenate([np.zeros(2), -unit]) if potential == "S" else np.concatenate([unit, np.zeros(2)])
        out[ch] = tuple(np.linalg.solve(M, rhs))
    # X channel: h_e = A r^{-n-1}, h_i = B r^n; traction dh - h
    Mx = np.array([[1.0, -1.0], [(-n - 1) - 1.0, -(n - 1.0)]])
    rhs = np.array([0.0, -1.0]) if potential == "S" else np.array([1.0, 0.0])
    out["X"] = tuple(np.linalg.solve(Mx, rhs))
    if not all(np.all(np.isfinite(v)) for v in out.values()):
        raise np.linalg.LinAlgError(f"singular jump system at n={n}")
    return out


def radial_from_weights(weights, n, r, source):
    """(f, g, h, physical pressure) at r > 1 and r < 1 from derived weights."""
    r = np.asarray(r, dtype=float)
    ext = np.all(r > 1)
    if source == "X":
        A, B = weights["X"]
        h = A * r ** (-n - 1) if ext else B * r**n
        return 0 * r, 0 * r, h, 0 * r
    c = weights[source]
    labs = ("i", "ii") if ext else ("iv", "v")
    ws = c[:2] if ext else c[2:]
    f = g = q = 0 * r
    for w, lab in zip(ws, labs):
        t = _entry(lab).terms(n)
        f = f + w * _power(t["f"], r)
        g = g + w * _power(t["g"], r)
        q = q + w * _power(t["q"], r)
    return f, g, 0 * r, -q / r
