"""Rotations of scalar and vector spherical-harmonic expansions.

A Rotation R acts on fields by f'(x) = f(R^-1 x) and, for vector fields,
u'(x) = R u(R^-1 x). Euler angles are z-y-z: R = Rz(alpha) Ry(beta) Rz(gamma).
"""
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .harmonics import VectorCoeffs, degree_of


def _rz(a):
    c, s = np.cos(a), np.sin(a)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def _ry(b):
    c, s = np.cos(b), np.sin(b)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


@dataclass(frozen=True)
class Rotation:
    alpha: float = 0.0
    beta: float = 0.0
    gamma: float = 0.0

    @classmethod
    def identity(cls):
        return cls()

    @classmethod
    def from_matrix(cls, R):
        R = np.asarray(R, dtype=float)
        beta = float(np.arccos(np.clip(R[2, 2], -1.0, 1.0)))
        if np.sin(beta) < 1e-12:
            # gimbal lock: only alpha +/- gamma is defined
            gamma = 0.0
            if R[2, 2] > 0:
                alpha = float(np.arctan2(R[1, 0], R[0, 0]))
                beta = 0.0
            else:
                alpha = float(np.arctan2(-R[1, 0], -R[0, 0]))
                beta = np.pi
            return cls(alpha, beta, gamma)
        alpha = float(np.arctan2(R[1, 2], R[0, 2]))
        gamma = float(np.arctan2(R[2, 1], -R[2, 0]))
        return cls(alpha, beta, gamma)

    def matrix(self):
        return _rz(self.alpha) @ _ry(self.beta) @ _rz(self.gamma)

    def inverse(self):
        return Rotation(-self.gamma, -self.beta, -self.alpha)

    def __matmul__(self, other):
        """Composition: (self @ other) applies other first."""
        return Rotation.from_matrix(self.matrix() @ other.matrix())

    def apply(self, x):
        return np.asarray(x) @ self.matrix().T


def align_pole(center):
    """Rotation taking +z to center/|center|, third Euler angle 0."""
    c = np.asarray(center, dtype=float)
    nrm = np.linalg.norm(c)
    if nrm == 0:
        raise ValueError("cannot align the pole with the zero vector")
    c = c / nrm
    beta = float(np.arccos(np.clip(c[2], -1.0, 1.0)))
    alpha = float(np.arctan2(c[1], c[0])) if np.hypot(c[0], c[1]) > 0 else 0.0
    return Rotation(alpha, beta, 0.0)


# ---------------------------------------------------------------- Wigner matrices

@lru_cache(maxsize=None)
def _jy_eig(n):
    """Eigen-decomposition of J_y on degree n (standard phase basis m = -n..n)."""
    m = np.arange(-n, n + 1, dtype=float)
    up = np.sqrt(n * (n + 1) - m[:-1] * (m[:-1] + 1))  # <m+1|J+|m>
    Jp = np.diag(up, -1)
    Jy = (Jp - Jp.T) / 2j
    k, V = np.linalg.eigh(Jy)
    k = np.round(k)
    V.setflags(write=False)
    return k, V


@lru_cache(maxsize=None)
def _phase(n):
    """Sign change between the stored convention and the standard one (m < 0: (-1)^m)."""
    m = np.arange(-n, n + 1)
    s = np.where((m < 0) & (m % 2 == 1), -1.0, 1.0)
    s.setflags(write=False)
    return s


def wigner_d(n, beta):
    """Real Wigner small-d matrix d^n_{m'm}(beta), rows/cols m = -n..n (standard phases)."""
    k, V = _jy_eig(n)
    return np.real((V * np.exp(-1j * k * beta)) @ V.conj().T)


def wigner_table(nmax, beta):
    return [wigner_d(n, beta) for n in range(nmax + 1)]


@lru_cache(maxsize=None)
def _vt(n):
    k, V = _jy_eig(n)
    a, b = V.conj(), V.T.copy()
    a.setflags(write=False)
    b.setflags(write=False)
    return a, b


def _rotate_packed(c, rot):
    c = np.asarray(c, dtype=complex)
    nmax = degree_of(c.shape[-1])
    out = np.empty_like(c)
    for n in range(nmax + 1):
        sl = slice(n * n, (n + 1) ** 2)
        m = np.arange(-n, n + 1)
        s = _phase(n)
        k, _ = _jy_eig(n)
        a, b = _vt(n)
        x = c[..., sl] * (s * np.exp(-1j * m * rot.gamma))
        x = ((x @ a) * np.exp(-1j * k * rot.beta)) @ b
        out[..., sl] = x * (np.exp(-1j * m * rot.alpha) * s)
    return out


def rotate_scalar(c, rot):
    """Coefficients of f'(x) = f(R^-1 x). Leading batch axes are allowed."""
    return _rotate_packed(c, rot)


def rotate_vector(c, rot):
    """Coefficients of u'(x) = R u(R^-1 x).

    V, W and X are built from e_r and the surface gradient, both of which
    commute with rotations, so each channel rotates like a scalar expansion.
    """
    out = _rotate_packed(np.stack([c.v, c.w, c.x]), rot)
    return VectorCoeffs(out[0], out[1], out[2])
