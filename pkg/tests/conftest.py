import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_coeffs(rng, nmax, batch=()):
    from spherebie.harmonics import ncoeffs

    shape = tuple(batch) + (ncoeffs(nmax),)
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def random_vector(rng, nmax):
    from spherebie.harmonics import VectorCoeffs

    v = VectorCoeffs(*(random_coeffs(rng, nmax) for _ in range(3)))
    v.w[0] = v.x[0] = 0
    return v


def rel(a, b):
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b))) / np.max(np.abs(b)))
