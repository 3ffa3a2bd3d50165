import numpy as np
import pytest

from ruelle_realize.linalg_kernel import spectral_radius
from ruelle_realize.realization import Realization


def disk_entries(rng, shape):
    """Entries uniform in the unit disk."""
    r = np.sqrt(rng.uniform(size=shape))
    return r * np.exp(2j * np.pi * rng.uniform(size=shape))


def random_contractive(rng, d, p=1, q=1, rho=None):
    """Random realization whose state matrix has spectral radius ``rho``.

    ``rho`` defaults to a draw from U(0.1, 0.9).
    """
    if rho is None:
        rho = rng.uniform(0.1, 0.9)
    A = disk_entries(rng, (d, d))
    A *= rho / spectral_radius(A)
    return Realization(A, disk_entries(rng, (d, q)), disk_entries(rng, (p, d)),
                       disk_entries(rng, (p, q)))


def circle_points(rng, n):
    return np.exp(2j * np.pi * rng.uniform(size=n))


def fft_coefficients(m, nmax, points=512):
    """Fourier coefficients of ``|m(e^{i theta})|^2`` from uniform samples."""
    theta = 2 * np.pi * np.arange(points) / points
    vals = np.array([abs(m(np.exp(1j * t))[0, 0]) ** 2 for t in theta])
    coef = np.fft.fft(vals) / points
    return {n: coef[-n % points] for n in range(-nmax, nmax + 1)}


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def haar():
    return Realization([[0.0]], [[1.0]], [[0.5]], [[0.5]])
