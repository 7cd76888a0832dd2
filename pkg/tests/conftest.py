import numpy as np
import pytest

from cqedwigner.presets import SET1, SET2


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def set1():
    return SET1.protocol(n_fock=128)


@pytest.fixture(scope="session")
def set2():
    return SET2.protocol(n_fock=128)


def random_density(rng, support, n_fock, rank=None):
    """Random mixed state on Fock levels ``0..support-1`` embedded in ``n_fock``."""
    rank = rank or support
    g = rng.normal(size=(support, rank)) + 1j * rng.normal(size=(support, rank))
    small = g @ g.conj().T
    small /= np.trace(small)
    rho = np.zeros((n_fock, n_fock), dtype=complex)
    rho[:support, :support] = small
    return rho


def random_hermitian(rng, dim, scale=1.0):
    m = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return scale * (m + m.conj().T) / 2
