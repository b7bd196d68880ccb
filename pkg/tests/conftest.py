import numpy as np
import pytest

from wahtor.fermion import FermionHamiltonian
from wahtor.rotation import RdmPair
from wahtor.simulator import measure_rdms


def random_hamiltonian(rng: np.random.Generator, n_spatial: int) -> FermionHamiltonian:
    """Dense random Hermitian-compatible (core, h, g) on 2*n_spatial spin orbitals."""
    n = 2 * n_spatial
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    h = 0.5 * (a + a.conj().T)
    raw = rng.normal(size=(n,) * 4) + 1j * rng.normal(size=(n,) * 4)
    g = 0.5 * (raw + raw.conj().transpose(3, 2, 1, 0))
    return FermionHamiltonian(n, float(rng.normal()), h, g)


def random_state(rng: np.random.Generator, n_qubits: int) -> np.ndarray:
    psi = rng.normal(size=1 << n_qubits) + 1j * rng.normal(size=1 << n_qubits)
    return psi / np.linalg.norm(psi)


def random_rdms(rng: np.random.Generator, n_spatial: int) -> RdmPair:
    """RDMs of a random normalized state: automatically self-consistent."""
    n = 2 * n_spatial
    return measure_rdms(random_state(rng, n), n)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
