import numpy as np
import pytest

from wahtor.errors import CapabilityError, InvalidSpecError
from wahtor.fermion import (
    FermionHamiltonian,
    HubbardSpec,
    build_hubbard_ring,
    exact_ground_energy,
    exact_ground_energy_global,
    fock_matrix,
    sector_basis,
)
from wahtor.pauli import encode

from conftest import random_hamiltonian


def test_hubbard_spec_rejects_tiny_ring():
    with pytest.raises(InvalidSpecError):
        HubbardSpec(1)


def test_free_ring_half_filling_energy():
    # tight-binding single-particle spectrum {-2, 0, 0, 2}, two particles per spin
    ham = build_hubbard_ring(HubbardSpec(4, hopping=1.0))
    assert exact_ground_energy(ham, 2, 2) == pytest.approx(-4.0, abs=1e-12)


def test_two_site_zero_hopping_two_particle_spectrum():
    # brute-force 16x16 diagonalization restricted to N = 2
    ham = build_hubbard_ring(HubbardSpec(2, hopping=0.0, on_site=5.0))
    masks = np.arange(16)
    sector = masks[np.bitwise_count(masks) == 2]
    values = np.linalg.eigvalsh(fock_matrix(ham)[np.ix_(sector, sector)])
    assert set(np.round(values, 10)) == {0.0, 5.0}


def test_strongly_correlated_ring_matches_power_iteration_oracle():
    # independent route: sparse matrix from the JW encoding + shifted power iteration
    from scipy.sparse import csr_matrix

    ham = build_hubbard_ring(HubbardSpec(4, 1.0, 8.0, 8.0))
    reference = exact_ground_energy(ham, 2, 2)

    dense = encode(ham).dense_matrix()
    basis = sector_basis(8, 2, 2)
    sparse = csr_matrix(dense[np.ix_(basis, basis)])
    shift = 100.0
    vec = np.full(sparse.shape[0], 1.0 / np.sqrt(sparse.shape[0]), dtype=complex)
    for _ in range(8000):
        vec = shift * vec - sparse @ vec
        vec /= np.linalg.norm(vec)
    rayleigh = float((vec.conj() @ (sparse @ vec)).real)
    assert rayleigh == pytest.approx(reference, abs=1e-7)


def test_diagonal_h_ground_energy_includes_core():
    n = 4
    h = np.diag([-1.0, -1.0, -1.0, -1.0]).astype(complex)
    g = np.zeros((n, n, n, n), dtype=complex)
    ham = FermionHamiltonian(n, core_energy=0.25, h=h, g=g)
    assert exact_ground_energy(ham, 1, 1) == pytest.approx(-2.0 + 0.25, abs=1e-12)


def test_global_minimum_is_min_over_sectors():
    ham = build_hubbard_ring(HubbardSpec(3, 1.0, 6.0, 4.0))
    sector_values = [
        exact_ground_energy(ham, nu, nd) for nu in range(4) for nd in range(4)
    ]
    assert exact_ground_energy_global(ham) == pytest.approx(min(sector_values), abs=1e-12)


def test_sector_basis_counts():
    basis = sector_basis(8, 2, 2)
    assert len(basis) == 36  # C(4,2)^2
    assert all(np.bitwise_count(basis & 0b1111) == 2)
    assert all(np.bitwise_count(basis >> 4) == 2)
    with pytest.raises(InvalidSpecError):
        sector_basis(8, 5, 0)


def test_capability_limit():
    n = 18
    ham = FermionHamiltonian(
        n, 0.0, np.zeros((n, n), dtype=complex), np.zeros((n,) * 4, dtype=complex)
    )
    with pytest.raises(CapabilityError):
        exact_ground_energy(ham, 1, 1)


def test_constructor_rejects_non_hermitian():
    n = 2
    h = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)
    with pytest.raises(InvalidSpecError):
        FermionHamiltonian(n, 0.0, h, np.zeros((n,) * 4, dtype=complex))


def test_fock_matrix_is_hermitian_for_random_hamiltonians(rng):
    for _ in range(4):
        ham = random_hamiltonian(rng, 2)
        m = fock_matrix(ham)
        assert np.abs(m - m.conj().T).max() < 1e-12


def test_penalty_expansion_constant_and_diagonal():
    # mu*(n_i - p)^2 with t = V = 0: spectrum of a single site pair is analytic
    mu, p = 3.0, 2.0
    ham = build_hubbard_ring(HubbardSpec(2, 0.0, 0.0, mu, penalty_target=p))
    m = fock_matrix(ham)
    diag = np.diagonal(m).real
    # n_i = 0, 1, 2 per site -> penalty mu*p^2, mu*(1-p)^2, mu*(2-p)^2
    masks = np.arange(16)
    for mask in masks:
        expected = 0.0
        for site in range(2):
            n_i = ((mask >> site) & 1) + ((mask >> (site + 2)) & 1)
            expected += mu * (n_i - p) ** 2
        assert diag[mask] == pytest.approx(expected, abs=1e-12)
