import numpy as np
import pytest

from wahtor.errors import InvalidSpecError
from wahtor.fermion import fock_matrix
from wahtor.rotation import (
    apply_orbital_rotation,
    build_generators,
    derivative_tensors,
    energy_at,
    gradient_and_hessian,
    gradient_only,
    hermitian_log,
    rotation_from_unitary,
    rotation_matrix,
    transform_hamiltonian,
)

from conftest import random_hamiltonian, random_rdms


def test_generator_counts_without_mask():
    gens = build_generators(4)
    kinds = [kind for kind, _, _ in gens.labels]
    assert kinds.count("symmetric") == 10
    assert kinds.count("antisymmetric") == 6
    assert len(gens) == 16


def test_single_orbital_generator():
    gens = build_generators(1)
    assert len(gens) == 1
    assert np.allclose(gens.generators[0], [[1.0]])


def test_irrep_mask_restricts_pairs():
    gens = build_generators(3, irrep_mask=("A", "A", "B"))
    pairs = {(kind, j, k) for kind, j, k in gens.labels}
    assert pairs == {
        ("symmetric", 0, 0),
        ("symmetric", 1, 1),
        ("symmetric", 2, 2),
        ("symmetric", 0, 1),
        ("antisymmetric", 0, 1),
    }


def test_mask_length_mismatch():
    with pytest.raises(InvalidSpecError):
        build_generators(3, irrep_mask=("A", "B"))


def test_rotation_matrix_identity_and_scalar():
    gens = build_generators(1)
    assert np.allclose(rotation_matrix(gens, np.zeros(1)), np.eye(1))
    u = rotation_matrix(gens, np.array([np.pi]))
    assert u[0, 0] == pytest.approx(-1.0, abs=1e-12)


def test_rotation_matrix_unitary(rng):
    gens = build_generators(4)
    for _ in range(5):
        u = rotation_matrix(gens, rng.normal(size=len(gens)))
        assert np.abs(u.conj().T @ u - np.eye(4)).max() < 1e-12


def test_transform_at_zero_is_identity(rng):
    ham = random_hamiltonian(rng, 2)
    gens = build_generators(2)
    rotated = transform_hamiltonian(ham, gens, np.zeros(len(gens)))
    assert np.abs(rotated.h - ham.h).max() < 1e-15
    assert np.abs(rotated.g - ham.g).max() < 1e-15
    assert rotated.core_energy == ham.core_energy


def test_commuting_generator_leaves_h_fixed():
    gens = build_generators(1)
    n = 2
    h = np.diag([0.3, 0.3]).astype(complex)
    from wahtor.fermion import FermionHamiltonian

    ham = FermionHamiltonian(n, 0.0, h, np.zeros((n,) * 4, dtype=complex))
    for r in (0.1, 1.0, 3.0):
        rotated = transform_hamiltonian(ham, gens, np.array([r]))
        assert np.abs(rotated.h - h).max() < 1e-12


def test_spectrum_invariance(rng):
    ham = random_hamiltonian(rng, 2)
    gens = build_generators(2)
    reference = np.linalg.eigvalsh(fock_matrix(ham))
    for _ in range(5):
        rotated = transform_hamiltonian(ham, gens, rng.normal(size=len(gens)) * 0.7)
        values = np.linalg.eigvalsh(fock_matrix(rotated))
        assert np.abs(values - reference).max() < 1e-9


def test_composition_matches_concatenated_unitary(rng):
    ham = random_hamiltonian(rng, 2)
    gens = build_generators(2)
    r1 = rng.normal(size=len(gens)) * 0.4
    r2 = rng.normal(size=len(gens)) * 0.4
    stepwise = transform_hamiltonian(transform_hamiltonian(ham, gens, r1), gens, r2)
    u_total = rotation_matrix(gens, r1) @ rotation_matrix(gens, r2)
    direct = apply_orbital_rotation(ham, u_total)
    v1 = np.linalg.eigvalsh(fock_matrix(stepwise))
    v2 = np.linalg.eigvalsh(fock_matrix(direct))
    assert np.abs(v1 - v2).max() < 1e-9
    assert np.abs(stepwise.h - direct.h).max() < 1e-10


# ---------------------------------------------------------------------------
# derivatives
# ---------------------------------------------------------------------------

def _closed_form_first(ham, gens, l):
    t = gens.spin_generators[l]
    dh = -1j * (t @ ham.h - ham.h @ t)
    dg = _lifted_commutator(t, ham.g, -1j)
    return dh, dg


def _lifted_commutator(t, g, prefactor):
    mg = np.einsum("cp,pdef->cdef", t, g) + np.einsum("dp,cpef->cdef", t, g)
    gm = np.einsum("cdpf,pe->cdef", g, t) + np.einsum("cdep,pf->cdef", g, t)
    return prefactor * (mg - gm)


def _closed_form_second(ham, gens, l1, l2):
    t1 = gens.spin_generators[l1]
    t2 = gens.spin_generators[l2]

    def bracket_h(t, x):
        return t @ x - x @ t

    dh = -0.5 * (bracket_h(t1, bracket_h(t2, ham.h)) + bracket_h(t2, bracket_h(t1, ham.h)))
    inner2 = _lifted_commutator(t2, ham.g, 1.0)
    inner1 = _lifted_commutator(t1, ham.g, 1.0)
    dg = -0.5 * (_lifted_commutator(t1, inner2, 1.0) + _lifted_commutator(t2, inner1, 1.0))
    return dh, dg


def test_recursion_matches_closed_forms(rng):
    ham = random_hamiltonian(rng, 2)
    gens = build_generators(2)
    for l in (0, 2, 3):
        dh, dg = derivative_tensors(ham, gens, (l,))
        ch, cg = _closed_form_first(ham, gens, l)
        assert np.abs(dh - ch).max() < 1e-12
        assert np.abs(dg - cg).max() < 1e-12
    for l1, l2 in [(0, 1), (1, 1), (3, 0)]:
        dh, dg = derivative_tensors(ham, gens, (l1, l2))
        ch, cg = _closed_form_second(ham, gens, l1, l2)
        assert np.abs(dh - ch).max() < 1e-12
        assert np.abs(dg - cg).max() < 1e-12


def test_derivative_order_symmetry(rng):
    ham = random_hamiltonian(rng, 2)
    gens = build_generators(2)
    dh_ab, dg_ab = derivative_tensors(ham, gens, (1, 3))
    dh_ba, dg_ba = derivative_tensors(ham, gens, (3, 1))
    assert np.abs(dh_ab - dh_ba).max() == 0.0
    assert np.abs(dg_ab - dg_ba).max() == 0.0


def test_commuting_generator_derivative_vanishes():
    from wahtor.fermion import FermionHamiltonian

    gens = build_generators(1)
    h = np.diag([0.7, 0.7]).astype(complex)
    ham = FermionHamiltonian(2, 0.0, h, np.zeros((2,) * 4, dtype=complex))
    dh, dg = derivative_tensors(ham, gens, (0,))
    assert np.abs(dh).max() < 1e-14
    assert np.abs(dg).max() < 1e-14


def test_first_derivative_matches_finite_difference(rng):
    ham = random_hamiltonian(rng, 2)
    gens = build_generators(2)
    step = 1e-4
    for l in (0, 1, 3):
        dh, dg = derivative_tensors(ham, gens, (l,))
        probe = np.zeros(len(gens))
        probe[l] = step
        plus = transform_hamiltonian(ham, gens, probe)
        minus = transform_hamiltonian(ham, gens, -probe)
        fd_h = (plus.h - minus.h) / (2 * step)
        fd_g = (plus.g - minus.g) / (2 * step)
        scale = max(np.abs(fd_h).max(), np.abs(fd_g).max())
        assert np.abs(dh - fd_h).max() / scale < 1e-6
        assert np.abs(dg - fd_g).max() / scale < 1e-6


def test_gradient_hessian_match_finite_differences(rng):
    gens = build_generators(2)
    dim = len(gens)
    step = 1e-4
    for _ in range(3):
        ham = random_hamiltonian(rng, 2)
        rdms = random_rdms(rng, 2)
        grad, hess = gradient_and_hessian(ham, gens, rdms)
        assert np.abs(hess - hess.T).max() == 0.0

        def e_of(r):
            return energy_at(ham, gens, r, rdms)

        scale = max(1.0, np.abs(grad).max(), np.abs(hess).max())
        for l in range(dim):
            probe = np.zeros(dim)
            probe[l] = step
            fd = (e_of(probe) - e_of(-probe)) / (2 * step)
            assert abs(fd - grad[l]) / scale < 1e-6
        for a, b in [(0, 1), (2, 2), (3, 1), (3, 3)]:
            ea, eb = np.zeros(dim), np.zeros(dim)
            ea[a], eb[b] = step, step
            fd = (e_of(ea + eb) - e_of(ea - eb) - e_of(-ea + eb) + e_of(-ea - eb)) / (
                4 * step * step
            )
            assert abs(fd - hess[a, b]) / scale < 1e-6


def test_gradient_only_agrees_with_full(rng):
    ham = random_hamiltonian(rng, 2)
    gens = build_generators(2)
    rdms = random_rdms(rng, 2)
    grad, _ = gradient_and_hessian(ham, gens, rdms)
    assert np.abs(gradient_only(ham, gens, rdms) - grad).max() < 1e-14


def test_zero_rdms_give_zero_derivatives(rng):
    from wahtor.rotation import RdmPair

    ham = random_hamiltonian(rng, 2)
    gens = build_generators(2)
    rdms = RdmPair(np.zeros((4, 4)), np.zeros((4,) * 4))
    grad, hess = gradient_and_hessian(ham, gens, rdms)
    assert np.abs(grad).max() == 0.0
    assert np.abs(hess).max() == 0.0
    assert energy_at(ham, gens, np.zeros(len(gens)), rdms) == pytest.approx(ham.core_energy)


def test_diagonal_energy_contraction():
    from wahtor.fermion import FermionHamiltonian
    from wahtor.rotation import RdmPair

    n = 4
    h = np.diag([0.5, -0.25, 1.0, 2.0]).astype(complex)
    ham = FermionHamiltonian(n, 0.125, h, np.zeros((n,) * 4, dtype=complex))
    occ = np.diag([1.0, 0.0, 1.0, 0.0]).astype(complex)
    rdms = RdmPair(occ, np.zeros((n,) * 4, dtype=complex))
    gens = build_generators(2)
    expected = 0.5 + 1.0 + 0.125
    assert energy_at(ham, gens, np.zeros(len(gens)), rdms) == pytest.approx(expected)


def test_hermitian_log_round_trip(rng):
    gens = build_generators(3)
    r = rng.normal(size=len(gens)) * 0.6
    u = rotation_matrix(gens, r)
    m = hermitian_log(u)
    assert np.abs(m - m.conj().T).max() < 1e-12
    vals, vecs = np.linalg.eigh(m)
    rebuilt = (vecs * np.exp(1j * vals)) @ vecs.conj().T
    assert np.abs(rebuilt - u).max() < 1e-10


def test_rotation_from_unitary_recovers_product(rng):
    gens = build_generators(3)
    r1 = rng.normal(size=len(gens)) * 0.3
    r2 = rng.normal(size=len(gens)) * 0.3
    u = rotation_matrix(gens, r1) @ rotation_matrix(gens, r2)
    recovered = rotation_from_unitary(gens, u)
    assert np.abs(rotation_matrix(gens, recovered) - u).max() < 1e-10
