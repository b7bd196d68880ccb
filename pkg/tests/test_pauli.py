import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wahtor.fermion import fock_matrix
from wahtor.pauli import (
    QubitOperator,
    encode,
    from_text,
    identity_word,
    jw_monomial,
    to_text,
    word_multiply,
)

from conftest import random_hamiltonian

X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
I2 = np.eye(2, dtype=complex)
LETTERS = {"I": I2, "X": X, "Y": Y, "Z": Z}


def word_to_matrix(word: str) -> np.ndarray:
    out = np.array([[1.0 + 0j]])
    for letter in word:  # leftmost letter = highest qubit
        out = np.kron(out, LETTERS[letter])
    return out


@given(st.lists(st.sampled_from("IXYZ"), min_size=1, max_size=4))
@settings(max_examples=60, deadline=None)
def test_word_matrix_convention_matches_kron(letters):
    word = "".join(letters)
    op = QubitOperator(len(word), {word: 1.0})
    assert np.abs(op.dense_matrix() - word_to_matrix(word)).max() < 1e-12


@given(
    st.lists(st.sampled_from("IXYZ"), min_size=3, max_size=3),
    st.lists(st.sampled_from("IXYZ"), min_size=3, max_size=3),
)
@settings(max_examples=60, deadline=None)
def test_word_multiply_matches_matrix_product(w1, w2):
    w1, w2 = "".join(w1), "".join(w2)
    phase, product = word_multiply(w1, w2)
    lhs = word_to_matrix(w1) @ word_to_matrix(w2)
    rhs = phase * word_to_matrix(product)
    assert np.abs(lhs - rhs).max() < 1e-12


def test_number_operator_single_qubit():
    op = jw_monomial("a_dag_a", (0, 0), 1)
    assert op.terms == pytest.approx({"I": 0.5, "Z": -0.5})


def test_adjacent_hopping_identity():
    op = jw_monomial("a_dag_a", (0, 1), 2) + jw_monomial("a_dag_a", (1, 0), 2)
    assert set(op.terms) == {"XX", "YY"}
    assert op.terms["XX"] == pytest.approx(0.5)
    assert op.terms["YY"] == pytest.approx(0.5)


def test_distant_hopping_carries_z_string(rng):
    op = jw_monomial("a_dag_a", (0, 2), 3) + jw_monomial("a_dag_a", (2, 0), 3)
    assert set(op.terms) == {"XZX", "YZY"}
    # oracle: dense ladder matrices on 8x8
    a0 = _dense_ladder(0, 3)
    a2 = _dense_ladder(2, 3)
    ref = a0.conj().T @ a2 + a2.conj().T @ a0
    assert np.abs(op.dense_matrix() - ref).max() < 1e-12


def _dense_ladder(p: int, n: int) -> np.ndarray:
    """Annihilation operator on the Fock register, bit p of the basis index."""
    dim = 1 << n
    out = np.zeros((dim, dim), dtype=complex)
    for m in range(dim):
        if (m >> p) & 1:
            sign = (-1) ** int(np.bitwise_count(np.int64(m & ((1 << p) - 1))))
            out[m ^ (1 << p), m] = sign
    return out


def test_two_body_monomial_against_dense_ladders():
    n = 4
    ops = [_dense_ladder(p, n) for p in range(n)]
    for c, d, e, f in [(0, 1, 2, 3), (2, 0, 3, 1), (1, 3, 3, 1)]:
        ref = ops[c].conj().T @ ops[d].conj().T @ ops[e] @ ops[f]
        img = jw_monomial("a_dag_a_dag_a_a", (c, d, e, f), n)
        got = img.dense_matrix() if img.terms else np.zeros((16, 16))
        assert np.abs(got - ref).max() < 1e-12


def test_encode_matches_fock_matrix(rng):
    for _ in range(3):
        ham = random_hamiltonian(rng, 2)
        assert np.abs(encode(ham).dense_matrix() - fock_matrix(ham)).max() < 1e-10


def test_encode_is_linear(rng):
    h1 = random_hamiltonian(rng, 2)
    h2 = random_hamiltonian(rng, 2)
    from wahtor.fermion import FermionHamiltonian

    summed = FermionHamiltonian(4, h1.core_energy + h2.core_energy, h1.h + h2.h, h1.g + h2.g)
    lhs = encode(summed)
    rhs = encode(h1) + encode(h2)
    keys = set(lhs.terms) | set(rhs.terms)
    for key in keys:
        assert lhs.terms.get(key, 0.0) == pytest.approx(rhs.terms.get(key, 0.0), abs=1e-12)


def test_hermitian_input_gives_real_coefficients(rng):
    ham = random_hamiltonian(rng, 2)
    assert encode(ham).hermitian_defect() < 1e-10


def test_core_only_hamiltonian_is_identity_term():
    from wahtor.fermion import FermionHamiltonian

    n = 4
    ham = FermionHamiltonian(n, 1.25, np.zeros((n, n)), np.zeros((n,) * 4))
    op = encode(ham)
    assert list(op.terms) == [identity_word(n)]
    assert op.terms[identity_word(n)] == pytest.approx(1.25)


def test_text_round_trip(rng):
    ham = random_hamiltonian(rng, 2)
    op = encode(ham)
    back = from_text(to_text(op))
    assert back.n_qubits == op.n_qubits
    assert set(back.terms) == set(op.terms)
    for word, coef in op.terms.items():
        assert back.terms[word] == pytest.approx(coef, abs=1e-15)
