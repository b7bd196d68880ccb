"""Pauli-word algebra and the Jordan-Wigner image of fermionic monomials.

A Pauli word is stored as its canonical string over {I, X, Y, Z} with qubit 0
as the rightmost letter, so the string doubles as a map key. Qubit p maps to
spin orbital p (identity mapping). The algebra is done symbolically, letter by
letter with phase tracking; dense matrices are only ever built on demand for
small-system oracles.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .errors import InvalidSpecError
from .fermion import FermionHamiltonian

COEFF_CUTOFF = 1e-12

# (left, right) -> (phase, product letter)
_MULT = {
    ("I", "I"): (1, "I"), ("I", "X"): (1, "X"), ("I", "Y"): (1, "Y"), ("I", "Z"): (1, "Z"),
    ("X", "I"): (1, "X"), ("X", "X"): (1, "I"), ("X", "Y"): (1j, "Z"), ("X", "Z"): (-1j, "Y"),
    ("Y", "I"): (1, "Y"), ("Y", "X"): (-1j, "Z"), ("Y", "Y"): (1, "I"), ("Y", "Z"): (1j, "X"),
    ("Z", "I"): (1, "Z"), ("Z", "X"): (1j, "Y"), ("Z", "Y"): (-1j, "X"), ("Z", "Z"): (1, "I"),
}


def identity_word(n_qubits: int) -> str:
    return "I" * n_qubits


def word_multiply(w1: str, w2: str) -> tuple[complex, str]:
    """Product of two Pauli words: (phase, word) with w1 acting after w2."""
    phase = 1 + 0j
    letters = []
    for a, b in zip(w1, w2):
        p, c = _MULT[(a, b)]
        phase *= p
        letters.append(c)
    return phase, "".join(letters)


class QubitOperator:
    """Weighted sum of Pauli words over a fixed register.

    Zero coefficients (below 1e-12) are dropped at construction; instances are
    treated as immutable. Operators produced by :func:`encode` carry their
    source tensors, which lets the simulator apply them through the
    second-quantized form instead of word by word.
    """

    __slots__ = ("n_qubits", "terms", "_compiled", "_word_set", "_fermion_source")

    def __init__(self, n_qubits: int, terms: dict[str, complex] | None = None):
        self.n_qubits = n_qubits
        cleaned: dict[str, complex] = {}
        for word, coef in (terms or {}).items():
            if len(word) != n_qubits or any(c not in "IXYZ" for c in word):
                raise InvalidSpecError(f"bad Pauli word {word!r} for {n_qubits} qubits")
            if abs(coef) > COEFF_CUTOFF:
                cleaned[word] = complex(coef)
        self.terms = cleaned
        self._compiled = None
        self._word_set = None
        self._fermion_source = None

    # -- algebra -----------------------------------------------------------
    def __add__(self, other: "QubitOperator") -> "QubitOperator":
        if self.n_qubits != other.n_qubits:
            raise InvalidSpecError("qubit count mismatch")
        merged = dict(self.terms)
        for word, coef in other.terms.items():
            merged[word] = merged.get(word, 0.0) + coef
        return QubitOperator(self.n_qubits, merged)

    def __mul__(self, scalar: complex) -> "QubitOperator":
        return QubitOperator(self.n_qubits, {w: c * scalar for w, c in self.terms.items()})

    __rmul__ = __mul__

    def __len__(self) -> int:
        return len(self.terms)

    @property
    def measurable_words(self) -> frozenset[str]:
        """Non-identity words: the unit of measurement cost."""
        if self._word_set is None:
            ident = identity_word(self.n_qubits)
            self._word_set = frozenset(w for w in self.terms if w != ident)
        return self._word_set

    def hermitian_defect(self) -> float:
        """Largest imaginary part over coefficients (0 for a Hermitian operator)."""
        if not self.terms:
            return 0.0
        return max(abs(c.imag) for c in self.terms.values())

    # -- dense oracle ------------------------------------------------------
    def dense_matrix(self) -> np.ndarray:
        """Dense 2^n matrix; intended for small-system cross-checks only."""
        dim = 1 << self.n_qubits
        mat = np.zeros((dim, dim), dtype=complex)
        basis = np.arange(dim)
        for word, coef in self.terms.items():
            xmask, zymask, ny = word_masks(word)
            phases = (1j**ny) * _sign_vector(basis, zymask)
            mat[basis ^ xmask, basis] += coef * phases
        return mat


@lru_cache(maxsize=100000)
def word_masks(word: str) -> tuple[int, int, int]:
    """(xmask, mask of Y|Z letters, number of Y letters) with qubit q at bit q."""
    n = len(word)
    xmask = zymask = ny = 0
    for q in range(n):
        letter = word[n - 1 - q]
        if letter in "XY":
            xmask |= 1 << q
        if letter in "YZ":
            zymask |= 1 << q
        if letter == "Y":
            ny += 1
    return xmask, zymask, ny


def _sign_vector(basis: np.ndarray, zymask: int) -> np.ndarray:
    return 1.0 - 2.0 * (np.bitwise_count(basis & zymask) & 1)


# ---------------------------------------------------------------------------
# Jordan-Wigner images
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def _jw_ladder(p: int, dagger: bool, n_qubits: int) -> tuple[tuple[str, complex], ...]:
    """a_p (or a+_p) as two Pauli words: Z-string below p, (X -+ iY)/2 at p."""
    letters = ["I"] * n_qubits
    for q in range(p):
        letters[n_qubits - 1 - q] = "Z"
    x = letters.copy()
    x[n_qubits - 1 - p] = "X"
    y = letters.copy()
    y[n_qubits - 1 - p] = "Y"
    sign = -0.5j if dagger else 0.5j
    return (("".join(x), 0.5 + 0j), ("".join(y), sign))


@lru_cache(maxsize=None)
def _jw_product(ops: tuple[tuple[int, bool], ...], n_qubits: int) -> tuple[tuple[str, complex], ...]:
    """JW image of an ordered product of ladder operators, merged."""
    acc = {identity_word(n_qubits): 1 + 0j}
    for p, dagger in ops:
        if not 0 <= p < n_qubits:
            raise InvalidSpecError(f"mode index {p} out of range for {n_qubits} qubits")
        nxt: dict[str, complex] = {}
        for word, coef in acc.items():
            for lword, lcoef in _jw_ladder(p, dagger, n_qubits):
                phase, product = word_multiply(word, lword)
                nxt[product] = nxt.get(product, 0.0) + coef * lcoef * phase
        acc = nxt
    return tuple((w, c) for w, c in acc.items() if abs(c) > COEFF_CUTOFF)


def jw_monomial(kind: str, indices: tuple[int, ...], n_qubits: int) -> QubitOperator:
    """JW image of a fermionic monomial.

    kind "a_dag_a" takes indices (i, j) for a+_i a_j; kind "a_dag_a_dag_a_a"
    takes (c, d, e, f) for a+_c a+_d a_e a_f. The result is generally not
    Hermitian; Hermitian combinations are up to the caller.
    """
    if kind == "a_dag_a":
        i, j = indices
        ops = ((i, True), (j, False))
    elif kind == "a_dag_a_dag_a_a":
        c, d, e, f = indices
        ops = ((c, True), (d, True), (e, False), (f, False))
    else:
        raise InvalidSpecError(f"unknown monomial kind {kind!r}")
    return QubitOperator(n_qubits, dict(_jw_product(ops, n_qubits)))


def encode(ham: FermionHamiltonian) -> QubitOperator:
    """Jordan-Wigner image of the full Hamiltonian, with merged terms."""
    n = ham.n_spin_orbitals
    acc: dict[str, complex] = {}
    ident = identity_word(n)
    if ham.core_energy != 0.0:
        acc[ident] = complex(ham.core_energy)

    hi, hj = np.nonzero(np.abs(ham.h) > 1e-14)
    for i, j in zip(hi.tolist(), hj.tolist()):
        coef = ham.h[i, j]
        for word, wcoef in _jw_product(((i, True), (j, False)), n):
            acc[word] = acc.get(word, 0.0) + coef * wcoef

    gidx = np.argwhere(np.abs(ham.g) > 1e-14)
    for c, d, e, f in gidx.tolist():
        coef = 0.5 * ham.g[c, d, e, f]
        for word, wcoef in _jw_product(((c, True), (d, True), (e, False), (f, False)), n):
            acc[word] = acc.get(word, 0.0) + coef * wcoef

    op = QubitOperator(n, acc)
    op._fermion_source = ham
    return op


# ---------------------------------------------------------------------------
# Text serialization: one line per term, "coeff_real coeff_imag word"
# ---------------------------------------------------------------------------

def to_text(op: QubitOperator) -> str:
    lines = [f"{op.n_qubits}"]
    for word in sorted(op.terms):
        coef = op.terms[word]
        lines.append(f"{coef.real:.17e} {coef.imag:.17e} {word}")
    return "\n".join(lines) + "\n"


def from_text(text: str) -> QubitOperator:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise InvalidSpecError("empty operator text")
    n = int(lines[0])
    terms = {}
    for ln in lines[1:]:
        re_, im, word = ln.split()
        terms[word] = float(re_) + 1j * float(im)
    return QubitOperator(n, terms)
