"""Second-quantized Hamiltonians, the Hubbard benchmark ring and exact diagonalization.

Conventions used throughout the package:

* Spin-orbital layout: for ``n`` spatial orbitals, indices ``0..n-1`` are the
  spin-up orbitals and ``n..2n-1`` the spin-down ones.
* The operator represented by a :class:`FermionHamiltonian` is

      H = sum_ij h[i,j] a+_i a_j
        + 1/2 sum_cdef g[c,d,e,f] a+_c a+_d a_e a_f
        + core_energy

  with the two-body tensor in physicist index placement (creation indices
  first, annihilation indices last).
* Fock basis states are integer bit masks; bit ``p`` set means spin orbital
  ``p`` occupied, and ``a+_p |m> = (-1)^(number of occupied q < p) |m + 2^p>``.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .errors import CapabilityError, InvalidSpecError

HERMITICITY_ATOL = 1e-10


@dataclass(frozen=True)
class FermionHamiltonian:
    """Core energy plus one- and two-body coefficient tensors in the spin-orbital basis."""

    n_spin_orbitals: int
    core_energy: float
    h: np.ndarray
    g: np.ndarray

    def __post_init__(self):
        n = self.n_spin_orbitals
        h = np.ascontiguousarray(np.asarray(self.h, dtype=complex))
        g = np.ascontiguousarray(np.asarray(self.g, dtype=complex))
        if h.shape != (n, n):
            raise InvalidSpecError(f"h must be {n}x{n}, got {h.shape}")
        if g.shape != (n, n, n, n):
            raise InvalidSpecError(f"g must be {n}^4, got {g.shape}")
        scale = max(1.0, float(np.abs(h).max(initial=0.0)), float(np.abs(g).max(initial=0.0)))
        if not np.allclose(h, h.conj().T, atol=HERMITICITY_ATOL * scale):
            raise InvalidSpecError("one-body tensor is not Hermitian")
        if not np.allclose(g, g.conj().transpose(3, 2, 1, 0), atol=HERMITICITY_ATOL * scale):
            raise InvalidSpecError("two-body tensor breaks g[c,d,e,f] == conj(g[f,e,d,c])")
        h.setflags(write=False)
        g.setflags(write=False)
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "core_energy", float(self.core_energy))

    @property
    def n_spatial(self) -> int:
        return self.n_spin_orbitals // 2


@dataclass(frozen=True)
class HubbardSpec:
    """Periodic Hubbard ring with an on-site potential and an occupation penalty.

    The penalty term is mu * sum_i (n_i - penalty_target)^2 with the target
    occupation configurable (default 2, the value printed in the source model).
    """

    n_sites: int
    hopping: float = 1.0
    on_site: float = 0.0
    chem_penalty: float = 0.0
    penalty_target: float = 2.0

    def __post_init__(self):
        if self.n_sites < 2:
            raise InvalidSpecError("Hubbard ring needs at least 2 sites")


def build_hubbard_ring(spec: HubbardSpec) -> FermionHamiltonian:
    """Expand the Hubbard ring Hamiltonian into (core, h, g) tensors.

    Uses n_sigma^2 = n_sigma to reduce the quadratic penalty to one- and
    two-body terms plus a constant.
    """
    L = spec.n_sites
    n = 2 * L
    t, v, mu, p = spec.hopping, spec.on_site, spec.chem_penalty, spec.penalty_target
    h = np.zeros((n, n), dtype=complex)
    g = np.zeros((n, n, n, n), dtype=complex)

    # For L == 2 the ring degenerates to a single bond.
    edges = sorted({tuple(sorted((i, (i + 1) % L))) for i in range(L)})
    for i, j in edges:
        for s in (0, L):
            h[i + s, j + s] += -t
            h[j + s, i + s] += -t

    core = 0.0
    for i in range(L):
        up, dn = i, i + L
        # on-site V n_up n_dn plus the 2*mu*n_up*n_dn piece of the penalty
        w = v + 2.0 * mu
        g[up, dn, dn, up] += w
        g[dn, up, up, dn] += w
        # mu * ((1 - 2p) (n_up + n_dn) + p^2)
        h[up, up] += mu * (1.0 - 2.0 * p)
        h[dn, dn] += mu * (1.0 - 2.0 * p)
        core += mu * p * p

    return FermionHamiltonian(n, core, h, g)


# ---------------------------------------------------------------------------
# Fock-space machinery
# ---------------------------------------------------------------------------

def _parity(masks: np.ndarray, below: int) -> np.ndarray:
    """(-1)^(number of occupied orbitals with index < below) for each mask."""
    counts = np.bitwise_count(masks & ((1 << below) - 1))
    return 1 - 2 * (counts & 1).astype(np.int64)


def _nonzero_terms(tensor: np.ndarray, cutoff: float = 1e-14):
    idx = np.argwhere(np.abs(tensor) > cutoff)
    return [(tuple(int(k) for k in row), tensor[tuple(row)]) for row in idx]


def _apply_monomial(masks: np.ndarray, creators, annihilators):
    """Apply a+_{c1} a+_{c2}.. a_{a1} a_{a2}.. to basis masks, rightmost operator first.

    Returns (valid, new_masks, signs); entries with valid False were annihilated.
    """
    cur = masks.copy()
    sign = np.ones(len(masks), dtype=np.int64)
    valid = np.ones(len(masks), dtype=bool)
    for p in reversed(annihilators):
        occupied = (cur >> p) & 1 == 1
        valid &= occupied
        sign *= _parity(cur, p)
        cur = np.where(occupied, cur ^ (1 << p), cur)
    for p in reversed(creators):
        empty = (cur >> p) & 1 == 0
        valid &= empty
        sign *= _parity(cur, p)
        cur = np.where(empty, cur | (1 << p), cur)
    return valid, cur, sign


def fock_matrix(ham: FermionHamiltonian, basis: np.ndarray | None = None) -> np.ndarray:
    """Dense matrix of the Hamiltonian on the given Fock basis masks.

    With ``basis=None`` the full 2^N Fock space is used (N <= 16 refused: the
    dense matrix would not fit). Matrix elements that leave the basis are
    projected out, so a restricted basis yields the compressed block PHP.
    """
    n = ham.n_spin_orbitals
    if basis is None:
        if n > 14:
            raise CapabilityError(f"full Fock matrix for {n} spin orbitals is too large")
        basis = np.arange(1 << n, dtype=np.int64)
    else:
        basis = np.asarray(basis, dtype=np.int64)

    dim = len(basis)
    mat = np.zeros((dim, dim), dtype=complex)

    def scatter(valid, new_masks, amps):
        cols = np.nonzero(valid)[0]
        if cols.size == 0:
            return
        targets = new_masks[cols]
        rows = np.searchsorted(basis, targets)
        ok = rows < dim
        ok[ok] &= basis[rows[ok]] == targets[ok]
        mat[rows[ok], cols[ok]] += amps[cols[ok]]

    for (i, j), coef in _nonzero_terms(ham.h):
        valid, new, sign = _apply_monomial(basis, (i,), (j,))
        scatter(valid, new, coef * sign)
    for (c, d, e, f), coef in _nonzero_terms(ham.g):
        valid, new, sign = _apply_monomial(basis, (c, d), (e, f))
        scatter(valid, new, 0.5 * coef * sign)

    mat += ham.core_energy * np.eye(dim)
    return mat


def sector_basis(n_spin_orbitals: int, n_up: int, n_dn: int) -> np.ndarray:
    """Sorted bit masks with the given particle numbers in the up and down blocks."""
    n = n_spin_orbitals // 2
    if not (0 <= n_up <= n and 0 <= n_dn <= n):
        raise InvalidSpecError(f"sector ({n_up},{n_dn}) impossible with {n} spatial orbitals")
    ups = [sum(1 << p for p in occ) for occ in combinations(range(n), n_up)]
    dns = [sum(1 << (p + n) for p in occ) for occ in combinations(range(n), n_dn)]
    masks = np.array(sorted(u | d for u in ups for d in dns), dtype=np.int64)
    return masks


def exact_ground_energy(ham: FermionHamiltonian, n_up: int, n_dn: int) -> float:
    """Lowest eigenvalue of the Hamiltonian restricted to the (n_up, n_dn) sector.

    Dense diagonalization; refuses more than 16 spin orbitals.
    """
    if ham.n_spin_orbitals > 16:
        raise CapabilityError("exact diagonalization supports at most 16 spin orbitals")
    basis = sector_basis(ham.n_spin_orbitals, n_up, n_dn)
    mat = fock_matrix(ham, basis)
    vals = np.linalg.eigvalsh(mat)
    return float(vals[0])


def exact_ground_energy_global(ham: FermionHamiltonian) -> float:
    """Minimum of the sector ground energies over every (n_up, n_dn).

    For particle- and spin-conserving Hamiltonians this is the true Fock-space
    minimum, i.e. the valid variational lower bound for ansatzes that do not
    conserve particle number.
    """
    n = ham.n_spatial
    return min(
        exact_ground_energy(ham, n_up, n_dn)
        for n_up in range(n + 1)
        for n_dn in range(n + 1)
    )
