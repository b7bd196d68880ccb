"""Orbital-rotation generators, tensor transforms and analytic energy derivatives.

The rotation group acts on the n spatial orbitals; the same unitary is applied
to both spin blocks, so spin-up and spin-down orbitals are never mixed. With
U = exp(i sum_l R_l T_l) the transformed tensors are

    h(R) = U^dag h U
    g(R)[p,q,r,s] = sum conj(U[c,p]) conj(U[d,q]) g[c,d,e,f] U[e,r] U[f,s]

and the derivatives at R = 0 follow the nested-commutator recursion

    D^n(l_1..l_n) = (1/n) sum_k [-i T_{l_k}, D^(n-1)(rest_k)]

with two-body generators lifted as T x I + I x T on the doubled index. At
orders one and two this reproduces the closed commutator forms; all of it is
pinned against finite differences by the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.linalg import schur

from .errors import ConsistencyError, InvalidSpecError
from .fermion import FermionHamiltonian

REALITY_TOL = 1e-8


@dataclass(frozen=True)
class RdmPair:
    """One- and two-body reduced density matrices at fixed ansatz parameters.

    d1[i,j] = <a+_i a_j>, d2[c,d,e,f] = <a+_c a+_d a_e a_f>. At fixed theta
    these are constants, which is what makes E(R, theta) a classical function.
    """

    d1: np.ndarray
    d2: np.ndarray

    def __post_init__(self):
        d1 = np.asarray(self.d1, dtype=complex)
        d2 = np.asarray(self.d2, dtype=complex)
        n = d1.shape[0]
        if d1.shape != (n, n) or d2.shape != (n, n, n, n):
            raise InvalidSpecError("RDM shapes inconsistent")
        if not np.allclose(d1, d1.conj().T, atol=1e-10):
            raise InvalidSpecError("one-body RDM is not Hermitian")
        if not np.allclose(d2, -d2.transpose(1, 0, 2, 3), atol=1e-10) or not np.allclose(
            d2, -d2.transpose(0, 1, 3, 2), atol=1e-10
        ):
            raise InvalidSpecError("two-body RDM breaks antisymmetry")
        d1.setflags(write=False)
        d2.setflags(write=False)
        object.__setattr__(self, "d1", d1)
        object.__setattr__(self, "d2", d2)

    @property
    def n_spin_orbitals(self) -> int:
        return self.d1.shape[0]


@dataclass(frozen=True)
class GeneratorSet:
    """Hermitian generators of the spatial orbital-rotation group.

    Without an irrep mask the set is complete: (n^2+n)/2 symmetric matrices
    E_jk + E_kj (j <= k) followed by (n^2-n)/2 antisymmetric ones
    i(E_jk - E_kj) (j < k). With a mask only pairs of equal labels appear.
    """

    n_spatial: int
    generators: np.ndarray  # (L, n, n) complex
    labels: tuple[tuple[str, int, int], ...]
    irrep_mask: tuple | None = None

    def __post_init__(self):
        gens = np.asarray(self.generators, dtype=complex)
        if gens.ndim != 3 or gens.shape[1:] != (self.n_spatial, self.n_spatial):
            raise InvalidSpecError("generator array must be (L, n, n)")
        if not np.allclose(gens, gens.conj().transpose(0, 2, 1), atol=1e-14):
            raise InvalidSpecError("generators must be Hermitian")
        gens.setflags(write=False)
        object.__setattr__(self, "generators", gens)

    def __len__(self) -> int:
        return self.generators.shape[0]

    @cached_property
    def spin_generators(self) -> np.ndarray:
        """Generators lifted to the 2n spin orbitals: the same block for both spins."""
        n = self.n_spatial
        lifted = np.zeros((len(self), 2 * n, 2 * n), dtype=complex)
        lifted[:, :n, :n] = self.generators
        lifted[:, n:, n:] = self.generators
        lifted.setflags(write=False)
        return lifted

    @cached_property
    def _frobenius_norms(self) -> np.ndarray:
        return np.einsum("lab,lab->l", self.generators.conj(), self.generators).real


def build_generators(n_spatial: int, irrep_mask=None) -> GeneratorSet:
    """Generator set for n spatial orbitals, optionally restricted to equal-label pairs."""
    if n_spatial < 1:
        raise InvalidSpecError("need at least one spatial orbital")
    if irrep_mask is not None and len(irrep_mask) != n_spatial:
        raise InvalidSpecError(
            f"irrep mask has {len(irrep_mask)} labels for {n_spatial} orbitals"
        )

    def allowed(j, k):
        return irrep_mask is None or irrep_mask[j] == irrep_mask[k]

    mats, labels = [], []
    for j in range(n_spatial):
        for k in range(j, n_spatial):
            if not allowed(j, k):
                continue
            m = np.zeros((n_spatial, n_spatial), dtype=complex)
            if j == k:
                m[j, j] = 1.0
            else:
                m[j, k] = 1.0
                m[k, j] = 1.0
            mats.append(m)
            labels.append(("symmetric", j, k))
    for j in range(n_spatial):
        for k in range(j + 1, n_spatial):
            if not allowed(j, k):
                continue
            m = np.zeros((n_spatial, n_spatial), dtype=complex)
            m[j, k] = 1.0j
            m[k, j] = -1.0j
            mats.append(m)
            labels.append(("antisymmetric", j, k))
    return GeneratorSet(
        n_spatial,
        np.array(mats),
        tuple(labels),
        None if irrep_mask is None else tuple(irrep_mask),
    )


def rotation_matrix(gens: GeneratorSet, rotation: np.ndarray) -> np.ndarray:
    """U = exp(i sum_l R_l T_l) via eigendecomposition of the Hermitian sum."""
    rotation = _check_rotation(gens, rotation)
    a = np.tensordot(rotation, gens.generators, axes=(0, 0))
    vals, vecs = np.linalg.eigh(a)
    return (vecs * np.exp(1j * vals)) @ vecs.conj().T


def _check_rotation(gens: GeneratorSet, rotation) -> np.ndarray:
    rotation = np.asarray(rotation, dtype=float)
    if rotation.shape != (len(gens),):
        raise InvalidSpecError(f"rotation vector must have length {len(gens)}")
    if not np.all(np.isfinite(rotation)):
        raise InvalidSpecError("rotation vector has non-finite entries")
    return rotation


def apply_orbital_rotation(ham: FermionHamiltonian, u_spatial: np.ndarray) -> FermionHamiltonian:
    """Transform the tensors by an explicit spatial unitary (replicated on both spins)."""
    n = ham.n_spatial
    u = np.zeros((2 * n, 2 * n), dtype=complex)
    u[:n, :n] = u_spatial
    u[n:, n:] = u_spatial
    h = u.conj().T @ ham.h @ u
    g = np.einsum("cp,cdef->pdef", u.conj(), ham.g, optimize=True)
    g = np.einsum("dq,pdef->pqef", u.conj(), g, optimize=True)
    g = np.einsum("pqef,er->pqrf", g, u, optimize=True)
    g = np.einsum("pqrf,fs->pqrs", g, u, optimize=True)
    return FermionHamiltonian(ham.n_spin_orbitals, ham.core_energy, h, g)


def transform_hamiltonian(
    ham: FermionHamiltonian, gens: GeneratorSet, rotation: np.ndarray
) -> FermionHamiltonian:
    """H(R) = U(R)^dag H U(R) expressed in the initial single-particle basis."""
    if ham.n_spin_orbitals != 2 * gens.n_spatial:
        raise InvalidSpecError("Hamiltonian and generator dimensions differ")
    return apply_orbital_rotation(ham, rotation_matrix(gens, rotation))


# ---------------------------------------------------------------------------
# Derivatives at R = 0
# ---------------------------------------------------------------------------

def _comm_h(t: np.ndarray, x: np.ndarray) -> np.ndarray:
    """-i [T, X] on the one-body tensor."""
    return -1j * (t @ x - x @ t)


def _comm_g(t: np.ndarray, g: np.ndarray) -> np.ndarray:
    """-i [T x I + I x T, G] on the doubled two-body index."""
    mg = np.einsum("cp,pdef->cdef", t, g) + np.einsum("dp,cpef->cdef", t, g)
    gm = np.einsum("cdpf,pe->cdef", g, t) + np.einsum("cdep,pf->cdef", g, t)
    return -1j * (mg - gm)


def derivative_tensors(ham: FermionHamiltonian, gens: GeneratorSet, order) -> tuple[np.ndarray, np.ndarray]:
    """n-th derivative of (h(R), g(R)) at R = 0 along the given generator indices.

    Memoized on sorted index multisets; the derivative is symmetric under
    permutations of the order, so only the multiset matters.
    """
    order = tuple(int(l) for l in order)
    if len(order) < 1:
        raise InvalidSpecError("derivative order must be at least 1")
    for l in order:
        if not 0 <= l < len(gens):
            raise InvalidSpecError(f"generator index {l} out of range")
    t = gens.spin_generators
    memo: dict[tuple, tuple[np.ndarray, np.ndarray]] = {(): (ham.h, ham.g)}

    def rec(multiset: tuple) -> tuple[np.ndarray, np.ndarray]:
        if multiset in memo:
            return memo[multiset]
        n = len(multiset)
        dh = np.zeros_like(ham.h)
        dg = np.zeros_like(ham.g)
        for k in range(n):
            rest = multiset[:k] + multiset[k + 1 :]
            ph, pg = rec(rest)
            dh += _comm_h(t[multiset[k]], ph)
            dg += _comm_g(t[multiset[k]], pg)
        result = (dh / n, dg / n)
        memo[multiset] = result
        return result

    return rec(tuple(sorted(order)))


def energy_at(ham: FermionHamiltonian, gens: GeneratorSet, rotation, rdms: RdmPair) -> float:
    """E(R, theta) = sum h(R) d1 + 1/2 sum g(R) d2 + core, fully classical."""
    rotated = transform_hamiltonian(ham, gens, rotation)
    value = np.einsum("ij,ij->", rotated.h, rdms.d1) + 0.5 * np.einsum(
        "cdef,cdef->", rotated.g, rdms.d2, optimize=True
    )
    return float(value.real) + rotated.core_energy


def gradient_only(ham: FermionHamiltonian, gens: GeneratorSet, rdms: RdmPair) -> np.ndarray:
    """First derivative of the energy at R = 0 contracted with fixed RDMs."""
    t = gens.spin_generators
    dh1 = -1j * (np.einsum("lab,bc->lac", t, ham.h) - np.einsum("ab,lbc->lac", ham.h, t))
    dg1 = _dg1(t, ham.g)
    grad = np.einsum("lij,ij->l", dh1, rdms.d1) + 0.5 * np.einsum(
        "lcdef,cdef->l", dg1, rdms.d2, optimize=True
    )
    return _require_real(grad, "gradient")


def _dg1(t: np.ndarray, g: np.ndarray) -> np.ndarray:
    mg = np.einsum("lcp,pdef->lcdef", t, g, optimize=True) + np.einsum(
        "ldp,cpef->lcdef", t, g, optimize=True
    )
    gm = np.einsum("cdpf,lpe->lcdef", g, t, optimize=True) + np.einsum(
        "cdep,lpf->lcdef", g, t, optimize=True
    )
    return -1j * (mg - gm)


def gradient_and_hessian(
    ham: FermionHamiltonian, gens: GeneratorSet, rdms: RdmPair
) -> tuple[np.ndarray, np.ndarray]:
    """Analytic gradient and Hessian of E(R, theta) at R = 0 for fixed RDMs.

    Equivalent to contracting the first- and second-order derivative tensors,
    with the second commutator moved onto the density tensors so the pair loop
    collapses into two Gram matrices.
    """
    t = gens.spin_generators
    h, g = ham.h, ham.g
    d1, d2 = rdms.d1, rdms.d2

    dh1 = -1j * (np.einsum("lab,bc->lac", t, h) - np.einsum("ab,lbc->lac", h, t))
    dg1 = _dg1(t, g)

    grad = np.einsum("lij,ij->l", dh1, d1) + 0.5 * np.einsum(
        "lcdef,cdef->l", dg1, d2, optimize=True
    )

    # <[T, C], D> = <C, [T^T, D]>: push the outer commutator onto the RDMs.
    k1 = np.einsum("lpi,pj->lij", t, d1) - np.einsum("ip,ljp->lij", d1, t)
    k2 = (
        np.einsum("lpc,pdef->lcdef", t, d2, optimize=True)
        + np.einsum("lqd,cqef->lcdef", t, d2, optimize=True)
        - np.einsum("cdpf,lep->lcdef", d2, t, optimize=True)
        - np.einsum("cdeq,lfq->lcdef", d2, t, optimize=True)
    )
    g1 = np.einsum("aij,bij->ab", dh1, k1)
    nl = len(gens)
    g2 = dg1.reshape(nl, -1) @ k2.reshape(nl, -1).T

    hess = -0.5j * ((g1 + g1.T) + 0.5 * (g2 + g2.T))
    return _require_real(grad, "gradient"), _require_real(hess, "Hessian")


def _require_real(arr: np.ndarray, what: str) -> np.ndarray:
    worst = float(np.abs(arr.imag).max(initial=0.0))
    if worst > REALITY_TOL:
        raise ConsistencyError(f"{what} has imaginary part {worst:.3e} above {REALITY_TOL}")
    return np.ascontiguousarray(arr.real)


# ---------------------------------------------------------------------------
# Logarithm of an accumulated rotation
# ---------------------------------------------------------------------------

def hermitian_log(u: np.ndarray) -> np.ndarray:
    """Hermitian M with exp(iM) = U, principal branch (phases in (-pi, pi])."""
    t, q = schur(np.asarray(u, dtype=complex), output="complex")
    phases = np.angle(np.diag(t))
    m = (q * phases) @ q.conj().T
    m = 0.5 * (m + m.conj().T)
    check = (q * np.exp(1j * phases)) @ q.conj().T
    if not np.allclose(check, u, atol=1e-10):
        raise ConsistencyError("matrix is not unitary enough for a stable logarithm")
    return m


def rotation_from_unitary(gens: GeneratorSet, u: np.ndarray) -> np.ndarray:
    """Coordinates R with exp(i T.R) = U, via the Hermitian log in the generator basis."""
    m = hermitian_log(u)
    overlaps = np.einsum("lab,ab->l", gens.generators.conj(), m)
    rotation = (overlaps / gens._frobenius_norms).real
    residual = m - np.tensordot(rotation, gens.generators, axes=(0, 0))
    if np.abs(residual).max(initial=0.0) > 1e-9:
        raise ConsistencyError("unitary is outside the span of the generator set")
    return rotation
