"""Fast self-check suite behind `wahtor validate`.

Each property is evaluated on freshly drawn random small instances and printed
as one pass/fail line; any failure flips the exit code. The properties hold
for every seed, so --seed only changes the instances, never the verdicts.
"""

from __future__ import annotations

import numpy as np

from .fermion import FermionHamiltonian, fock_matrix
from .pauli import encode
from .rotation import (
    RdmPair,
    build_generators,
    energy_at,
    gradient_and_hessian,
    rotation_matrix,
    transform_hamiltonian,
)
from .simulator import EvalLedger, expectation, hubbard_ansatz, measure_rdms, prepare_state


def random_hamiltonian(rng: np.random.Generator, n_spatial: int) -> FermionHamiltonian:
    n = 2 * n_spatial
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    h = 0.5 * (a + a.conj().T)
    raw = rng.normal(size=(n,) * 4) + 1j * rng.normal(size=(n,) * 4)
    g = 0.5 * (raw + raw.conj().transpose(3, 2, 1, 0))
    return FermionHamiltonian(n, float(rng.normal()), h, g)


def random_rdms(rng: np.random.Generator, n_spatial: int) -> RdmPair:
    """RDMs measured from a random normalized state (hence exactly consistent)."""
    n = 2 * n_spatial
    psi = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    psi /= np.linalg.norm(psi)
    return measure_rdms(psi, n)


def check_gradient_hessian_fd(rng, instances=5, n_spatial=2, step=1e-4, tol=1e-6):
    worst = 0.0
    for _ in range(instances):
        ham = random_hamiltonian(rng, n_spatial)
        gens = build_generators(n_spatial)
        rdms = random_rdms(rng, n_spatial)
        grad, hess = gradient_and_hessian(ham, gens, rdms)
        dim = len(gens)

        def e_of(r):
            return energy_at(ham, gens, r, rdms)

        scale = max(1.0, float(np.abs(grad).max()), float(np.abs(hess).max()))
        for l in rng.choice(dim, size=min(4, dim), replace=False):
            probe = np.zeros(dim)
            probe[l] = step
            fd = (e_of(probe) - e_of(-probe)) / (2 * step)
            worst = max(worst, abs(fd - grad[l]) / scale)
        for _ in range(4):
            a, b = rng.integers(0, dim, size=2)
            ea = np.zeros(dim)
            eb = np.zeros(dim)
            ea[a] = step
            eb[b] = step
            fd = (e_of(ea + eb) - e_of(ea - eb) - e_of(-ea + eb) + e_of(-ea - eb)) / (4 * step * step)
            worst = max(worst, abs(fd - hess[a, b]) / scale)
    return worst < tol, f"max relative deviation {worst:.2e}"


def check_spectrum_invariance(rng, instances=3, n_spatial=2, tol=1e-9):
    worst = 0.0
    for _ in range(instances):
        ham = random_hamiltonian(rng, n_spatial)
        gens = build_generators(n_spatial)
        rotation = rng.normal(size=len(gens)) * 0.4
        rotated = transform_hamiltonian(ham, gens, rotation)
        v0 = np.linalg.eigvalsh(fock_matrix(ham))
        v1 = np.linalg.eigvalsh(fock_matrix(rotated))
        worst = max(worst, float(np.abs(v0 - v1).max()))
    return worst < tol, f"max eigenvalue drift {worst:.2e}"


def check_jw_equivalence(rng, instances=3, n_spatial=2, tol=1e-10):
    worst = 0.0
    for _ in range(instances):
        ham = random_hamiltonian(rng, n_spatial)
        dense = encode(ham).dense_matrix()
        worst = max(worst, float(np.abs(dense - fock_matrix(ham)).max()))
    return worst < tol, f"max matrix deviation {worst:.2e}"


def check_unitarity(rng, instances=4, n_spatial=3, tol=1e-12):
    worst = 0.0
    gens = build_generators(n_spatial)
    for _ in range(instances):
        u = rotation_matrix(gens, rng.normal(size=len(gens)))
        worst = max(worst, float(np.abs(u.conj().T @ u - np.eye(n_spatial)).max()))
    return worst < tol, f"max unitarity defect {worst:.2e}"


def check_ledger_semantics(rng, tol=None):
    ansatz = hubbard_ansatz(2, n_blocks=2)
    from .fermion import HubbardSpec, build_hubbard_ring

    op = encode(build_hubbard_ring(HubbardSpec(2, 1.0, 4.0, 2.0)))
    theta = rng.uniform(0, 2 * np.pi, ansatz.n_parameters)
    psi = prepare_state(ansatz, theta)
    ledger = EvalLedger()
    e1 = expectation(psi, op, ledger, theta_tag=1)
    count1 = ledger.cumulative_count
    e2 = expectation(psi, op, ledger, theta_tag=1)
    same = (e1 == e2) and ledger.cumulative_count == count1
    expectation(psi, op, ledger, theta_tag=2)
    reset_ok = ledger.cumulative_count == 2 * count1
    return same and reset_ok, f"count {count1} words; repeat free, tag change recharges"


CHECKS = [
    ("gradient/hessian vs finite differences", check_gradient_hessian_fd),
    ("spectrum invariance under rotation", check_spectrum_invariance),
    ("jordan-wigner matrix equivalence", check_jw_equivalence),
    ("rotation unitarity", check_unitarity),
    ("ledger reuse semantics", check_ledger_semantics),
]


def run_validation(seed: int = 0, stream=None) -> bool:
    import sys

    stream = stream or sys.stdout
    rng = np.random.default_rng(seed)
    all_ok = True
    for name, check in CHECKS:
        ok, detail = check(rng)
        all_ok &= ok
        stream.write(f"{'PASS' if ok else 'FAIL'}  {name}  ({detail})\n")
    return all_ok
