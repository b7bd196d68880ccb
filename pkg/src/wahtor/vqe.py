"""Variational optimization of ansatz parameters against a fixed qubit operator.

The BFGS optimizer minimizes theta -> <psi(theta)|O|psi(theta)> with the
analytic parameter-shift gradient dE/dtheta_k = (E(+pi/2) - E(-pi/2)) / 2,
exact for Ry generators. Every energy evaluation at a new theta charges the
full operator word count to the ledger; gradient circuits charge too unless
count_gradients is disabled, since they run on the same hardware.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .optimizers import ObjectiveHandle, OptimizerReport, minimize_bfgs
from .pauli import QubitOperator
from .simulator import (
    AnsatzSpec,
    EvalLedger,
    adjoint_gradient,
    compiled,
    expectation,
    prepare_state,
    prepare_states,
)

VQE_F_TOL = 1e-6  # Hartree, convergence threshold between BFGS iterations


@dataclass
class VqeResult:
    theta_opt: np.ndarray
    energy: float
    iterations: int
    trace: list[tuple[int, float]] = field(default_factory=list)
    report: OptimizerReport | None = None


class ThetaStamper:
    """Allocates a fresh ledger tag whenever theta changes bitwise.

    Shared across VQE runs and Hamiltonian-optimization steps of one
    experiment so that a fixed theta keeps its tag across stage boundaries
    (re-measuring there is free, as the caching rule requires).
    """

    def __init__(self, ledger: EvalLedger):
        self.ledger = ledger
        self._key: bytes | None = None
        self._tag = ledger.current_theta_tag

    def tag_for(self, theta: np.ndarray) -> int:
        key = np.asarray(theta, dtype=float).tobytes()
        if key != self._key:
            self._key = key
            self._tag = self.ledger.allocate_tag()
        return self._tag

    def invalidate(self):
        """Force a new tag at the next query (the register left theta)."""
        self._key = None


class _VqeObjective:
    """Energy and parameter-shift gradient with theta-tag bookkeeping."""

    def __init__(
        self,
        op: QubitOperator,
        ansatz: AnsatzSpec,
        ledger: EvalLedger,
        count_gradients: bool,
        stamper: ThetaStamper,
    ):
        self.op = op
        self.comp = compiled(op)
        self.ansatz = ansatz
        self.ledger = ledger
        self.count_gradients = count_gradients
        self.stamper = stamper

    def energy(self, theta: np.ndarray) -> float:
        theta = np.asarray(theta, dtype=float)
        tag = self.stamper.tag_for(theta)
        psi = prepare_state(self.ansatz, theta)
        return expectation(psi, self.op, self.ledger, tag)

    def gradient(self, theta: np.ndarray) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        _, grad = adjoint_gradient(self.ansatz, theta, self.comp)
        if self.count_gradients:
            # the parameter-shift protocol runs one circuit per shifted theta:
            # each of the 2P shifts is a new tag charging the full word count
            tags = [self.ledger.allocate_tag() for _ in range(2 * theta.size)]
            self.ledger.charge_sweep(tags, self.comp.words)
            self.stamper.invalidate()
        return grad


def parameter_shift_gradient(op: QubitOperator, ansatz: AnsatzSpec, theta: np.ndarray) -> np.ndarray:
    """Literal parameter-shift evaluation (uncharged); the production gradient
    is the adjoint sweep, which computes the identical analytic derivative."""
    theta = np.asarray(theta, dtype=float)
    p = theta.size
    shifted = np.repeat(theta[None, :], 2 * p, axis=0)
    for k in range(p):
        shifted[2 * k, k] += 0.5 * np.pi
        shifted[2 * k + 1, k] -= 0.5 * np.pi
    psis = prepare_states(ansatz, shifted)
    values = compiled(op).values(psis).real
    return 0.5 * (values[0::2] - values[1::2])


def run_vqe(
    op: QubitOperator,
    ansatz: AnsatzSpec,
    theta0: np.ndarray,
    ledger: EvalLedger,
    f_tol: float = VQE_F_TOL,
    grad_tol: float = 1e-9,
    max_iterations: int = 1000,
    count_gradients: bool = True,
    stamper: ThetaStamper | None = None,
) -> VqeResult:
    """Minimize the operator expectation over theta, warm-startable via theta0."""
    theta0 = np.asarray(theta0, dtype=float)
    if theta0.shape != (ansatz.n_parameters,):
        raise ValueError(f"theta0 must have length {ansatz.n_parameters}")

    if stamper is None:
        stamper = ThetaStamper(ledger)
    objective = _VqeObjective(op, ansatz, ledger, count_gradients, stamper)
    handle = ObjectiveHandle(
        dimension=theta0.size,
        value=objective.energy,
        gradient=objective.gradient,
    )
    trace: list[tuple[int, float]] = []

    def sample(_iteration, _theta, energy):
        trace.append((ledger.cumulative_count, energy))

    report = minimize_bfgs(
        handle,
        theta0,
        grad_tol=grad_tol,
        f_tol=f_tol,
        max_iterations=max_iterations,
        callback=sample,
    )
    # leave the ledger positioned at theta_opt so a following fixed-theta
    # measurement can reuse the Hamiltonian words (free if already evaluated)
    energy = objective.energy(report.x_opt)
    trace.append((ledger.cumulative_count, energy))
    return VqeResult(
        theta_opt=report.x_opt,
        energy=energy,
        iterations=report.iterations,
        trace=trace,
        report=report,
    )
