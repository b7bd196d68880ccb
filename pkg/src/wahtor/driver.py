"""The outer alternation loop: VQE, then Hamiltonian optimization, repeated.

Four Hamiltonian-optimization strategies are implemented. The non-adiabatic
ones measure the reduced density matrices once at the converged theta and then
optimize the fully classical function R -> E(R, theta); the adiabatic one
re-runs a full VQE after every steepest-descent rotation so each gradient is
taken at a fresh variational minimum (Hellmann-Feynman regime).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConsistencyError, InvalidSpecError
from .fermion import FermionHamiltonian
from .optimizers import ObjectiveHandle, minimize_bfgs, newton_step, steihaug_cg
from .pauli import encode
from .rotation import (
    GeneratorSet,
    apply_orbital_rotation,
    energy_at,
    gradient_and_hessian,
    gradient_only,
    rotation_from_unitary,
    rotation_matrix,
    transform_hamiltonian,
)
from .simulator import AnsatzSpec, EvalLedger, measure_rdms, prepare_state
from .vqe import ThetaStamper, VqeResult, run_vqe

STRATEGIES = ("adiabatic_sd", "na_trust_region", "na_newton", "na_bfgs")


@dataclass(frozen=True)
class StrategyConfig:
    kind: str
    outer_tol: float = 1e-6  # Hartree
    max_outer: int = 50
    sd_step: float = 0.1
    sd_inner_max: int = 20
    radius0: float = 0.1
    max_radius: float = 1.0
    rotation_tol: float = 1e-6  # a smaller accepted rotation ends the run

    def __post_init__(self):
        if self.kind not in STRATEGIES:
            raise InvalidSpecError(f"unknown strategy {self.kind!r}; choose from {STRATEGIES}")
        for name in ("outer_tol", "max_outer", "sd_step", "sd_inner_max", "radius0", "max_radius"):
            if getattr(self, name) <= 0:
                raise InvalidSpecError(f"{name} must be positive")


@dataclass(frozen=True)
class TraceRecord:
    stage: str  # "vqe" | "hamopt"
    strategy: str
    outer_index: int
    cumulative_pauli_evals: int
    energy: float
    hamiltonian_word_count: int
    accepted_r_norm: float


@dataclass
class WahtorTrace:
    records: list[TraceRecord] = field(default_factory=list)

    def append(self, record: TraceRecord):
        if self.records and record.cumulative_pauli_evals < self.records[-1].cumulative_pauli_evals:
            raise ConsistencyError("cumulative Pauli evaluations must be monotone")
        self.records.append(record)


@dataclass
class AccumulatedRotation:
    u_total: np.ndarray
    steps: list[np.ndarray] = field(default_factory=list)

    def unitarity_defect(self) -> float:
        n = self.u_total.shape[0]
        return float(np.abs(self.u_total.conj().T @ self.u_total - np.eye(n)).max())


@dataclass
class HamoptResult:
    rotation: np.ndarray
    theta: np.ndarray
    energy: float  # classical E(R*) at fixed theta, the next VQE's start
    annotations: list[str] = field(default_factory=list)
    inner_vqes: list[tuple[VqeResult, int]] = field(default_factory=list)  # (run, word count)
    rdm_words_charged: int = 0
    failed: bool = False  # strategy produced no usable descent this round


@dataclass
class WahtorResult:
    trace: WahtorTrace
    final_energy: float
    rotation: AccumulatedRotation
    theta_opt: np.ndarray
    outer_energies: list[float]
    annotations: list[str]
    ledger: EvalLedger
    final_hamiltonian: FermionHamiltonian


def _trust_region_hamopt(ham, gens, rdms, cfg):
    """Trust-region minimization of the classical E(R) at fixed RDMs.

    The expansion point moves with accepted steps: after each acceptance the
    Hamiltonian is re-expanded so gradient and Hessian are always the exact
    R = 0 derivatives at the current point, and the accepted rotations compose
    into one total rotation recovered through the generator-basis logarithm.
    """
    zeros = np.zeros(len(gens))
    h_loc = ham
    u_loc = np.eye(gens.n_spatial, dtype=complex)
    f_cur = energy_at(ham, gens, zeros, rdms)
    radius = cfg.radius0
    eta = 0.15

    for _ in range(200):
        grad, hess = gradient_and_hessian(h_loc, gens, rdms)
        if float(np.abs(grad).max(initial=0.0)) < 1e-7 or radius < 1e-12:
            break
        step, hit_boundary = steihaug_cg(grad, hess, radius)
        predicted = -(float(np.dot(grad, step)) + 0.5 * float(step @ hess @ step))
        if predicted <= 0 or not np.all(np.isfinite(step)):
            radius *= 0.5
            continue
        f_trial = energy_at(h_loc, gens, step, rdms)
        ratio = (f_cur - f_trial) / predicted
        if ratio < 0.25:
            radius *= 0.5
        elif ratio > 0.75 and hit_boundary:
            radius = min(2.0 * radius, cfg.max_radius)
        if ratio > eta:
            h_loc = transform_hamiltonian(h_loc, gens, step)
            u_loc = u_loc @ rotation_matrix(gens, step)
            f_cur = f_trial

    return rotation_from_unitary(gens, u_loc), f_cur


def hamopt_step(
    ham: FermionHamiltonian,
    gens: GeneratorSet,
    theta: np.ndarray,
    ansatz: AnsatzSpec,
    ledger: EvalLedger,
    cfg: StrategyConfig,
    stamper: ThetaStamper | None = None,
    count_gradients: bool = True,
    vqe_energy: float | None = None,
) -> HamoptResult:
    """One Hamiltonian-optimization round at fixed theta (adiabatic: theta moves)."""
    if stamper is None:
        stamper = ThetaStamper(ledger)
    n = ham.n_spin_orbitals
    zeros = np.zeros(len(gens))

    if cfg.kind == "adiabatic_sd":
        return _adiabatic_step(ham, gens, theta, ansatz, ledger, cfg, stamper, count_gradients, vqe_energy)

    psi = prepare_state(ansatz, theta)
    tag = stamper.tag_for(theta)
    before = ledger.cumulative_count
    rdms = measure_rdms(psi, n, ledger, tag)
    charged = ledger.cumulative_count - before
    e0 = energy_at(ham, gens, zeros, rdms)
    annotations: list[str] = []

    failed = False
    if cfg.kind == "na_newton":
        grad, hess = gradient_and_hessian(ham, gens, rdms)
        rotation, fallback = newton_step(grad, hess)
        if fallback:
            annotations.append("newton solve fell back to steepest descent")
        energy = energy_at(ham, gens, rotation, rdms)
        halvings = 0
        while energy > e0 + 1e-12 and halvings < 40:
            rotation = 0.5 * rotation
            energy = energy_at(ham, gens, rotation, rdms)
            halvings += 1
        if energy > e0 + 1e-12:
            annotations.append("newton step gave no descent; zero rotation")
            rotation, energy = zeros, e0
            failed = True
        elif halvings:
            annotations.append(f"newton step halved {halvings}x to restore descent")
    elif cfg.kind == "na_trust_region":
        rotation, energy = _trust_region_hamopt(ham, gens, rdms, cfg)
    elif cfg.kind == "na_bfgs":
        obj = ObjectiveHandle(
            dimension=len(gens), value=lambda x: energy_at(ham, gens, x, rdms)
        )
        report = minimize_bfgs(obj, zeros, grad_tol=1e-6, f_tol=1e-10, max_iterations=300)
        rotation, energy = report.x_opt, report.f_opt
    else:  # pragma: no cover - guarded by StrategyConfig
        raise InvalidSpecError(cfg.kind)

    return HamoptResult(
        rotation=rotation,
        theta=np.asarray(theta, dtype=float),
        energy=float(min(energy, e0)),
        annotations=annotations,
        rdm_words_charged=charged,
        failed=failed,
    )


def _adiabatic_step(ham, gens, theta, ansatz, ledger, cfg, stamper, count_gradients, vqe_energy):
    """Steepest descent on R, re-running a full VQE after every rotation."""
    n = ham.n_spin_orbitals
    h_inner = ham
    u_inner = np.eye(gens.n_spatial, dtype=complex)
    theta_cur = np.asarray(theta, dtype=float)
    e_prev = vqe_energy
    step = cfg.sd_step
    annotations: list[str] = []
    inner_vqes: list[tuple[VqeResult, int]] = []
    charged_total = 0

    for _ in range(cfg.sd_inner_max):
        psi = prepare_state(ansatz, theta_cur)
        tag = stamper.tag_for(theta_cur)
        before = ledger.cumulative_count
        rdms = measure_rdms(psi, n, ledger, tag)
        charged_total += ledger.cumulative_count - before
        if e_prev is None:
            e_prev = energy_at(h_inner, gens, np.zeros(len(gens)), rdms)
        grad = gradient_only(h_inner, gens, rdms)
        if float(np.abs(grad).max(initial=0.0)) < 1e-6:
            break
        rotation = -step * grad
        h_try = transform_hamiltonian(h_inner, gens, rotation)
        op_try = encode(h_try)
        result = run_vqe(
            op_try, ansatz, theta_cur, ledger,
            count_gradients=count_gradients, stamper=stamper,
        )
        inner_vqes.append((result, len(op_try.measurable_words)))
        if result.energy > e_prev + 1e-12:
            step *= 0.5
            annotations.append(f"adiabatic step raised energy; halved to {step:g}")
            if step < 1e-6:
                break
            continue
        h_inner = h_try
        u_inner = u_inner @ rotation_matrix(gens, rotation)
        theta_cur = result.theta_opt
        e_prev = result.energy

    total_rotation = rotation_from_unitary(gens, u_inner)
    return HamoptResult(
        rotation=total_rotation,
        theta=theta_cur,
        energy=float(e_prev) if e_prev is not None else np.nan,
        annotations=annotations,
        inner_vqes=inner_vqes,
        rdm_words_charged=charged_total,
    )


def run_wahtor(
    h0: FermionHamiltonian,
    ansatz: AnsatzSpec,
    gens: GeneratorSet,
    cfg: StrategyConfig,
    seed: int,
    ledger: EvalLedger | None = None,
    count_gradients: bool = True,
    theta0: np.ndarray | None = None,
) -> WahtorResult:
    """Alternate VQE and Hamiltonian optimization until the energy settles.

    Stops when two consecutive VQE energies differ by less than outer_tol,
    when the accepted rotation becomes negligible, after two consecutive zero
    rotations, or at max_outer rounds. The final Hamiltonian is verified
    against U_total^dag H0 U_total.
    """
    if h0.n_spin_orbitals != 2 * gens.n_spatial:
        raise InvalidSpecError("Hamiltonian and generator set disagree on orbital count")
    if ansatz.n_qubits != h0.n_spin_orbitals:
        raise InvalidSpecError("ansatz register must match the spin-orbital count")
    if ledger is None:
        ledger = EvalLedger()
    stamper = ThetaStamper(ledger)
    rng = np.random.default_rng(seed)
    theta = theta0.copy() if theta0 is not None else rng.uniform(0.0, 2.0 * np.pi, ansatz.n_parameters)

    trace = WahtorTrace()
    rotation_log = AccumulatedRotation(u_total=np.eye(gens.n_spatial, dtype=complex))
    annotations: list[str] = []
    outer_energies: list[float] = []
    h_cur = h0
    prev_energy = None
    zero_streak = 0

    for outer in range(1, cfg.max_outer + 1):
        op = encode(h_cur)
        word_count = len(op.measurable_words)
        vqe_result = run_vqe(
            op, ansatz, theta, ledger, count_gradients=count_gradients, stamper=stamper
        )
        theta = vqe_result.theta_opt
        outer_energies.append(vqe_result.energy)
        trace.append(TraceRecord(
            "vqe", cfg.kind, outer, ledger.cumulative_count,
            vqe_result.energy, word_count, 0.0,
        ))
        if prev_energy is not None and abs(vqe_result.energy - prev_energy) < cfg.outer_tol:
            break
        prev_energy = vqe_result.energy
        if outer == cfg.max_outer:
            annotations.append("outer iteration limit reached")
            break

        ham_step = hamopt_step(
            h_cur, gens, theta, ansatz, ledger, cfg,
            stamper=stamper, count_gradients=count_gradients,
            vqe_energy=vqe_result.energy,
        )
        annotations.extend(ham_step.annotations)
        theta = ham_step.theta
        for inner, inner_words in ham_step.inner_vqes:
            trace.append(TraceRecord(
                "vqe", cfg.kind, outer, inner.trace[-1][0],
                inner.energy, inner_words, 0.0,
            ))
        rnorm = float(np.linalg.norm(ham_step.rotation))
        trace.append(TraceRecord(
            "hamopt", cfg.kind, outer, ledger.cumulative_count,
            ham_step.energy, word_count, rnorm,
        ))

        if ham_step.failed or rnorm < 1e-14:
            zero_streak += 1
            if zero_streak >= 2:
                annotations.append("two consecutive zero rotations; stopping")
                break
            if ham_step.failed:
                continue
        else:
            zero_streak = 0
        if rnorm >= 1e-14:
            h_cur = transform_hamiltonian(h_cur, gens, ham_step.rotation)
            rotation_log.u_total = rotation_log.u_total @ rotation_matrix(gens, ham_step.rotation)
            rotation_log.steps.append(np.asarray(ham_step.rotation, dtype=float))
        if not ham_step.failed and rnorm < cfg.rotation_tol:
            annotations.append("rotation below tolerance; converged")
            break

    _verify_accumulated(h0, rotation_log, h_cur)
    return WahtorResult(
        trace=trace,
        final_energy=outer_energies[-1],
        rotation=rotation_log,
        theta_opt=theta,
        outer_energies=outer_energies,
        annotations=annotations,
        ledger=ledger,
        final_hamiltonian=h_cur,
    )


def _verify_accumulated(h0, rotation_log, h_cur, tol=1e-9):
    """U_total^dag H0 U_total must reproduce the incrementally transformed tensors."""
    if rotation_log.unitarity_defect() > 1e-10:
        raise ConsistencyError("accumulated rotation lost unitarity")
    rebuilt = apply_orbital_rotation(h0, rotation_log.u_total)
    if (
        np.abs(rebuilt.h - h_cur.h).max(initial=0.0) > tol
        or np.abs(rebuilt.g - h_cur.g).max(initial=0.0) > tol
        or abs(rebuilt.core_energy - h_cur.core_energy) > tol
    ):
        raise ConsistencyError("accumulated rotation does not reproduce the final Hamiltonian")
