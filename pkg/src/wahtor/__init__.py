"""WAHTOR benchmark: VQE alternated with orbital-rotation Hamiltonian optimization."""

from .fermion import (
    FermionHamiltonian,
    HubbardSpec,
    build_hubbard_ring,
    exact_ground_energy,
    exact_ground_energy_global,
    fock_matrix,
)
from .fcidump import parse_fcidump, read_fcidump, write_fcidump
from .pauli import QubitOperator, encode, jw_monomial
from .rotation import (
    GeneratorSet,
    RdmPair,
    build_generators,
    derivative_tensors,
    energy_at,
    gradient_and_hessian,
    rotation_matrix,
    transform_hamiltonian,
)
from .simulator import (
    AnsatzSpec,
    EvalLedger,
    expectation,
    hubbard_ansatz,
    ladder_ansatz,
    measure_rdms,
    prepare_state,
)
from .optimizers import ObjectiveHandle, minimize_bfgs, newton_step, trust_region_minimize
from .vqe import VqeResult, run_vqe
from .driver import StrategyConfig, WahtorResult, hamopt_step, run_wahtor

__version__ = "0.1.0"

__all__ = [
    "AnsatzSpec",
    "EvalLedger",
    "FermionHamiltonian",
    "GeneratorSet",
    "HubbardSpec",
    "ObjectiveHandle",
    "QubitOperator",
    "RdmPair",
    "StrategyConfig",
    "VqeResult",
    "WahtorResult",
    "build_generators",
    "build_hubbard_ring",
    "derivative_tensors",
    "encode",
    "energy_at",
    "exact_ground_energy",
    "exact_ground_energy_global",
    "expectation",
    "fock_matrix",
    "gradient_and_hessian",
    "hamopt_step",
    "hubbard_ansatz",
    "jw_monomial",
    "ladder_ansatz",
    "measure_rdms",
    "minimize_bfgs",
    "newton_step",
    "parse_fcidump",
    "prepare_state",
    "read_fcidump",
    "rotation_matrix",
    "run_vqe",
    "run_wahtor",
    "transform_hamiltonian",
    "trust_region_minimize",
    "write_fcidump",
]
