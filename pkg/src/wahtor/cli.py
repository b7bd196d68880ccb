"""Command-line front end.

    wahtor run <config>        run the configured strategies, write CSVs,
                               summary.json and plot.svg into output.dir
    wahtor validate [--seed N] fast invariant suite, pass/fail per property
    wahtor exact <config>      print the oracle ground energy for the system

Exit codes: 0 success, 1 config error, 2 property failure, 3 runtime failure.
WAHTOR_THREADS caps how many strategies run concurrently (default 1).
"""

from __future__ import annotations

import argparse
import os
import sys
import traceback
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from .config import ExperimentConfig, load_config
from .driver import run_wahtor
from .errors import ConfigError, WahtorError
from .fcidump import read_fcidump
from .fermion import (
    HubbardSpec,
    build_hubbard_ring,
    exact_ground_energy,
    exact_ground_energy_global,
)
from .pauli import encode, to_text
from .report import render_figure, write_summary, write_trace_csv
from .rotation import build_generators
from .simulator import EvalLedger, hubbard_ansatz, ladder_ansatz
from .validate import run_validation

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_PROPERTY = 2
EXIT_RUNTIME = 3


def _build_system(cfg: ExperimentConfig):
    """Returns (hamiltonian, ansatz, generators, (n_up, n_dn), label)."""
    if cfg.system_type == "hubbard":
        spec = HubbardSpec(
            cfg.sites, cfg.hopping, cfg.on_site, cfg.chem_penalty, cfg.penalty_target
        )
        ham = build_hubbard_ring(spec)
        blocks = cfg.ansatz_blocks if cfg.ansatz_blocks is not None else 7
        ansatz = hubbard_ansatz(cfg.sites, n_blocks=blocks)
        # half filling by default: one particle per site
        n_up = cfg.n_up if cfg.n_up is not None else (cfg.sites + 1) // 2
        n_dn = cfg.n_dn if cfg.n_dn is not None else cfg.sites // 2
        label = f"hubbard L={cfg.sites} V={cfg.on_site} mu={cfg.chem_penalty}"
    else:
        ham, meta = read_fcidump(cfg.fcidump_path.read_text())
        blocks = cfg.ansatz_blocks if cfg.ansatz_blocks is not None else 2
        ansatz = ladder_ansatz(ham.n_spin_orbitals, n_blocks=blocks)
        nelec = meta.get("NELEC", ham.n_spatial)
        ms2 = meta.get("MS2", 0)
        n_up = cfg.n_up if cfg.n_up is not None else (nelec + ms2) // 2
        n_dn = cfg.n_dn if cfg.n_dn is not None else (nelec - ms2) // 2
        label = f"fcidump {cfg.fcidump_path.name}"
    gens = build_generators(ham.n_spatial)
    return ham, ansatz, gens, (n_up, n_dn), label


def cmd_run(config_path: Path) -> int:
    try:
        cfg = load_config(config_path)
        ham, ansatz, gens, sector, label = _build_system(cfg)
    except (ConfigError, WahtorError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    out = cfg.output_dir
    out.mkdir(parents=True, exist_ok=True)

    exact_sector = None
    exact_global = None
    if ham.n_spin_orbitals <= 16:
        exact_sector = exact_ground_energy(ham, *sector)
        exact_global = exact_ground_energy_global(ham)

    word_count = len(encode(ham).measurable_words)
    print(f"system: {label} ({ham.n_spin_orbitals} qubits, {word_count} words)")
    if exact_sector is not None:
        print(f"exact ground energy, sector {sector}: {exact_sector:.9f}")

    def run_one(kind: str):
        return run_wahtor(
            ham, ansatz, gens, cfg.strategy_config(kind), seed=cfg.seed,
            ledger=EvalLedger(), count_gradients=cfg.count_gradients,
        )

    results, failures = {}, {}
    workers = max(1, int(os.environ.get("WAHTOR_THREADS", "1")))
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = {kind: pool.submit(run_one, kind) for kind in cfg.strategies}
        for kind, future in futures.items():
            try:
                results[kind] = future.result()
            except Exception as exc:  # flush partial results below
                failures[kind] = exc
                traceback.print_exc()

    traces = {}
    summary: dict = {
        "system": label,
        "seed": cfg.seed,
        "count_gradients": cfg.count_gradients,
        "sector": list(sector),
        "exact_ground_energy": exact_sector,
        "exact_ground_energy_global": exact_global,
        "strategies": {},
    }
    for kind, result in results.items():
        write_trace_csv(out / f"trace_{kind}.csv", result.trace.records)
        (out / f"hamiltonian_{kind}.txt").write_text(to_text(encode(result.final_hamiltonian)))
        traces[kind] = result.trace.records
        summary["strategies"][kind] = {
            "final_energy": result.final_energy,
            "total_pauli_evals": result.ledger.cumulative_count,
            "outer_rounds": len(result.outer_energies),
            "outer_energies": result.outer_energies,
            "annotations": result.annotations,
        }
        print(
            f"{kind}: E = {result.final_energy:.9f} Ha after "
            f"{result.ledger.cumulative_count} Pauli evaluations"
        )
    for kind, exc in failures.items():
        summary["strategies"][kind] = {"error": f"{type(exc).__name__}: {exc}"}

    write_summary(out / "summary.json", summary)
    if traces:
        render_figure(out / "plot.svg", traces, exact_sector)
    return EXIT_RUNTIME if failures else EXIT_OK


def cmd_validate(seed: int) -> int:
    return EXIT_OK if run_validation(seed=seed) else EXIT_PROPERTY


def cmd_exact(config_path: Path) -> int:
    try:
        cfg = load_config(config_path)
        ham, _, _, sector, label = _build_system(cfg)
    except (ConfigError, WahtorError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    energy = exact_ground_energy(ham, *sector)
    print(f"{label}: sector {sector} ground energy {energy:.12f} Ha")
    print(f"global Fock-space minimum {exact_ground_energy_global(ham):.12f} Ha")
    return EXIT_OK


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="wahtor", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run configured strategies")
    p_run.add_argument("config", type=Path)

    p_val = sub.add_parser("validate", help="fast invariant self-checks")
    p_val.add_argument("--seed", type=int, default=0)

    p_exact = sub.add_parser("exact", help="print the oracle ground energy")
    p_exact.add_argument("config", type=Path)

    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return cmd_run(args.config)
        if args.command == "validate":
            return cmd_validate(args.seed)
        if args.command == "exact":
            return cmd_exact(args.config)
    except WahtorError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_CONFIG


if __name__ == "__main__":
    raise SystemExit(main())
