"""Trace CSV, summary JSON and the combined energy-vs-strings figure."""

from __future__ import annotations

import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .driver import TraceRecord

CSV_HEADER = "strategy,outer_index,stage,cumulative_pauli_evals,energy_hartree,hamiltonian_word_count"

STRATEGY_STYLE = {
    "adiabatic_sd": ("tab:red", "o"),
    "na_trust_region": ("tab:blue", "s"),
    "na_newton": ("tab:green", "^"),
    "na_bfgs": ("tab:orange", "d"),
}


def format_trace_csv(records: list[TraceRecord]) -> str:
    lines = [CSV_HEADER]
    for r in records:
        lines.append(
            f"{r.strategy},{r.outer_index},{r.stage},"
            f"{r.cumulative_pauli_evals},{r.energy:.12g},{r.hamiltonian_word_count}"
        )
    return "\n".join(lines) + "\n"


def write_trace_csv(path: Path, records: list[TraceRecord]) -> None:
    path.write_text(format_trace_csv(records))


def write_summary(path: Path, summary: dict) -> None:
    path.write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")


def render_figure(path: Path, traces: dict[str, list[TraceRecord]], exact_energy: float | None) -> None:
    """One polyline of (cumulative strings, energy) per strategy, with the
    exact ground energy as a horizontal reference line."""
    fig, ax = plt.subplots(figsize=(7.5, 5.0))
    for strategy, records in traces.items():
        if not records:
            continue
        xs = [r.cumulative_pauli_evals for r in records]
        ys = [r.energy for r in records]
        color, marker = STRATEGY_STYLE.get(strategy, ("tab:gray", "x"))
        ax.plot(xs, ys, marker=marker, markersize=4, lw=1.2, color=color, label=strategy)
    if exact_energy is not None:
        ax.axhline(exact_energy, color="black", lw=1.0, ls="--", label="exact ground state")
    ax.set_xlabel("cumulative Pauli-string evaluations")
    ax.set_ylabel("energy (Hartree)")
    ax.legend(frameon=False, fontsize=9)
    ax.grid(alpha=0.25, lw=0.5)
    fig.tight_layout()
    fig.savefig(path, format=path.suffix.lstrip(".") or "svg")
    plt.close(fig)
