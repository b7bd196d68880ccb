#!/usr/bin/env python3
"""Generate frozen-core active-space FCIDUMP files for the benchmark molecules.

    python export_fcidump.py --molecule {hf|h2o|h2} --out PATH

Writes the FCIDUMP plus a sidecar JSON (PATH + ".json") separating the energy
constants: nuclear repulsion, frozen-core energy, SCF total.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from scf import Molecule, freeze_core, mo_integrals, run_rhf

MOLECULES = {
    # symbols, coordinates (Angstrom), frozen-core orbitals
    "hf": (
        ("F", "H"),
        ((0.0, 0.0, 0.0), (0.0, 0.0, 0.917)),
        1,
    ),
    "h2o": (
        ("O", "H", "H"),
        None,  # built from bond length / angle below
        1,
    ),
    "h2": (
        ("H", "H"),
        ((0.0, 0.0, 0.0), (0.0, 0.0, 0.74)),
        0,
    ),
}


def water_geometry(r=0.957, angle_deg=104.5):
    half = np.deg2rad(angle_deg) / 2.0
    return (
        (0.0, 0.0, 0.0),
        (r * np.sin(half), 0.0, -r * np.cos(half)),
        (-r * np.sin(half), 0.0, -r * np.cos(half)),
    )


def format_fcidump(norb, nelec, ms2, core, h_active, eri_active) -> str:
    lines = [
        f"&FCI NORB={norb},NELEC={nelec},MS2={ms2},",
        " ORBSYM=" + ",".join(["1"] * norb) + ",",
        " ISYM=1,",
        "&END",
    ]
    pair = lambda i, j: i * (i + 1) // 2 + j
    for i in range(norb):
        for j in range(i + 1):
            for k in range(norb):
                for l in range(k + 1):
                    if pair(i, j) < pair(k, l):
                        continue
                    value = eri_active[i, j, k, l]
                    if abs(value) > 1e-14:
                        lines.append(f" {value: .16E} {i+1:4d} {j+1:4d} {k+1:4d} {l+1:4d}")
    for i in range(norb):
        for j in range(i + 1):
            if abs(h_active[i, j]) > 1e-14:
                lines.append(f" {h_active[i, j]: .16E} {i+1:4d} {j+1:4d} {0:4d} {0:4d}")
    lines.append(f" {core: .16E} {0:4d} {0:4d} {0:4d} {0:4d}")
    return "\n".join(lines) + "\n"


def export(molecule: str, out_path: Path) -> dict:
    symbols, coords, n_frozen = MOLECULES[molecule]
    if molecule == "h2o":
        coords = water_geometry()
    mol = Molecule(symbols, coords, n_frozen_core=n_frozen)
    e_total, mo_energies, c, hcore, eri = run_rhf(mol)
    h_mo, eri_mo = mo_integrals(c, hcore, eri)
    e_frozen, h_active, eri_active = freeze_core(h_mo, eri_mo, n_frozen)

    norb = h_active.shape[0]
    nelec = mol.n_electrons - 2 * n_frozen
    e_nuc = mol.e_nuclear()
    core_constant = e_nuc + e_frozen

    out_path.parent.mkdir(parents=True, exist_ok=True)
    out_path.write_text(format_fcidump(norb, nelec, 0, core_constant, h_active, eri_active))

    sidecar = {
        "molecule": molecule,
        "basis": "sto-3g",
        "symbols": list(symbols),
        "coordinates_angstrom": [list(map(float, xyz)) for xyz in coords],
        "n_frozen_core": n_frozen,
        "norb_active": norb,
        "nelec_active": nelec,
        "e_nuclear": e_nuc,
        "e_frozen_core": e_frozen,
        "core_constant": core_constant,
        "e_scf_total": e_total,
        "mo_energies": [float(e) for e in mo_energies],
    }
    Path(str(out_path) + ".json").write_text(json.dumps(sidecar, indent=2) + "\n")
    return sidecar


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--molecule", choices=sorted(MOLECULES), required=True)
    parser.add_argument("--out", type=Path, required=True)
    args = parser.parse_args(argv)
    try:
        sidecar = export(args.molecule, args.out)
    except Exception as exc:
        print(f"export failed: {exc}", file=sys.stderr)
        return 1
    print(
        f"{args.molecule}: NORB={sidecar['norb_active']} NELEC={sidecar['nelec_active']} "
        f"E_scf={sidecar['e_scf_total']:.8f} core={sidecar['core_constant']:.8f} -> {args.out}"
    )
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
