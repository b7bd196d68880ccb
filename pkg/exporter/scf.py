"""Restricted Hartree-Fock and the active-space (frozen-core) reduction."""

from __future__ import annotations

import numpy as np

from integrals import BasisSet, nuclear_repulsion
from sto3g import ANGSTROM_TO_BOHR, CHARGES, shells_for


class ScfError(RuntimeError):
    pass


class Molecule:
    def __init__(self, symbols, coords_angstrom, n_frozen_core=0):
        self.symbols = list(symbols)
        coords = np.asarray(coords_angstrom, dtype=float)
        if not np.all(np.isfinite(coords)):
            raise ValueError("coordinates must be finite")
        self.coords = coords * ANGSTROM_TO_BOHR
        self.n_frozen_core = n_frozen_core
        self.n_electrons = sum(CHARGES[s] for s in self.symbols)
        if self.n_electrons % 2:
            raise ScfError("restricted HF needs an even electron count")
        self.basis = BasisSet(shells_for(self.symbols, self.coords))

    @property
    def n_occ(self) -> int:
        return self.n_electrons // 2

    def e_nuclear(self) -> float:
        return nuclear_repulsion(self.symbols, self.coords, CHARGES)


def run_rhf(mol: Molecule, max_cycles=200, e_tol=1e-11, d_tol=1e-9):
    """Closed-shell SCF with DIIS; returns (e_total, mo_energies, C, hcore, eri)."""
    s = mol.basis.overlap()
    hcore = mol.basis.kinetic() + mol.basis.nuclear(mol.symbols, mol.coords, CHARGES)
    eri = mol.basis.eri()
    e_nuc = mol.e_nuclear()

    vals, vecs = np.linalg.eigh(s)
    if vals.min() < 1e-10:
        raise ScfError("overlap matrix is numerically singular")
    s_inv_half = (vecs / np.sqrt(vals)) @ vecs.T

    def density_from(fock):
        f_ortho = s_inv_half @ fock @ s_inv_half
        mo_e, c_ortho = np.linalg.eigh(f_ortho)
        c = s_inv_half @ c_ortho
        occ = c[:, : mol.n_occ]
        return 2.0 * occ @ occ.T, mo_e, c

    density, _, _ = density_from(hcore)
    energy = 0.0
    fock_history, error_history = [], []

    for cycle in range(max_cycles):
        j = np.einsum("ls,mnls->mn", density, eri, optimize=True)
        k = np.einsum("ls,mlns->mn", density, eri, optimize=True)
        fock = hcore + j - 0.5 * k

        # DIIS on the orthonormalized gradient FDS - SDF
        residual = fock @ density @ s - s @ density @ fock
        residual = s_inv_half @ residual @ s_inv_half
        fock_history.append(fock)
        error_history.append(residual)
        if len(fock_history) > 8:
            fock_history.pop(0)
            error_history.pop(0)
        if len(fock_history) > 1:
            m = len(fock_history)
            b = -np.ones((m + 1, m + 1))
            b[m, m] = 0.0
            for p in range(m):
                for q in range(m):
                    b[p, q] = np.sum(error_history[p] * error_history[q])
            rhs = np.zeros(m + 1)
            rhs[m] = -1.0
            try:
                weights = np.linalg.solve(b, rhs)[:m]
                fock = sum(w * f for w, f in zip(weights, fock_history))
            except np.linalg.LinAlgError:
                pass

        new_density, mo_e, c = density_from(fock)
        e_elec = 0.5 * np.sum(density * (hcore + (hcore + j - 0.5 * k)))
        e_total = e_elec + e_nuc
        d_change = np.abs(new_density - density).max()
        if cycle > 0 and abs(e_total - energy) < e_tol and d_change < d_tol:
            return e_total, mo_e, c, hcore, eri
        density, energy = new_density, e_total

    raise ScfError(f"SCF did not converge in {max_cycles} cycles (last E = {energy:.10f})")


def mo_integrals(c: np.ndarray, hcore: np.ndarray, eri: np.ndarray):
    """AO -> MO transformation; chemist ordering is preserved."""
    h_mo = c.T @ hcore @ c
    tmp = np.einsum("mp,mnls->pnls", c, eri, optimize=True)
    tmp = np.einsum("nq,pnls->pqls", c, tmp, optimize=True)
    tmp = np.einsum("lr,pqls->pqrs", c, tmp, optimize=True)
    eri_mo = np.einsum("st,pqrs->pqrt", c, tmp, optimize=True)
    return h_mo, eri_mo


def freeze_core(h_mo: np.ndarray, eri_mo: np.ndarray, n_frozen: int):
    """Fold doubly occupied core MOs into an effective one-body term and a constant."""
    core = list(range(n_frozen))
    e_frozen = 0.0
    for c in core:
        e_frozen += 2.0 * h_mo[c, c]
        for c2 in core:
            e_frozen += 2.0 * eri_mo[c, c, c2, c2] - eri_mo[c, c2, c2, c]

    n = h_mo.shape[0]
    h_eff = h_mo.copy()
    for c in core:
        h_eff += 2.0 * eri_mo[:, :, c, c] - eri_mo[:, c, c, :]
    active = slice(n_frozen, n)
    return e_frozen, h_eff[active, active], eri_mo[active, active, active, active]
