"""Determinant full CI over the active space, used to validate exported integrals.

Works in the spin-orbital picture (alpha block then beta block) built from the
spatial chemist integrals, diagonalizing within a fixed (n_alpha, n_beta)
sector. Small active spaces only; this is an oracle, not a solver.
"""

from __future__ import annotations

from itertools import combinations

import numpy as np


def spin_expand(h_sp: np.ndarray, chem: np.ndarray):
    """Spatial chemist integrals -> spin-orbital (h, g) with
    H = sum h a+a + 1/2 sum g[c,d,e,f] a+_c a+_d a_e a_f."""
    n = h_sp.shape[0]
    m = 2 * n
    h = np.zeros((m, m))
    h[:n, :n] = h_sp
    h[n:, n:] = h_sp
    g = np.zeros((m, m, m, m))
    block = np.einsum("pqrs->prsq", chem)
    for s in (0, n):
        for t in (0, n):
            g[s : s + n, t : t + n, t : t + n, s : s + n] = block
    return h, g


def _apply(mask: int, creators, annihilators):
    sign = 1
    for p in reversed(annihilators):
        if not (mask >> p) & 1:
            return None, 0
        sign *= -1 if bin(mask & ((1 << p) - 1)).count("1") % 2 else 1
        mask ^= 1 << p
    for p in reversed(creators):
        if (mask >> p) & 1:
            return None, 0
        sign *= -1 if bin(mask & ((1 << p) - 1)).count("1") % 2 else 1
        mask |= 1 << p
    return mask, sign


def fci_ground_energy(h_sp: np.ndarray, chem: np.ndarray, n_alpha: int, n_beta: int, core: float = 0.0) -> float:
    h, g = spin_expand(h_sp, chem)
    n = h_sp.shape[0]
    alphas = [sum(1 << p for p in occ) for occ in combinations(range(n), n_alpha)]
    betas = [sum(1 << (p + n) for p in occ) for occ in combinations(range(n), n_beta)]
    basis = sorted(a | b for a in alphas for b in betas)
    index = {mask: k for k, mask in enumerate(basis)}
    dim = len(basis)

    hmat = np.zeros((dim, dim))
    h_terms = [(i, j, h[i, j]) for i in range(2 * n) for j in range(2 * n) if abs(h[i, j]) > 1e-14]
    g_terms = [
        (c, d, e, f, g[c, d, e, f])
        for c in range(2 * n)
        for d in range(2 * n)
        for e in range(2 * n)
        for f in range(2 * n)
        if abs(g[c, d, e, f]) > 1e-14
    ]
    for col, mask in enumerate(basis):
        for i, j, coef in h_terms:
            new, sign = _apply(mask, (i,), (j,))
            if new is not None and new in index:
                hmat[index[new], col] += coef * sign
        for c, d, e, f, coef in g_terms:
            new, sign = _apply(mask, (c, d), (e, f))
            if new is not None and new in index:
                hmat[index[new], col] += 0.5 * coef * sign
    return float(np.linalg.eigvalsh(hmat)[0]) + core
