"""Gaussian one- and two-electron integrals (McMurchie-Davidson scheme).

Everything works in atomic units. Contracted functions are renormalized
numerically so the overlap matrix has a unit diagonal regardless of how the
published contraction coefficients were scaled.
"""

from __future__ import annotations

from math import exp, pi, sqrt

import numpy as np
from scipy.special import hyp1f1


def boys(n: int, x: float) -> float:
    return hyp1f1(n + 0.5, n + 1.5, -x) / (2.0 * n + 1.0)


def hermite_coef(i: int, j: int, t: int, q_dist: float, a: float, b: float) -> float:
    """Expansion coefficient of a Gaussian product in Hermite Gaussians."""
    p = a + b
    mu = a * b / p
    if t < 0 or t > i + j:
        return 0.0
    if i == j == t == 0:
        return exp(-mu * q_dist * q_dist)
    if i > 0:
        return (
            hermite_coef(i - 1, j, t - 1, q_dist, a, b) / (2 * p)
            - (mu * q_dist / a) * hermite_coef(i - 1, j, t, q_dist, a, b)
            + (t + 1) * hermite_coef(i - 1, j, t + 1, q_dist, a, b)
        )
    return (
        hermite_coef(i, j - 1, t - 1, q_dist, a, b) / (2 * p)
        + (mu * q_dist / b) * hermite_coef(i, j - 1, t, q_dist, a, b)
        + (t + 1) * hermite_coef(i, j - 1, t + 1, q_dist, a, b)
    )


def hermite_coulomb(t: int, u: int, v: int, n: int, p: float, dx, dy, dz, dist2) -> float:
    """Auxiliary Hermite Coulomb integral R^n_{tuv}."""
    if t == u == v == 0:
        return (-2.0 * p) ** n * boys(n, p * dist2)
    if t > 0:
        value = dx * hermite_coulomb(t - 1, u, v, n + 1, p, dx, dy, dz, dist2)
        if t > 1:
            value += (t - 1) * hermite_coulomb(t - 2, u, v, n + 1, p, dx, dy, dz, dist2)
        return value
    if u > 0:
        value = dy * hermite_coulomb(t, u - 1, v, n + 1, p, dx, dy, dz, dist2)
        if u > 1:
            value += (u - 1) * hermite_coulomb(t, u - 2, v, n + 1, p, dx, dy, dz, dist2)
        return value
    value = dz * hermite_coulomb(t, u, v - 1, n + 1, p, dx, dy, dz, dist2)
    if v > 1:
        value += (v - 1) * hermite_coulomb(t, u, v - 2, n + 1, p, dx, dy, dz, dist2)
    return value


def _prim_norm(a: float, lmn) -> float:
    l, m, n = lmn
    df = lambda k: 1.0 if k < 1 else float(np.prod(np.arange(2 * k - 1, 0, -2)))
    return (
        (2 * a / pi) ** 0.75
        * (4 * a) ** ((l + m + n) / 2)
        / sqrt(df(l) * df(m) * df(n))
    )


def overlap_prim(a, lmn1, A, b, lmn2, B) -> float:
    p = a + b
    value = 1.0
    for axis in range(3):
        value *= hermite_coef(lmn1[axis], lmn2[axis], 0, A[axis] - B[axis], a, b)
    return value * (pi / p) ** 1.5


def kinetic_prim(a, lmn1, A, b, lmn2, B) -> float:
    l2, m2, n2 = lmn2

    def shifted(axis, delta):
        shifted_lmn = list(lmn2)
        shifted_lmn[axis] += delta
        if shifted_lmn[axis] < 0:
            return 0.0
        return overlap_prim(a, lmn1, A, b, tuple(shifted_lmn), B)

    term0 = b * (2 * (l2 + m2 + n2) + 3) * overlap_prim(a, lmn1, A, b, lmn2, B)
    term1 = -2.0 * b * b * (shifted(0, 2) + shifted(1, 2) + shifted(2, 2))
    term2 = -0.5 * (
        l2 * (l2 - 1) * shifted(0, -2)
        + m2 * (m2 - 1) * shifted(1, -2)
        + n2 * (n2 - 1) * shifted(2, -2)
    )
    return term0 + term1 + term2


def nuclear_prim(a, lmn1, A, b, lmn2, B, C) -> float:
    p = a + b
    P = tuple((a * A[axis] + b * B[axis]) / p for axis in range(3))
    dx, dy, dz = (P[axis] - C[axis] for axis in range(3))
    dist2 = dx * dx + dy * dy + dz * dz
    value = 0.0
    for t in range(lmn1[0] + lmn2[0] + 1):
        ex = hermite_coef(lmn1[0], lmn2[0], t, A[0] - B[0], a, b)
        for u in range(lmn1[1] + lmn2[1] + 1):
            ey = hermite_coef(lmn1[1], lmn2[1], u, A[1] - B[1], a, b)
            for v in range(lmn1[2] + lmn2[2] + 1):
                ez = hermite_coef(lmn1[2], lmn2[2], v, A[2] - B[2], a, b)
                value += ex * ey * ez * hermite_coulomb(t, u, v, 0, p, dx, dy, dz, dist2)
    return 2.0 * pi / p * value


def eri_prim(a, lmn1, A, b, lmn2, B, c, lmn3, C, d, lmn4, D) -> float:
    p = a + b
    q = c + d
    alpha = p * q / (p + q)
    P = tuple((a * A[axis] + b * B[axis]) / p for axis in range(3))
    Q = tuple((c * C[axis] + d * D[axis]) / q for axis in range(3))
    dx, dy, dz = (P[axis] - Q[axis] for axis in range(3))
    dist2 = dx * dx + dy * dy + dz * dz

    value = 0.0
    for t in range(lmn1[0] + lmn2[0] + 1):
        e1x = hermite_coef(lmn1[0], lmn2[0], t, A[0] - B[0], a, b)
        for u in range(lmn1[1] + lmn2[1] + 1):
            e1y = hermite_coef(lmn1[1], lmn2[1], u, A[1] - B[1], a, b)
            for v in range(lmn1[2] + lmn2[2] + 1):
                e1z = hermite_coef(lmn1[2], lmn2[2], v, A[2] - B[2], a, b)
                bra = e1x * e1y * e1z
                if bra == 0.0:
                    continue
                for tau in range(lmn3[0] + lmn4[0] + 1):
                    e2x = hermite_coef(lmn3[0], lmn4[0], tau, C[0] - D[0], c, d)
                    for nu in range(lmn3[1] + lmn4[1] + 1):
                        e2y = hermite_coef(lmn3[1], lmn4[1], nu, C[1] - D[1], c, d)
                        for phi in range(lmn3[2] + lmn4[2] + 1):
                            e2z = hermite_coef(lmn3[2], lmn4[2], phi, C[2] - D[2], c, d)
                            ket = e2x * e2y * e2z
                            if ket == 0.0:
                                continue
                            sign = (-1.0) ** (tau + nu + phi)
                            value += bra * ket * sign * hermite_coulomb(
                                t + tau, u + nu, v + phi, 0, alpha, dx, dy, dz, dist2
                            )
    return value * 2.0 * pi**2.5 / (p * q * sqrt(p + q))


class BasisSet:
    """Contracted basis functions with numerically normalized contractions."""

    def __init__(self, functions):
        self.functions = []
        for lmn, exps, coefs, center in functions:
            primitive = [(a, c * _prim_norm(a, lmn)) for a, c in zip(exps, coefs)]
            self_overlap = 0.0
            for a, ca in primitive:
                for b, cb in primitive:
                    self_overlap += ca * cb * overlap_prim(a, lmn, center, b, lmn, center)
            scale = 1.0 / sqrt(self_overlap)
            primitive = [(a, c * scale) for a, c in primitive]
            self.functions.append((lmn, primitive, center))

    def __len__(self):
        return len(self.functions)

    def _pairwise(self, kernel):
        n = len(self)
        out = np.zeros((n, n))
        for i, (lmn1, prim1, c1) in enumerate(self.functions):
            for j in range(i + 1):
                lmn2, prim2, c2 = self.functions[j]
                value = 0.0
                for a, ca in prim1:
                    for b, cb in prim2:
                        value += ca * cb * kernel(a, lmn1, c1, b, lmn2, c2)
                out[i, j] = out[j, i] = value
        return out

    def overlap(self) -> np.ndarray:
        return self._pairwise(overlap_prim)

    def kinetic(self) -> np.ndarray:
        return self._pairwise(kinetic_prim)

    def nuclear(self, symbols, coords, charges) -> np.ndarray:
        def kernel(a, lmn1, c1, b, lmn2, c2):
            return sum(
                -charges[s] * nuclear_prim(a, lmn1, c1, b, lmn2, c2, tuple(center))
                for s, center in zip(symbols, coords)
            )

        return self._pairwise(kernel)

    def eri(self) -> np.ndarray:
        """Chemist-notation (ij|kl) over contracted functions, 8-fold symmetric."""
        n = len(self)
        out = np.zeros((n, n, n, n))
        pair_index = lambda i, j: i * (i + 1) // 2 + j
        for i in range(n):
            for j in range(i + 1):
                for k in range(n):
                    for l in range(k + 1):
                        if pair_index(i, j) < pair_index(k, l):
                            continue
                        lmn1, prim1, c1 = self.functions[i]
                        lmn2, prim2, c2 = self.functions[j]
                        lmn3, prim3, c3 = self.functions[k]
                        lmn4, prim4, c4 = self.functions[l]
                        value = 0.0
                        for a, ca in prim1:
                            for b, cb in prim2:
                                for c, cc in prim3:
                                    for d, cd in prim4:
                                        value += ca * cb * cc * cd * eri_prim(
                                            a, lmn1, c1, b, lmn2, c2,
                                            c, lmn3, c3, d, lmn4, c4,
                                        )
                        for p, q in ((i, j), (j, i)):
                            for r, s in ((k, l), (l, k)):
                                out[p, q, r, s] = value
                                out[r, s, p, q] = value
        return out


def nuclear_repulsion(symbols, coords, charges) -> float:
    energy = 0.0
    for i in range(len(symbols)):
        for j in range(i):
            rij = np.linalg.norm(np.asarray(coords[i]) - np.asarray(coords[j]))
            energy += charges[symbols[i]] * charges[symbols[j]] / rij
    return energy
