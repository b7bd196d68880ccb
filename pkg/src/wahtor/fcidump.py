"""FCIDUMP reading and writing.

FCIDUMP stores spatial-orbital integrals in chemist notation (ij|kl) with
1-based indices; records with trailing zero indices carry the one-body
integrals ("v i j 0 0") and the core constant ("v 0 0 0 0"). On read the
integrals are expanded to spin orbitals (up block then down block) and
reordered to the physicist two-body tensor used by :class:`FermionHamiltonian`:

    g[p_s, r_t, s_t, q_s] = (pq|rs)   for spins s, t.
"""

from __future__ import annotations

import re

import numpy as np

from .errors import FcidumpError
from .fermion import FermionHamiltonian

_EIGHTFOLD = (
    lambda i, j, k, l: (i, j, k, l),
    lambda i, j, k, l: (j, i, k, l),
    lambda i, j, k, l: (i, j, l, k),
    lambda i, j, k, l: (j, i, l, k),
    lambda i, j, k, l: (k, l, i, j),
    lambda i, j, k, l: (l, k, i, j),
    lambda i, j, k, l: (k, l, j, i),
    lambda i, j, k, l: (l, k, j, i),
)


def _parse_header(lines):
    """Consume the &FCI ... &END namelist; returns (metadata, next line index)."""
    text = []
    end = None
    for ln, raw in enumerate(lines):
        text.append(raw)
        stripped = raw.strip().upper().replace("&END", "/")
        if stripped.endswith("/") or stripped == "/":
            end = ln
            break
    if end is None:
        raise FcidumpError("header namelist never terminated (&END or / missing)")
    blob = " ".join(text)
    blob = re.sub(r"^\s*&FCI", " ", blob, flags=re.IGNORECASE)
    meta = {}
    for key, value in re.findall(r"([A-Za-z0-9_]+)\s*=\s*([^=,&/]+)", blob):
        meta[key.upper()] = value.strip().rstrip(",").strip()
    if "NORB" not in meta:
        raise FcidumpError("missing NORB in header", line=end + 1)
    try:
        meta["NORB"] = int(meta["NORB"])
    except ValueError as exc:
        raise FcidumpError(f"NORB is not an integer: {meta['NORB']!r}", line=end + 1) from exc
    for key in ("NELEC", "MS2"):
        if key in meta:
            try:
                meta[key] = int(str(meta[key]).split()[0])
            except ValueError as exc:
                raise FcidumpError(f"{key} is not an integer", line=end + 1) from exc
    if "ORBSYM" in meta:
        labels = [s for s in str(meta["ORBSYM"]).replace(",", " ").split() if s]
        meta["ORBSYM"] = [int(s) for s in labels]
    return meta, end + 1


def read_fcidump(text: str) -> tuple[FermionHamiltonian, dict]:
    """Parse FCIDUMP text into a spin-orbital Hamiltonian plus header metadata."""
    lines = text.splitlines()
    meta, start = _parse_header(lines)
    norb = meta["NORB"]
    if norb < 1:
        raise FcidumpError(f"NORB must be positive, got {norb}")

    h_sp = np.zeros((norb, norb))
    chem = np.zeros((norb, norb, norb, norb))
    core = 0.0

    for ln in range(start, len(lines)):
        fields = lines[ln].split()
        if not fields:
            continue
        if len(fields) != 5:
            raise FcidumpError(f"expected 'value i j k l', got {lines[ln]!r}", line=ln + 1)
        try:
            value = float(fields[0].replace("D", "E").replace("d", "e"))
            i, j, k, l = (int(s) for s in fields[1:])
        except ValueError as exc:
            raise FcidumpError(f"non-numeric record {lines[ln]!r}", line=ln + 1) from exc
        for idx in (i, j, k, l):
            if idx < 0 or idx > norb:
                raise FcidumpError(f"orbital index {idx} out of range 0..{norb}", line=ln + 1)
        if i == 0 and j == 0 and k == 0 and l == 0:
            core = value
        elif k == 0 and l == 0:
            if i == 0:
                raise FcidumpError(f"malformed index pattern {lines[ln]!r}", line=ln + 1)
            if j == 0:
                continue  # orbital-energy record, not part of the Hamiltonian
            h_sp[i - 1, j - 1] = value
            h_sp[j - 1, i - 1] = value
        elif i == 0 or j == 0 or k == 0 or l == 0:
            raise FcidumpError(f"malformed index pattern {lines[ln]!r}", line=ln + 1)
        else:
            a, b, c, d = i - 1, j - 1, k - 1, l - 1
            for perm in _EIGHTFOLD:
                chem[perm(a, b, c, d)] = value

    return _spin_expand(norb, core, h_sp, chem), meta


def parse_fcidump(text: str) -> FermionHamiltonian:
    """FCIDUMP text -> FermionHamiltonian (header metadata dropped)."""
    ham, _ = read_fcidump(text)
    return ham


def _spin_expand(norb: int, core: float, h_sp: np.ndarray, chem: np.ndarray) -> FermionHamiltonian:
    n = 2 * norb
    h = np.zeros((n, n), dtype=complex)
    h[:norb, :norb] = h_sp
    h[norb:, norb:] = h_sp

    g = np.zeros((n, n, n, n), dtype=complex)
    # g[p_s, r_t, s_t, q_s] = (pq|rs); insert the chemist tensor per spin block
    block = np.einsum("pqrs->prsq", chem)
    for s in (0, norb):
        for t in (0, norb):
            g[s : s + norb, t : t + norb, t : t + norb, s : s + norb] = block
    return FermionHamiltonian(n, core, h, g)


def spatial_parts(ham: FermionHamiltonian) -> tuple[float, np.ndarray, np.ndarray]:
    """Recover (core, spatial h, chemist (ij|kl)) from a spin-symmetric Hamiltonian."""
    norb = ham.n_spatial
    h_sp = ham.h[:norb, :norb]
    if not np.allclose(h_sp, ham.h[norb:, norb:], atol=1e-12):
        raise FcidumpError("Hamiltonian is not spin-symmetric; cannot write FCIDUMP")
    if np.abs(ham.h[:norb, norb:]).max(initial=0.0) > 1e-12:
        raise FcidumpError("Hamiltonian mixes spin blocks; cannot write FCIDUMP")
    # the up-down block of g is pure Coulomb: g[p_u, r_d, s_d, q_u] = (pq|rs)
    block = ham.g[:norb, norb:, norb:, :norb]
    chem = np.einsum("prsq->pqrs", block)
    if np.abs(h_sp.imag).max(initial=0.0) > 1e-12 or np.abs(chem.imag).max(initial=0.0) > 1e-12:
        raise FcidumpError("complex integrals cannot be written to FCIDUMP")
    return ham.core_energy, h_sp.real.copy(), chem.real.copy()


def write_fcidump(ham: FermionHamiltonian, nelec: int, ms2: int = 0, orbsym=None) -> str:
    """Serialize a spin-symmetric Hamiltonian as FCIDUMP text (8-fold unique records)."""
    core, h_sp, chem = spatial_parts(ham)
    norb = ham.n_spatial
    if orbsym is None:
        orbsym = [1] * norb

    out = [
        f"&FCI NORB={norb},NELEC={nelec},MS2={ms2},",
        " ORBSYM=" + ",".join(str(s) for s in orbsym) + ",",
        " ISYM=1,",
        "&END",
    ]

    def emit(value, i, j, k, l):
        out.append(f" {value: .16E} {i:4d} {j:4d} {k:4d} {l:4d}")

    seen = set()
    for i in range(norb):
        for j in range(i + 1):
            for k in range(norb):
                for l in range(k + 1):
                    if (i, j) < (k, l):
                        continue
                    key = (i, j, k, l)
                    if key in seen:
                        continue
                    seen.add(key)
                    value = chem[i, j, k, l]
                    if abs(value) > 1e-14:
                        emit(value, i + 1, j + 1, k + 1, l + 1)
    for i in range(norb):
        for j in range(i + 1):
            if abs(h_sp[i, j]) > 1e-14:
                emit(h_sp[i, j], i + 1, j + 1, 0, 0)
    emit(core, 0, 0, 0, 0)
    return "\n".join(out) + "\n"
