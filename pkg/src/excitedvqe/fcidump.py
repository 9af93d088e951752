"""FCIDUMP reader/writer.

Records are ``value i j k l`` with 1-based chemists'-notation indices:
``i j k l`` two-electron, ``i j 0 0`` one-electron, ``0 0 0 0`` nuclear repulsion.
Orbital-energy records ``i 0 0 0`` are accepted and ignored. A nonstandard
``ECORE`` header key carries a frozen-core shift so folded integrals round-trip.
"""

from __future__ import annotations

import re
from pathlib import Path

import numpy as np

from .scf import MOIntegrals


class FCIDUMPError(ValueError):
    def __init__(self, message, line: int | None = None):
        self.line = line
        super().__init__(message if line is None else f"line {line}: {message}")


_HEADER_END = re.compile(r"(&END|/)\s*$", re.IGNORECASE)


def _parse_header(text: str) -> dict[str, list[str]]:
    body = re.sub(r"^\s*&FCI", "", text, flags=re.IGNORECASE)
    body = re.sub(r"(&END|/)\s*$", "", body.strip(), flags=re.IGNORECASE)
    fields: dict[str, list[str]] = {}
    key = None
    for token in re.split(r"[,\s]+", body):
        if not token:
            continue
        if "=" in token:
            key, _, value = token.partition("=")
            key = key.upper()
            fields[key] = [value] if value else []
        elif key is not None:
            fields[key].append(token)
    return fields


def _float(token: str) -> float:
    return float(token.replace("D", "E").replace("d", "e"))


def read_fcidump(path) -> MOIntegrals:
    lines = Path(path).read_text().splitlines()
    header_lines, start = [], None
    for n, line in enumerate(lines):
        header_lines.append(line)
        if _HEADER_END.search(line.strip()) or line.strip().upper().startswith("&END"):
            start = n + 1
            break
    if start is None:
        raise FCIDUMPError("header terminator (&END or /) not found")
    fields = _parse_header(" ".join(header_lines))
    try:
        norb = int(fields["NORB"][0])
    except (KeyError, IndexError, ValueError):
        raise FCIDUMPError("header lacks a valid NORB", 1) from None
    nelec = int(fields["NELEC"][0]) if fields.get("NELEC") else None
    ms2 = int(fields["MS2"][0]) if fields.get("MS2") else None
    orbsym = tuple(int(x) for x in fields["ORBSYM"]) if fields.get("ORBSYM") else None
    e_core = _float(fields["ECORE"][0]) if fields.get("ECORE") else 0.0

    h = np.zeros((norb, norb))
    g = np.zeros((norb, norb, norb, norb))
    e_nuc = 0.0
    for n, line in enumerate(lines[start:], start=start + 1):
        parts = line.split()
        if not parts:
            continue
        if len(parts) != 5:
            raise FCIDUMPError(f"expected 5 fields, got {len(parts)}", n)
        try:
            value = _float(parts[0])
            i, j, k, l = (int(x) for x in parts[1:])
        except ValueError:
            raise FCIDUMPError(f"malformed record {line.strip()!r}", n) from None
        if max(i, j, k, l) > norb or min(i, j, k, l) < 0:
            raise FCIDUMPError(f"index out of range for NORB={norb}", n)
        if i and j and k and l:
            p, q, r, s = i - 1, j - 1, k - 1, l - 1
            for a, b, c, d in ((p, q, r, s), (q, p, r, s), (p, q, s, r), (q, p, s, r)):
                g[a, b, c, d] = value
                g[c, d, a, b] = value
        elif i and j and not k and not l:
            h[i - 1, j - 1] = h[j - 1, i - 1] = value
        elif not (i or j or k or l):
            e_nuc = value
        elif i and not (j or k or l):
            continue
        else:
            raise FCIDUMPError(f"unrecognized index pattern {i} {j} {k} {l}", n)
    return MOIntegrals(h=h, g=g, e_nuc=e_nuc, e_core=e_core, n_electrons=nelec, ms2=ms2, orbsym=orbsym)


def write_fcidump(path, mo: MOIntegrals, n_electrons: int | None = None, ms2: int | None = None,
                  tol: float = 0.0) -> None:
    """Write the unique elements; 17 significant digits make the text round-trip bit-exact."""
    n = mo.n_orb
    nelec = n_electrons if n_electrons is not None else (mo.n_electrons or 0)
    ms = ms2 if ms2 is not None else (mo.ms2 or 0)
    orbsym = mo.orbsym or (1,) * n
    out = [f"&FCI NORB={n},NELEC={nelec},MS2={ms},",
           "  ORBSYM=" + ",".join(str(x) for x in orbsym) + ",",
           "  ISYM=1,"]
    if mo.e_core:
        out.append(f"  ECORE={mo.e_core:.16e},")
    out.append("&END")
    fmt = "{:24.16e} {:4d} {:4d} {:4d} {:4d}"
    g = mo.g
    for i in range(n):
        for j in range(i + 1):
            ij = i * (i + 1) // 2 + j
            for k in range(n):
                for l in range(k + 1):
                    if k * (k + 1) // 2 + l > ij:
                        continue
                    v = g[i, j, k, l]
                    if abs(v) > tol:
                        out.append(fmt.format(v, i + 1, j + 1, k + 1, l + 1))
    for i in range(n):
        for j in range(i + 1):
            if abs(mo.h[i, j]) > tol:
                out.append(fmt.format(mo.h[i, j], i + 1, j + 1, 0, 0))
    out.append(fmt.format(mo.e_nuc, 0, 0, 0, 0))
    Path(path).write_text("\n".join(out) + "\n")
