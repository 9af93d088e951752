"""Pauli-sum operators and the Jordan-Wigner map.

A Pauli string is held as an ``(x, z)`` pair of bit masks denoting
``prod_q i^(x_q z_q) X_q^(x_q) Z_q^(z_q)``, so X=(1,0), Y=(1,1), Z=(0,1) per qubit.
The public ``terms`` view uses sorted ``((qubit, letter), ...)`` tuples.
"""

from __future__ import annotations

from collections import defaultdict
from functools import lru_cache

import numpy as np
import scipy.sparse as sp

from .fermion import FermionOperator, PRUNE

_LETTERS = {(1, 0): "X", (1, 1): "Y", (0, 1): "Z"}
_BITS = {"X": (1, 0), "Y": (1, 1), "Z": (0, 1)}
_IPOW = (1, 1j, -1, -1j)


def _popcount(v: int) -> int:
    return bin(v).count("1")


def pauli_product(x1, z1, x2, z2):
    """Return (phase, x, z) with P(x1,z1) P(x2,z2) = phase * P(x, z)."""
    x, z = x1 ^ x2, z1 ^ z2
    k = _popcount(x1 & z1) + _popcount(x2 & z2) - _popcount(x & z) + 2 * _popcount(z1 & x2)
    return _IPOW[k % 4], x, z


def masks_to_string(x: int, z: int) -> tuple:
    out = []
    q, m = 0, x | z
    while m >> q:
        if (m >> q) & 1:
            out.append((q, _LETTERS[((x >> q) & 1, (z >> q) & 1)]))
        q += 1
    return tuple(out)


def string_to_masks(pauli) -> tuple[int, int]:
    x = z = 0
    for q, letter in pauli:
        if letter == "I":
            continue
        bx, bz = _BITS[letter]
        x |= bx << q
        z |= bz << q
    return x, z


class QubitOperator:
    __slots__ = ("_terms", "n_qubits", "_sparse_cache")

    def __init__(self, n_qubits: int, terms=None):
        self.n_qubits = int(n_qubits)
        self._terms: dict[tuple[int, int], complex] = {}
        self._sparse_cache = None
        if terms:
            for key, c in terms.items():
                if abs(c) >= PRUNE:
                    self._terms[key] = complex(c)
        limit = 1 << self.n_qubits
        for x, z in self._terms:
            if x >= limit or z >= limit:
                raise ValueError("Pauli string acts outside the register")

    @classmethod
    def from_strings(cls, n_qubits, strings: dict) -> "QubitOperator":
        """``{((0, 'X'), (2, 'Z')): coeff, ...}`` or ``{'X0 Z2': coeff}``; ``()`` / ``''`` is identity."""
        acc = defaultdict(complex)
        for key, c in strings.items():
            if isinstance(key, str):
                key = tuple((int(tok[1:]), tok[0]) for tok in key.split() if tok != "I")
            acc[string_to_masks(key)] += c
        return cls(n_qubits, acc)

    @classmethod
    def identity(cls, n_qubits, coefficient=1.0):
        return cls(n_qubits, {(0, 0): coefficient})

    @property
    def terms(self) -> dict:
        return {masks_to_string(x, z): c for (x, z), c in self._terms.items()}

    @property
    def mask_terms(self) -> dict:
        return dict(self._terms)

    def __len__(self):
        return len(self._terms)

    def __repr__(self):
        return f"QubitOperator(n_qubits={self.n_qubits}, n_terms={len(self)})"

    def constant(self) -> complex:
        return self._terms.get((0, 0), 0.0)

    def _check(self, other):
        if other.n_qubits != self.n_qubits:
            raise ValueError("qubit count mismatch")

    def __add__(self, other):
        if not isinstance(other, QubitOperator):
            other = QubitOperator.identity(self.n_qubits, other)
        self._check(other)
        acc = defaultdict(complex, self._terms)
        for k, v in other._terms.items():
            acc[k] += v
        return QubitOperator(self.n_qubits, acc)

    __radd__ = __add__

    def __neg__(self):
        return self * -1

    def __sub__(self, other):
        return self + (-other if isinstance(other, QubitOperator) else -other)

    def __mul__(self, other):
        if isinstance(other, QubitOperator):
            self._check(other)
            acc = defaultdict(complex)
            for (x1, z1), c1 in self._terms.items():
                for (x2, z2), c2 in other._terms.items():
                    ph, x, z = pauli_product(x1, z1, x2, z2)
                    acc[(x, z)] += ph * c1 * c2
            return QubitOperator(self.n_qubits, acc)
        return QubitOperator(self.n_qubits, {k: v * other for k, v in self._terms.items()})

    def __rmul__(self, other):
        return self * other

    def adjoint(self) -> "QubitOperator":
        return QubitOperator(self.n_qubits, {k: np.conj(v) for k, v in self._terms.items()})

    def commutator(self, other) -> "QubitOperator":
        return self * other - other * self

    def norm(self) -> float:
        """Sum of absolute coefficients (term norm)."""
        return float(sum(abs(c) for c in self._terms.values()))

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        # Pauli strings are Hermitian and independent, so closure under conjugation
        # reduces to real coefficients
        return all(abs(c.imag) <= tol for c in self._terms.values())

    def is_anti_hermitian(self, tol: float = 1e-12) -> bool:
        return all(abs(c.real) <= tol for c in self._terms.values())

    def to_sparse(self, basis=None) -> sp.csr_matrix:
        """Matrix in the computational basis; ``basis`` restricts rows/columns to given indices."""
        if basis is None and self._sparse_cache is not None:
            return self._sparse_cache
        if basis is None:
            cols = np.arange(1 << self.n_qubits, dtype=np.int64)
        else:
            cols = np.asarray(basis, dtype=np.int64)
        by_x = defaultdict(list)
        for (x, z), c in self._terms.items():
            by_x[x].append((z, c * _IPOW[_popcount(x & z) % 4]))
        rows_out, cols_out, vals_out = [], [], []
        pos = np.arange(len(cols))
        for x, zs in by_x.items():
            vals = np.zeros(len(cols), dtype=complex)
            for z, c in zs:
                parity = np.bitwise_count(cols & z) & 1
                vals += c * (1 - 2 * parity.astype(np.int64))
            targets = cols ^ x
            if basis is None:
                r = targets
                keep = np.ones(len(cols), dtype=bool)
            else:
                r = np.searchsorted(cols, targets)
                r = np.minimum(r, len(cols) - 1)
                keep = cols[r] == targets
            keep &= vals != 0
            rows_out.append(r[keep])
            cols_out.append(pos[keep])
            vals_out.append(vals[keep])
        dim = len(cols)
        if not rows_out:
            mat = sp.csr_matrix((dim, dim), dtype=complex)
        else:
            mat = sp.csr_matrix(
                (np.concatenate(vals_out), (np.concatenate(rows_out), np.concatenate(cols_out))),
                shape=(dim, dim),
            )
        if basis is None:
            self._sparse_cache = mat
        return mat

    def to_text(self) -> str:
        lines = []
        for (x, z), c in sorted(self._terms.items()):
            label = " ".join(f"{l}{q}" for q, l in masks_to_string(x, z)) or "I"
            lines.append(f"{c.real:.17g} {c.imag:.17g} {label}")
        return "\n".join(lines) + ("\n" if lines else "")

    @classmethod
    def from_text(cls, n_qubits, text: str) -> "QubitOperator":
        strings = {}
        for line in text.splitlines():
            if not line.strip():
                continue
            re_, im_, *label = line.split()
            key = " ".join(label)
            strings[key if key != "I" else ""] = strings.get(key, 0) + complex(float(re_), float(im_))
        return cls.from_strings(n_qubits, strings)


@lru_cache(maxsize=None)
def _ladder(p: int, creation: bool):
    zs = (1 << p) - 1
    xp = 1 << p
    return ((xp, zs, 0.5), (xp, zs | xp, -0.5j if creation else 0.5j))


def jordan_wigner(op: FermionOperator, n_qubits: int) -> QubitOperator:
    """a_p -> Z_0 ... Z_{p-1} (X_p + i Y_p) / 2."""
    if op.max_mode() >= n_qubits:
        raise ValueError(f"mode {op.max_mode()} does not fit in {n_qubits} qubits")
    acc = defaultdict(complex)
    for term, coef in op:
        partial = {(0, 0): coef}
        for p, dag in term:
            nxt = defaultdict(complex)
            for (x1, z1), c1 in partial.items():
                for x2, z2, c2 in _ladder(p, dag):
                    ph, x, z = pauli_product(x1, z1, x2, z2)
                    nxt[(x, z)] += ph * c1 * c2
            partial = nxt
        for k, v in partial.items():
            acc[k] += v
    return QubitOperator(n_qubits, acc)
