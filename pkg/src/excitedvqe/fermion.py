"""Fermionic operators over spin orbitals.

Spin orbital ``2*i`` is the alpha and ``2*i + 1`` the beta partner of spatial
orbital ``i``. Terms are tuples of ``(mode, is_creation)`` read left to right.
"""

from __future__ import annotations

from collections import defaultdict

import numpy as np
import scipy.sparse as sp

PRUNE = 1e-14


def alpha(i: int) -> int:
    return 2 * i


def beta(i: int) -> int:
    return 2 * i + 1


class FermionOperator:
    __slots__ = ("_terms",)

    def __init__(self, term=None, coefficient: complex = 1.0):
        self._terms: dict[tuple, complex] = {}
        if term is not None:
            self._terms[tuple((int(p), bool(c)) for p, c in term)] = complex(coefficient)

    @classmethod
    def from_terms(cls, terms) -> "FermionOperator":
        op = cls()
        op._terms = {k: complex(v) for k, v in terms.items() if abs(v) >= PRUNE}
        return op

    @classmethod
    def identity(cls, coefficient: complex = 1.0) -> "FermionOperator":
        return cls((), coefficient)

    @property
    def terms(self) -> dict:
        return dict(self._terms)

    def __len__(self):
        return len(self._terms)

    def __iter__(self):
        return iter(self._terms.items())

    def __repr__(self):
        if not self._terms:
            return "FermionOperator(0)"
        parts = []
        for term, c in self._terms.items():
            ops = " ".join(f"{p}^" if dag else f"{p}" for p, dag in term)
            parts.append(f"({c:.6g}) [{ops}]")
        return " +\n".join(parts)

    def _combine(self, other, sign):
        acc = defaultdict(complex, self._terms)
        for k, v in other._terms.items():
            acc[k] += sign * v
        return FermionOperator.from_terms(acc)

    def __add__(self, other):
        if not isinstance(other, FermionOperator):
            other = FermionOperator.identity(other)
        return self._combine(other, 1)

    __radd__ = __add__

    def __sub__(self, other):
        if not isinstance(other, FermionOperator):
            other = FermionOperator.identity(other)
        return self._combine(other, -1)

    def __neg__(self):
        return self * -1

    def __mul__(self, other):
        if isinstance(other, FermionOperator):
            acc = defaultdict(complex)
            for k1, v1 in self._terms.items():
                for k2, v2 in other._terms.items():
                    acc[k1 + k2] += v1 * v2
            return FermionOperator.from_terms(acc)
        return FermionOperator.from_terms({k: v * other for k, v in self._terms.items()})

    def __rmul__(self, other):
        return self * other

    def adjoint(self) -> "FermionOperator":
        return FermionOperator.from_terms(
            {tuple((p, not c) for p, c in reversed(k)): np.conj(v) for k, v in self._terms.items()}
        )

    def max_mode(self) -> int:
        return max((p for k in self._terms for p, _ in k), default=-1)

    def normal_ordered(self) -> "FermionOperator":
        acc = defaultdict(complex)
        for term, coef in self._terms.items():
            _normal_order_term(list(term), coef, acc)
        return FermionOperator.from_terms(acc)

    def is_zero(self, tol: float = PRUNE) -> bool:
        return all(abs(v) < tol for v in self.normal_ordered()._terms.values())

    def to_matrix(self, n_modes: int) -> sp.csr_matrix:
        """Matrix over the 2**n_modes occupation basis, computed directly from ladder actions.

        Determinant ``|x>`` is ``a+_{i1} a+_{i2} ... |vac>`` with ascending ``i``; bit ``p``
        of ``x`` is the occupation of mode ``p``.
        """
        if self.max_mode() >= n_modes:
            raise ValueError(f"operator acts on mode {self.max_mode()} >= {n_modes}")
        dim = 1 << n_modes
        cols_all = np.arange(dim, dtype=np.int64)
        rows, cols, vals = [], [], []
        for term, coef in self._terms.items():
            state = cols_all.copy()
            amp = np.full(dim, coef, dtype=complex)
            alive = np.ones(dim, dtype=bool)
            for p, dag in reversed(term):
                bit = (state >> p) & 1
                alive &= (bit == 0) if dag else (bit == 1)
                below = np.bitwise_count(state & ((1 << p) - 1)).astype(np.int64)
                amp *= 1 - 2 * (below & 1)
                state = state ^ (1 << p)
            rows.append(state[alive])
            cols.append(cols_all[alive])
            vals.append(amp[alive])
        if not rows:
            return sp.csr_matrix((dim, dim), dtype=complex)
        return sp.csr_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(dim, dim)
        )


def _normal_order_term(term, coef, acc):
    """Creation operators left, each group in descending mode order."""
    for i in range(1, len(term)):
        for j in range(i, 0, -1):
            right, left = term[j], term[j - 1]
            if right[1] and not left[1]:
                term[j - 1], term[j] = right, left
                coef = -coef
                if right[0] == left[0]:
                    _normal_order_term(term[: j - 1] + term[j + 1:], -coef, acc)
            elif right[1] == left[1]:
                if right[0] == left[0]:
                    return
                if right[0] > left[0]:
                    term[j - 1], term[j] = right, left
                    coef = -coef
    acc[tuple(term)] += coef


def excitation(created, annihilated, coefficient=1.0) -> FermionOperator:
    """``a+_{c0} a+_{c1} ... a_{a_last} ... a_{a0}``: annihilate in order ``annihilated``."""
    ops = [(c, True) for c in created] + [(a, False) for a in reversed(annihilated)]
    return FermionOperator(ops, coefficient)


def anti_hermitian_generator(t: FermionOperator) -> FermionOperator:
    return (t - t.adjoint()).normal_ordered()


def build_hamiltonian(mo) -> FermionOperator:
    """H = E_const + sum h_pq a+_p a_q + 1/2 sum (pq|rs) a+_p a+_r a_s a_q (spin summed)."""
    n = mo.n_orb
    h, g = mo.h, mo.g
    acc = defaultdict(complex)
    const = mo.e_nuc + mo.e_core
    if const:
        acc[()] += const
    for p in range(n):
        for q in range(n):
            if h[p, q] != 0.0:
                for s in (0, 1):
                    acc[((2 * p + s, True), (2 * q + s, False))] += h[p, q]
    # chemists' (pq|rs) -> physicists' <pr|qs>, applied once here
    for p, q, r, s in zip(*np.nonzero(g)):
        v = 0.5 * g[p, q, r, s]
        for sig in (0, 1):
            for tau in (0, 1):
                P, Q, R, S = 2 * p + sig, 2 * q + sig, 2 * r + tau, 2 * s + tau
                if P == R or Q == S:
                    continue
                acc[((P, True), (R, True), (S, False), (Q, False))] += v
    return FermionOperator.from_terms(acc).normal_ordered()


def build_number(n_spatial: int) -> FermionOperator:
    acc = {((p, True), (p, False)): 1.0 for p in range(2 * n_spatial)}
    return FermionOperator.from_terms(acc)


def build_sz(n_spatial: int) -> FermionOperator:
    acc = {}
    for i in range(n_spatial):
        acc[((alpha(i), True), (alpha(i), False))] = 0.5
        acc[((beta(i), True), (beta(i), False))] = -0.5
    return FermionOperator.from_terms(acc)


def build_s_plus(n_spatial: int) -> FermionOperator:
    return FermionOperator.from_terms(
        {((alpha(i), True), (beta(i), False)): 1.0 for i in range(n_spatial)}
    )


def build_s2(n_spatial: int) -> FermionOperator:
    """S^2 = S- S+ + Sz (Sz + 1)."""
    if n_spatial < 1:
        raise ValueError("need at least one spatial orbital")
    sp_ = build_s_plus(n_spatial)
    sz = build_sz(n_spatial)
    return (sp_.adjoint() * sp_ + sz * sz + sz).normal_ordered()
