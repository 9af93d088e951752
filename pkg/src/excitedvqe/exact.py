"""Exact-diagonalization oracles.

``fci_solve`` builds the determinant-space Hamiltonian from the integrals with
Slater-Condon rules; ``qubit_space_diagonalize`` takes the encoded qubit
operator instead. The two share no code beyond numpy, so agreement between
them checks the whole integrals -> operator -> encoding chain.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import expm_multiply

from .fermion import FermionOperator, excitation
from .qubit import QubitOperator, jordan_wigner
from .scf import MOIntegrals
from .statesim import Statevector

MAX_DENSE_DIM = 20000


class SectorError(ValueError):
    pass


def _sign_below(det: int, p: int) -> int:
    return -1 if bin(det & ((1 << p) - 1)).count("1") & 1 else 1


def apply_ladder(det: int, ops) -> tuple[int, int]:
    """Apply ``[(mode, is_creation), ...]`` right to left; returns (sign, det) or (0, -1)."""
    sign = 1
    for p, dag in reversed(ops):
        occupied = (det >> p) & 1
        if occupied == dag:
            return 0, -1
        sign *= _sign_below(det, p)
        det ^= 1 << p
    return sign, det


@dataclass(frozen=True)
class SectorBasis:
    n_spatial: int
    n_alpha: int
    n_beta: int
    determinants: tuple[int, ...]

    @classmethod
    def build(cls, n_spatial: int, n_electrons: int, sz: float) -> "SectorBasis":
        n_alpha = n_electrons / 2 + sz
        n_beta = n_electrons / 2 - sz
        if (n_alpha != int(n_alpha) or n_alpha < 0 or n_beta < 0
                or n_alpha > n_spatial or n_beta > n_spatial):
            raise SectorError(f"empty sector: N={n_electrons}, Sz={sz} in {n_spatial} orbitals")
        n_alpha, n_beta = int(n_alpha), int(n_beta)
        dets = []
        for occ_a in combinations(range(n_spatial), n_alpha):
            for occ_b in combinations(range(n_spatial), n_beta):
                d = 0
                for i in occ_a:
                    d |= 1 << (2 * i)
                for i in occ_b:
                    d |= 1 << (2 * i + 1)
                dets.append(d)
        return cls(n_spatial, n_alpha, n_beta, tuple(sorted(dets)))

    @property
    def n_electrons(self) -> int:
        return self.n_alpha + self.n_beta

    @property
    def sz(self) -> float:
        return (self.n_alpha - self.n_beta) / 2

    def __len__(self):
        return len(self.determinants)

    @property
    def index(self) -> dict[int, int]:
        return {d: i for i, d in enumerate(self.determinants)}

    def embed(self, vector) -> Statevector:
        amps = np.zeros(1 << (2 * self.n_spatial), dtype=complex)
        amps[list(self.determinants)] = vector
        return Statevector(amps, 2 * self.n_spatial)


@dataclass(frozen=True)
class FCISolution:
    basis: SectorBasis
    energies: np.ndarray
    vectors: np.ndarray  # columns are roots
    s2: np.ndarray

    def state(self, root: int = 0) -> Statevector:
        return self.basis.embed(self.vectors[:, root])

    def lowest_with_spin(self, s: float, tol: float = 1e-6) -> int:
        target = s * (s + 1)
        for i, v in enumerate(self.s2):
            if abs(v - target) < tol:
                return i
        raise LookupError(f"no root with S = {s} among {len(self.s2)} roots")


def spin_orbital_integrals(mo: MOIntegrals):
    """One-body h[p,q] and antisymmetrized <pq||rs> over interleaved spin orbitals."""
    n = mo.n_orb
    spin = np.arange(2 * n) % 2
    space = np.arange(2 * n) // 2
    same = spin[:, None] == spin[None, :]
    h = np.where(same, mo.h[np.ix_(space, space)], 0.0)
    # <pq|rs> = (pr|qs) delta(s_p, s_r) delta(s_q, s_s)
    g = mo.g[np.ix_(space, space, space, space)]  # (pq|rs) over spin-orbital labels
    phys = g.transpose(0, 2, 1, 3) * same[:, None, :, None] * same[None, :, None, :]
    return h, phys - phys.transpose(0, 1, 3, 2)


def sector_hamiltonian(mo: MOIntegrals, basis: SectorBasis) -> np.ndarray:
    h, w = spin_orbital_integrals(mo)
    nso = 2 * mo.n_orb
    index = basis.index
    dim = len(basis)
    H = np.zeros((dim, dim))
    for col, det in enumerate(basis.determinants):
        occ = [p for p in range(nso) if (det >> p) & 1]
        vir = [p for p in range(nso) if not (det >> p) & 1]
        occ_arr = np.array(occ, dtype=int)
        H[col, col] = (np.sum(h[occ_arr, occ_arr])
                       + 0.5 * np.sum(w[np.ix_(occ_arr, occ_arr, occ_arr, occ_arr)]
                                      .diagonal(axis1=0, axis2=2).diagonal(axis1=0, axis2=1)))
        for i in occ:
            for a in vir:
                if (i - a) % 2:
                    continue
                sign, new = apply_ladder(det, [(a, True), (i, False)])
                row = index.get(new)
                if row is None or row < col:
                    continue
                val = h[a, i] + np.sum(w[a, occ_arr, i, occ_arr])
                H[row, col] = H[col, row] = sign * val
        for i, j in combinations(occ, 2):
            for a, b in combinations(vir, 2):
                if (i % 2 + j % 2) != (a % 2 + b % 2):
                    continue
                sign, new = apply_ladder(det, [(a, True), (b, True), (j, False), (i, False)])
                row = index.get(new)
                if row is None or row < col:
                    continue
                H[row, col] = H[col, row] = sign * w[a, b, i, j]
    return H + mo.constant * np.eye(dim)


def s2_expectations(basis: SectorBasis, vectors: np.ndarray) -> np.ndarray:
    """<S^2> = |S+ v|^2 + Sz (Sz + 1) per column."""
    vectors = np.atleast_2d(vectors.T).T
    raised: dict[int, np.ndarray] = {}
    for k, det in enumerate(basis.determinants):
        for i in range(basis.n_spatial):
            sign, new = apply_ladder(det, [(2 * i, True), (2 * i + 1, False)])
            if sign:
                acc = raised.setdefault(new, np.zeros(vectors.shape[1], dtype=vectors.dtype))
                acc += sign * vectors[k]
    sz = basis.sz
    norm2 = sum(np.abs(v) ** 2 for v in raised.values()) if raised else np.zeros(vectors.shape[1])
    return np.real(norm2) + sz * (sz + 1)


def fci_solve(mo: MOIntegrals, n_electrons: int, sz: float, n_roots: int = 1) -> FCISolution:
    basis = SectorBasis.build(mo.n_orb, n_electrons, sz)
    if len(basis) == 0:
        raise SectorError("empty sector")
    if len(basis) > MAX_DENSE_DIM:
        raise SectorError(f"sector dimension {len(basis)} exceeds dense limit {MAX_DENSE_DIM}")
    H = sector_hamiltonian(mo, basis)
    e, v = np.linalg.eigh(H)
    n_roots = min(n_roots, len(basis))
    e, v = e[:n_roots], v[:, :n_roots]
    return FCISolution(basis, e, v, s2_expectations(basis, v))


def sector_indices(n_qubits: int, n_electrons: int | None, sz: float | None) -> np.ndarray:
    idx = np.arange(1 << n_qubits, dtype=np.int64)
    keep = np.ones(len(idx), dtype=bool)
    if n_electrons is not None:
        keep &= np.bitwise_count(idx) == n_electrons
    if sz is not None:
        amask = sum(1 << q for q in range(0, n_qubits, 2))
        na = np.bitwise_count(idx & amask).astype(int)
        nb = np.bitwise_count(idx & ~amask & ((1 << n_qubits) - 1)).astype(int)
        keep &= np.isclose((na - nb) / 2, sz)
    return idx[keep]


def qubit_space_diagonalize(H: QubitOperator, n_electrons: int | None = None,
                            sz: float | None = None) -> np.ndarray:
    """Eigenvalues of ``H`` restricted to basis states with the given N and S_z."""
    if H.n_qubits > 16:
        raise SectorError(f"{H.n_qubits} qubits exceeds the 16-qubit limit")
    basis = sector_indices(H.n_qubits, n_electrons, sz)
    if len(basis) == 0:
        raise SectorError("empty sector")
    if len(basis) > MAX_DENSE_DIM:
        raise SectorError(f"sector dimension {len(basis)} exceeds dense limit {MAX_DENSE_DIM}")
    M = H.to_sparse(basis).toarray()
    return np.linalg.eigvalsh(0.5 * (M + M.conj().T))


def singles_amplitudes(fci: FCISolution, reference_det: int, root: int = 0):
    """Intermediate-normalized singles c_i^a / c_ref relative to ``reference_det``."""
    index = fci.basis.index
    vec = fci.vectors[:, root]
    if reference_det not in index:
        raise SectorError("reference determinant is not in the FCI sector")
    c_ref = vec[index[reference_det]]
    if abs(c_ref) < 1e-6:
        raise SectorError(f"reference weight {abs(c_ref):.2e} too small for intermediate normalization")
    nso = 2 * fci.basis.n_spatial
    occ = [p for p in range(nso) if (reference_det >> p) & 1]
    vir = [p for p in range(nso) if not (reference_det >> p) & 1]
    amps = {}
    for i in occ:
        for a in vir:
            if (i - a) % 2:
                continue
            sign, det = apply_ladder(reference_det, [(a, True), (i, False)])
            if det in index:
                amps[(i, a)] = sign * vec[index[det]] / c_ref
    return amps


def brueckner_reference(fci: FCISolution, hf_register: Statevector, root: int = 0) -> Statevector:
    """Normalized exp(T1) |HF> with T1 built from the FCI singles of ``root``."""
    nonzero = np.nonzero(np.abs(hf_register.amplitudes) > 1e-12)[0]
    if len(nonzero) != 1:
        raise SectorError("Brueckner reference needs a single-determinant register")
    ref_det = int(nonzero[0])
    amps = singles_amplitudes(fci, ref_det, root)
    t1 = FermionOperator()
    for (i, a), t in amps.items():
        if abs(t) > 0:
            t1 = t1 + excitation([a], [i], t)
    if len(t1) == 0:
        return hf_register.copy()
    T = jordan_wigner(t1, hf_register.n_qubits).to_sparse()
    out = expm_multiply(sp.csc_matrix(T), hf_register.amplitudes)
    return Statevector(out / np.linalg.norm(out), hf_register.n_qubits)
