"""Restricted Hartree-Fock and the AO -> MO integral transformation."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.linalg import eigh, expm

from .integrals import AOIntegrals

log = logging.getLogger(__name__)


class SCFConvergenceError(RuntimeError):
    def __init__(self, message, last_energy, residual):
        super().__init__(f"{message} (last energy {last_energy:.12f}, residual {residual:.3e})")
        self.last_energy = last_energy
        self.residual = residual


@dataclass(frozen=True)
class MOIntegrals:
    """Spatial-orbital integrals; ``g`` is in chemists' notation (pq|rs)."""

    h: np.ndarray
    g: np.ndarray
    e_nuc: float = 0.0
    e_core: float = 0.0
    n_electrons: int | None = None
    ms2: int | None = None
    orbsym: tuple[int, ...] | None = field(default=None, compare=False)

    def __post_init__(self):
        h = np.asarray(self.h, dtype=float)
        g = np.asarray(self.g, dtype=float)
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "g", g)
        n = h.shape[0]
        if h.shape != (n, n) or g.shape != (n, n, n, n):
            raise ValueError(f"inconsistent integral shapes {h.shape} / {g.shape}")

    @property
    def n_orb(self) -> int:
        return self.h.shape[0]

    @property
    def constant(self) -> float:
        return self.e_nuc + self.e_core

    def validate(self, tol: float = 1e-10) -> None:
        if not (np.all(np.isfinite(self.h)) and np.all(np.isfinite(self.g))):
            raise ValueError("non-finite integrals")
        if not np.allclose(self.h, self.h.T, atol=tol, rtol=0):
            raise ValueError("one-electron integrals are not symmetric")
        g = self.g
        for perm in ((1, 0, 2, 3), (0, 1, 3, 2), (2, 3, 0, 1)):
            if not np.allclose(g, g.transpose(perm), atol=tol, rtol=0):
                raise ValueError("two-electron integrals lack 8-fold symmetry")


@dataclass(frozen=True)
class RHFResult:
    coefficients: np.ndarray
    orbital_energies: np.ndarray
    energy: float
    iterations: int
    commutator_norm: float


def _fock(hcore, eri, density):
    coulomb = np.einsum("pqrs,rs->pq", eri, density)
    exchange = np.einsum("prqs,rs->pq", eri, density)
    return hcore + coulomb - 0.5 * exchange


def run_rhf(ao: AOIntegrals, n_electrons: int, *, max_iter: int = 200,
            density_tol: float = 1e-8, energy_tol: float = 1e-10,
            diis_size: int = 8, stability: bool = True) -> RHFResult:
    """Closed-shell SCF with DIIS. ``density`` here is the total density, D = 2 C_occ C_occ^T.

    With ``stability`` the converged solution is checked against real
    occupied-virtual rotations; a negative Hessian mode (typical at degenerate
    geometries such as square H4, where plain aufbau stalls on a saddle) is
    followed downhill and the SCF restarted until the solution is a minimum.
    """
    if n_electrons % 2 or n_electrons < 2:
        raise ValueError(f"RHF needs a positive even electron count, got {n_electrons}")
    n_occ = n_electrons // 2
    if n_occ > ao.n_ao:
        raise ValueError("more occupied orbitals than basis functions")

    # symmetric orthogonalization; basis mixing cannot move degenerate orbitals around
    svals, svecs = np.linalg.eigh(ao.overlap)
    X = svecs @ np.diag(svals**-0.5) @ svecs.T

    _, C = eigh(X.T @ ao.hcore @ X)
    D = 2.0 * (X @ C[:, :n_occ]) @ (X @ C[:, :n_occ]).T
    total_iters = 0
    for _ in range(10):
        C, eps, energy, it = _scf_loop(ao, X, D, n_occ, max_iter, density_tol, energy_tol, diis_size)
        total_iters += it
        if not stability or n_occ == ao.n_ao:
            break
        C_new = _follow_instability(ao, C, n_occ, energy)
        if C_new is None:
            break
        log.debug("RHF instability followed from E = %.12f", energy)
        D = 2.0 * C_new[:, :n_occ] @ C_new[:, :n_occ].T

    F = _fock(ao.hcore, ao.eri, 2.0 * C[:, :n_occ] @ C[:, :n_occ].T)
    D = 2.0 * C[:, :n_occ] @ C[:, :n_occ].T
    comm = float(np.linalg.norm(F @ D @ ao.overlap - ao.overlap @ D @ F))
    return RHFResult(C, eps, float(energy), total_iters, comm)


def _scf_energy(ao, C, n_occ):
    D = 2.0 * C[:, :n_occ] @ C[:, :n_occ].T
    return 0.5 * np.sum(D * (ao.hcore + _fock(ao.hcore, ao.eri, D))) + ao.e_nuc


def _scf_loop(ao, X, D, n_occ, max_iter, density_tol, energy_tol, diis_size):
    S, hcore = ao.overlap, ao.hcore

    def diagonalize(F):
        e, c = eigh(X.T @ F @ X)
        return e, X @ c

    energy = np.inf
    errors, focks = [], []
    for it in range(1, max_iter + 1):
        F = _fock(hcore, ao.eri, D)
        err = F @ D @ S - S @ D @ F
        new_energy = 0.5 * np.sum(D * (hcore + F)) + ao.e_nuc

        errors.append(X.T @ err @ X)
        focks.append(F)
        errors, focks = errors[-diis_size:], focks[-diis_size:]
        if len(focks) > 1:
            F = _diis(errors, focks)

        eps, C = diagonalize(F)
        D_new = 2.0 * C[:, :n_occ] @ C[:, :n_occ].T
        dd = np.sqrt(np.mean((D_new - D) ** 2))
        de = abs(new_energy - energy)
        D, energy = D_new, new_energy
        if dd < density_tol and de < energy_tol and np.linalg.norm(err) < density_tol:
            log.debug("RHF converged in %d iterations, E = %.12f", it, energy)
            break
    else:
        raise SCFConvergenceError("RHF did not converge", energy, dd)
    # orbitals from the final converged Fock matrix
    eps, C = diagonalize(_fock(hcore, ao.eri, D))
    return C, eps, _scf_energy(ao, C, n_occ), it


def rhf_orbital_hessian(ao: AOIntegrals, C: np.ndarray, n_occ: int) -> np.ndarray:
    """Real RHF -> RHF orbital Hessian (A + B) over occupied-virtual pairs, in Hartree."""
    g = np.einsum("pqrs,pi,qj,rk,sl->ijkl", ao.eri, C, C, C, C, optimize=True)
    D = 2.0 * C[:, :n_occ] @ C[:, :n_occ].T
    f = C.T @ _fock(ao.hcore, ao.eri, D) @ C
    o, v = slice(0, n_occ), slice(n_occ, C.shape[1])
    nv = C.shape[1] - n_occ
    H = (4.0 * g[o, v, o, v]
         - np.einsum("ijab->iajb", g[o, o, v, v])
         - np.einsum("ibja->iajb", g[o, v, o, v]))
    H = H + np.einsum("ij,ab->iajb", np.eye(n_occ), f[v, v]) - np.einsum("ij,ab->iajb", f[o, o], np.eye(nv))
    return H.reshape(n_occ * nv, n_occ * nv)


def _follow_instability(ao, C, n_occ, energy, tol=1e-6):
    H = rhf_orbital_hessian(ao, C, n_occ)
    vals, vecs = np.linalg.eigh(0.5 * (H + H.T))
    if vals[0] > -tol:
        return None
    n = C.shape[1]
    kappa = np.zeros((n, n))
    kappa[n_occ:, :n_occ] = vecs[:, 0].reshape(n_occ, n - n_occ).T
    kappa -= kappa.T
    trials = [C @ expm(t * kappa) for t in np.linspace(0.05, np.pi / 2, 32)]
    e_trial = [_scf_energy(ao, c, n_occ) for c in trials]
    best = int(np.argmin(e_trial))
    if e_trial[best] >= energy - 1e-10:
        return None
    return trials[best]


def _diis(errors, focks):
    n = len(errors)
    B = -np.ones((n + 1, n + 1))
    B[n, n] = 0.0
    for i in range(n):
        for j in range(n):
            B[i, j] = np.sum(errors[i] * errors[j])
    rhs = np.zeros(n + 1)
    rhs[n] = -1.0
    try:
        coef = np.linalg.solve(B, rhs)[:n]
    except np.linalg.LinAlgError:
        return focks[-1]
    return sum(c * f for c, f in zip(coef, focks))


def freeze_orbitals(mo: MOIntegrals, frozen) -> MOIntegrals:
    """Fold doubly occupied ``frozen`` orbitals into a scalar shift and effective h."""
    frozen = sorted(set(int(i) for i in frozen))
    n = mo.n_orb
    for i in frozen:
        if not 0 <= i < n:
            raise IndexError(f"frozen orbital {i} out of range for {n} orbitals")
    if not frozen:
        return mo
    active = [i for i in range(n) if i not in frozen]
    h, g = mo.h, mo.g
    c = np.array(frozen)
    gc = g[np.ix_(c, c, c, c)]
    e_core = 2.0 * np.sum(h[c, c]) + np.sum(2.0 * np.einsum("iijj->ij", gc) - np.einsum("ijji->ij", gc))
    h_eff = (h + 2.0 * np.einsum("pqcc->pq", g[:, :, c][:, :, :, c])
             - np.einsum("pccq->pq", g[:, c][:, :, c]))
    a = np.array(active, dtype=int)
    nel = None if mo.n_electrons is None else mo.n_electrons - 2 * len(frozen)
    orbsym = None if mo.orbsym is None else tuple(mo.orbsym[i] for i in active)
    return replace(
        mo,
        h=h_eff[np.ix_(a, a)],
        g=g[np.ix_(a, a, a, a)],
        e_core=mo.e_core + float(e_core),
        n_electrons=nel,
        orbsym=orbsym,
    )


def transform_to_mo(ao: AOIntegrals, coefficients: np.ndarray, frozen_core=()) -> MOIntegrals:
    C = np.asarray(coefficients)
    h = C.T @ ao.hcore @ C
    g = np.einsum("pqrs,pi,qj,rk,sl->ijkl", ao.eri, C, C, C, C, optimize=True)
    h = 0.5 * (h + h.T)
    mo = MOIntegrals(h=h, g=_symmetrize_eri(g), e_nuc=ao.e_nuc)
    return freeze_orbitals(mo, frozen_core)


def _symmetrize_eri(g):
    g = 0.5 * (g + g.transpose(1, 0, 2, 3))
    g = 0.5 * (g + g.transpose(0, 1, 3, 2))
    return 0.5 * (g + g.transpose(2, 3, 0, 1))


def mo_integrals_as_ao(mo: MOIntegrals) -> AOIntegrals:
    """View MO integrals as an orthonormal 'AO' set, so transform_to_mo can rotate or freeze them."""
    if mo.e_core:
        raise ValueError("cannot re-expose integrals that already carry a frozen-core shift")
    n = mo.n_orb
    return AOIntegrals(np.eye(n), mo.h.copy(), np.zeros((n, n)), mo.g.copy(), mo.e_nuc)
