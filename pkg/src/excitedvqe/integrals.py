"""Closed-form integrals over s-type Gaussian functions."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import erf

from .basis import BasisSet, UnsupportedBasisError, primitive_norm
from .geometry import Geometry


class LinearDependenceError(ValueError):
    pass


def boys0(t):
    """F0(t) = int_0^1 exp(-t u^2) du, elementwise."""
    t = np.asarray(t, dtype=float)
    small = t < 1e-6
    safe = np.where(small, 1.0, t)
    big = 0.5 * np.sqrt(np.pi / safe) * erf(np.sqrt(safe))
    series = 1.0 - t / 3.0 + t * t / 10.0
    return np.where(small, series, big)


@dataclass(frozen=True)
class AOIntegrals:
    overlap: np.ndarray
    kinetic: np.ndarray
    nuclear: np.ndarray
    eri: np.ndarray  # chemists' notation (mu nu|la si)
    e_nuc: float

    @property
    def hcore(self) -> np.ndarray:
        return self.kinetic + self.nuclear

    @property
    def n_ao(self) -> int:
        return self.overlap.shape[0]


def _primitives(geometry: Geometry, basis: BasisSet):
    """Flatten contracted shells into primitive arrays plus the contraction matrix."""
    if len(basis.shells) != len(geometry.atoms):
        raise ValueError("basis must list shells for every atom")
    xyz = geometry.coordinates_bohr()
    alphas, centers, rows, cols, vals = [], [], [], [], []
    ao = 0
    for atom, atom_shells in enumerate(basis.shells):
        for shell in atom_shells:
            if shell.angular_momentum != 0:
                raise UnsupportedBasisError("only s shells are supported by the Gaussian engine")
            for a, c in zip(shell.exponents, shell.coefficients):
                rows.append(len(alphas))
                cols.append(ao)
                vals.append(c * primitive_norm(a))
                alphas.append(a)
                centers.append(xyz[atom])
            ao += 1
    contraction = np.zeros((len(alphas), ao))
    contraction[rows, cols] = vals
    return np.array(alphas), np.array(centers), contraction


def compute_s_integrals(geometry: Geometry, basis: BasisSet) -> AOIntegrals:
    a, A, C = _primitives(geometry, basis)

    p = a[:, None] + a[None, :]
    mu = a[:, None] * a[None, :] / p
    ab2 = np.sum((A[:, None, :] - A[None, :, :]) ** 2, axis=-1)
    P = (a[:, None, None] * A[:, None, :] + a[None, :, None] * A[None, :, :]) / p[..., None]
    kab = np.exp(-mu * ab2)

    s_prim = (np.pi / p) ** 1.5 * kab
    t_prim = mu * (3.0 - 2.0 * mu * ab2) * s_prim

    v_prim = np.zeros_like(s_prim)
    for z, Rc in zip(geometry.nuclear_charges(), geometry.coordinates_bohr()):
        pc2 = np.sum((P - Rc) ** 2, axis=-1)
        v_prim -= z * 2.0 * np.pi / p * kab * boys0(p * pc2)

    pp = p[:, :, None, None]
    qq = p[None, None, :, :]
    pq2 = np.sum((P[:, :, None, None, :] - P[None, None, :, :, :]) ** 2, axis=-1)
    g_prim = (
        2.0 * np.pi**2.5 / (pp * qq * np.sqrt(pp + qq))
        * kab[:, :, None, None] * kab[None, None, :, :]
        * boys0(pp * qq / (pp + qq) * pq2)
    )

    overlap = C.T @ s_prim @ C
    kinetic = C.T @ t_prim @ C
    nuclear = C.T @ v_prim @ C
    eri = np.einsum("pqrs,pi,qj,rk,sl->ijkl", g_prim, C, C, C, C, optimize=True)

    overlap = 0.5 * (overlap + overlap.T)
    cond = np.linalg.cond(overlap)
    if cond > 1e12:
        raise LinearDependenceError(f"overlap condition number {cond:.3e} exceeds 1e12")
    return AOIntegrals(overlap, kinetic, nuclear, eri, geometry.nuclear_repulsion())
