"""Molecular-orbital integrals from the s-orbital engine or from FCIDUMP files."""

from __future__ import annotations

from dataclasses import replace

from .basis import BasisSet, UnsupportedBasisError, load_basis
from .fcidump import FCIDUMPError, read_fcidump, write_fcidump
from .geometry import Geometry, GeometryError
from .integrals import AOIntegrals, LinearDependenceError, compute_s_integrals
from .scf import (MOIntegrals, RHFResult, SCFConvergenceError, freeze_orbitals, run_rhf,
                  transform_to_mo)

__all__ = [
    "AOIntegrals", "BasisSet", "FCIDUMPError", "Geometry", "GeometryError", "LinearDependenceError",
    "MOIntegrals", "RHFResult", "SCFConvergenceError", "UnsupportedBasisError", "compute_s_integrals",
    "freeze_orbitals", "load_basis", "molecule_integrals", "orbital_electrons", "read_fcidump",
    "run_rhf", "transform_to_mo", "write_fcidump",
]


def orbital_electrons(n_electrons: int) -> int:
    """Electron count whose closed-shell field defines the orbitals (odd counts drop one)."""
    return n_electrons - (n_electrons % 2)


def molecule_integrals(geometry: Geometry, basis: str | BasisSet, frozen_core=(),
                       orbital_charge: int | None = None) -> MOIntegrals:
    """RHF orbitals and MO integrals for an all-s-shell molecule.

    Odd-electron systems use the orbitals of the closed-shell configuration with
    one electron fewer; ``orbital_charge`` overrides the charge used for the SCF.
    The returned ``n_electrons`` is always the physical count of ``geometry``.
    """
    if not isinstance(basis, BasisSet):
        basis = load_basis(basis, [a.label for a in geometry.atoms])
    ao = compute_s_integrals(geometry, basis)
    if orbital_charge is None:
        n_scf = orbital_electrons(geometry.n_electrons)
    else:
        n_scf = geometry.n_electrons + geometry.charge - orbital_charge
    rhf = run_rhf(ao, n_scf)
    mo = transform_to_mo(ao, rhf.coefficients, frozen_core)
    return replace(mo, n_electrons=geometry.n_electrons - 2 * len(tuple(frozen_core)), ms2=geometry.n_electrons % 2)
