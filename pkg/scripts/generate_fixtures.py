"""Regenerate the bundled FCIDUMP fixtures.

Hydrogen systems use the in-repo s-orbital engine. The heavy-atom hydrides need
p-type integrals, so they are produced with pyscf (``pip install pyscf``); the
core orbital is left unfolded in the files and frozen at load time.

    python3 scripts/generate_fixtures.py [--only CH2,NH] [--out DIR]
"""

from __future__ import annotations

import argparse
from pathlib import Path

import numpy as np

from excitedvqe import geometry as geo
from excitedvqe.fcidump import write_fcidump
from excitedvqe.molint import molecule_integrals
from excitedvqe.scan import FIXTURE_DIR, fixture_name
from excitedvqe.scf import MOIntegrals

HEAVY = {
    # name: (template, charge, grid)
    "CH2": (lambda r: geo.bent_xh2("C", r, geo.BENT_ANGLES["CH2"]), 0, np.arange(0.80, 1.6001, 0.05)),
    "NH2+": (lambda r: geo.bent_xh2("N", r, geo.BENT_ANGLES["NH2+"], charge=1), 1,
             np.arange(0.80, 1.6001, 0.10)),
    "NH": (lambda r: geo.diatomic_xh("N", r), 0, np.arange(0.80, 1.6001, 0.10)),
    "OH+": (lambda r: geo.diatomic_xh("O", r, charge=1), 1, np.arange(0.80, 1.6001, 0.10)),
}

LIGHT = {
    "H2": [("6-31G", geo.h2(r)) for r in (0.5, 0.7414, 1.5)],
    "H3": [("6-31G", geo.h3_linear(r, 0.93)) for r in (0.93, 1.5)],
    "H4": [("STO-3G", geo.h4_trapezoid(a)) for a in (90.0, 180.0)],
}
LIGHT_VALUES = {"H2": (0.5, 0.7414, 1.5), "H3": (0.93, 1.5), "H4": (90.0, 180.0)}


def pyscf_integrals(geometry: geo.Geometry) -> MOIntegrals:
    from pyscf import ao2mo, gto, scf

    mol = gto.M(
        atom=[(a.label, a.position) for a in geometry.atoms],
        basis="sto-3g", unit="Angstrom", charge=geometry.charge, spin=0, symmetry=False,
    )
    mf = scf.RHF(mol)
    mf.conv_tol = 1e-12
    mf.max_cycle = 200
    mf.kernel()
    if not mf.converged:
        raise RuntimeError(f"pyscf RHF did not converge for {geometry}")
    c = mf.mo_coeff
    h = c.T @ mf.get_hcore() @ c
    g = ao2mo.restore(1, ao2mo.full(mol, c), c.shape[1])
    return MOIntegrals(h=h, g=g, e_nuc=float(mol.energy_nuc()), n_electrons=int(mol.nelectron), ms2=0)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--only", default="", help="comma-separated molecule names")
    ap.add_argument("--out", type=Path, default=FIXTURE_DIR)
    args = ap.parse_args(argv)
    only = set(filter(None, args.only.split(",")))

    for name, items in LIGHT.items():
        if only and name not in only:
            continue
        for value, (basis, g) in zip(LIGHT_VALUES[name], items):
            mo = molecule_integrals(g, basis)
            path = args.out / fixture_name(name, value)
            path.parent.mkdir(parents=True, exist_ok=True)
            write_fcidump(path, mo)
            print("wrote", path)

    for name, (template, _, grid) in HEAVY.items():
        if only and name not in only:
            continue
        for r in grid:
            r = round(float(r), 4)
            mo = pyscf_integrals(template(r))
            path = args.out / fixture_name(name, r)
            path.parent.mkdir(parents=True, exist_ok=True)
            write_fcidump(path, mo)
            print("wrote", path)


if __name__ == "__main__":
    main()
