"""Molecular geometries and the built-in scan templates."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

ANGSTROM_TO_BOHR = 1.8897259886

ATOMIC_NUMBERS = {"H": 1, "He": 2, "Li": 3, "Be": 4, "B": 5, "C": 6, "N": 7, "O": 8, "F": 9}


class GeometryError(ValueError):
    pass


@dataclass(frozen=True)
class Atom:
    label: str
    charge: int
    position: tuple[float, float, float]  # Angstrom


@dataclass(frozen=True)
class Geometry:
    atoms: tuple[Atom, ...]
    charge: int = 0
    min_separation: float = field(default=1e-6, repr=False)

    def __post_init__(self):
        if not self.atoms:
            raise GeometryError("geometry has no atoms")
        xyz = self.coordinates_angstrom()
        if not np.all(np.isfinite(xyz)):
            raise GeometryError("non-finite atomic position")
        for i in range(len(xyz)):
            for j in range(i):
                if np.linalg.norm(xyz[i] - xyz[j]) < self.min_separation:
                    raise GeometryError(f"atoms {j} and {i} are coincident")
        if self.n_electrons < 1:
            raise GeometryError(f"geometry has {self.n_electrons} electrons")

    @classmethod
    def from_atoms(cls, atoms, charge: int = 0) -> "Geometry":
        """Build from ``[(label, (x, y, z)), ...]`` with positions in Angstrom."""
        built = []
        for label, pos in atoms:
            built.append(Atom(label, ATOMIC_NUMBERS[label], tuple(float(c) for c in pos)))
        return cls(tuple(built), charge=charge)

    @property
    def n_electrons(self) -> int:
        return sum(a.charge for a in self.atoms) - self.charge

    def coordinates_angstrom(self) -> np.ndarray:
        return np.array([a.position for a in self.atoms], dtype=float)

    def coordinates_bohr(self) -> np.ndarray:
        return self.coordinates_angstrom() * ANGSTROM_TO_BOHR

    def nuclear_charges(self) -> np.ndarray:
        return np.array([a.charge for a in self.atoms], dtype=float)

    def nuclear_repulsion(self) -> float:
        xyz = self.coordinates_bohr()
        z = self.nuclear_charges()
        e = 0.0
        for i in range(len(z)):
            for j in range(i):
                e += z[i] * z[j] / np.linalg.norm(xyz[i] - xyz[j])
        return float(e)

    def transformed(self, rotation=None, translation=None) -> "Geometry":
        xyz = self.coordinates_angstrom()
        if rotation is not None:
            xyz = xyz @ np.asarray(rotation).T
        if translation is not None:
            xyz = xyz + np.asarray(translation)
        atoms = tuple(Atom(a.label, a.charge, tuple(p)) for a, p in zip(self.atoms, xyz))
        return Geometry(atoms, charge=self.charge)


# Scan templates. Each takes the scan value plus any fixed parameters.

def h2(bond: float, charge: int = 0) -> Geometry:
    return Geometry.from_atoms([("H", (0, 0, 0)), ("H", (0, 0, bond))], charge)


def h3_linear(bond: float, fixed_bond: float, charge: int = 0) -> Geometry:
    """Linear H3: the first H-H distance is held at ``fixed_bond``, the second is scanned."""
    return Geometry.from_atoms(
        [("H", (0, 0, 0)), ("H", (0, 0, fixed_bond)), ("H", (0, 0, fixed_bond + bond))], charge
    )


def h4_trapezoid(angle_deg: float, side: float = 0.75, charge: int = 0) -> Geometry:
    """Three equal H-H sides; both inner H-H-H angles equal ``angle_deg``.

    90 degrees gives the square, 180 degrees the linear chain.
    """
    t = np.radians(angle_deg)
    half = side / 2
    return Geometry.from_atoms(
        [
            ("H", (-half + side * np.cos(t), side * np.sin(t), 0.0)),
            ("H", (-half, 0.0, 0.0)),
            ("H", (half, 0.0, 0.0)),
            ("H", (half - side * np.cos(t), side * np.sin(t), 0.0)),
        ],
        charge,
    )


def bent_xh2(center: str, bond: float, angle_deg: float, charge: int = 0) -> Geometry:
    """Symmetric XH2 in the yz plane with the bisector along z."""
    half = np.radians(angle_deg) / 2
    y, z = bond * np.sin(half), bond * np.cos(half)
    return Geometry.from_atoms(
        [(center, (0, 0, 0)), ("H", (0, y, z)), ("H", (0, -y, z))], charge
    )


def diatomic_xh(center: str, bond: float, charge: int = 0) -> Geometry:
    return Geometry.from_atoms([(center, (0, 0, 0)), ("H", (0, 0, bond))], charge)


# H-X-H angles used for the bent hydrides
BENT_ANGLES = {"CH2": 135.0, "NH2+": 107.0}
