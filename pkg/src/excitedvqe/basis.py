"""Contracted s-shell basis sets for hydrogen."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# (exponent, coefficient) per primitive; coefficients refer to normalized primitives
_LIBRARY = {
    "sto-3g": {
        "H": [
            [(3.42525091, 0.15432897), (0.62391373, 0.53532814), (0.16885540, 0.44463454)],
        ],
    },
    "6-31g": {
        "H": [
            [(18.7311370, 0.03349460), (2.8253937, 0.23472695), (0.6401217, 0.81375733)],
            [(0.1612778, 1.0)],
        ],
    },
}


class UnsupportedBasisError(ValueError):
    pass


@dataclass(frozen=True)
class Shell:
    exponents: tuple[float, ...]
    coefficients: tuple[float, ...]
    angular_momentum: int = 0

    def __post_init__(self):
        if any(a <= 0 for a in self.exponents):
            raise ValueError("shell exponents must be positive")
        if len(self.exponents) != len(self.coefficients):
            raise ValueError("exponent/coefficient length mismatch")


def primitive_norm(alpha):
    return (2.0 * np.asarray(alpha) / np.pi) ** 0.75


def self_overlap(shell: Shell) -> float:
    a = np.array(shell.exponents)
    c = np.array(shell.coefficients) * primitive_norm(a)
    p = a[:, None] + a[None, :]
    return float(c @ ((np.pi / p) ** 1.5) @ c)


def normalized(shell: Shell) -> Shell:
    scale = 1.0 / np.sqrt(self_overlap(shell))
    return Shell(shell.exponents, tuple(c * scale for c in shell.coefficients), shell.angular_momentum)


@dataclass(frozen=True)
class BasisSet:
    """Per-atom contracted shells, one list entry per atom of the geometry."""

    name: str
    shells: tuple[tuple[Shell, ...], ...]

    @property
    def n_functions(self) -> int:
        return sum(len(s) for s in self.shells)

    def centers(self) -> list[int]:
        return [i for i, atom_shells in enumerate(self.shells) for _ in atom_shells]


def load_basis(name: str, labels) -> BasisSet:
    key = name.lower()
    if key not in _LIBRARY:
        raise UnsupportedBasisError(f"unknown basis {name!r}")
    table = _LIBRARY[key]
    shells = []
    for label in labels:
        if label not in table:
            raise UnsupportedBasisError(
                f"basis {name!r} has no s-only entry for {label}; supply FCIDUMP integrals instead"
            )
        shells.append(
            tuple(normalized(Shell(tuple(e for e, _ in prims), tuple(c for _, c in prims)))
                  for prims in table[label])
        )
    return BasisSet(key, tuple(shells))
