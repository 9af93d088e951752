import functools
from itertools import product

import numpy as np
import pytest

from excitedvqe import geometry as geo
from excitedvqe.molint import molecule_integrals
from excitedvqe.fcidump import read_fcidump
from excitedvqe.scan import FIXTURE_DIR, fixture_name, fixture_values
from excitedvqe.scf import MOIntegrals, freeze_orbitals

I2 = np.eye(2)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]])
Z = np.diag([1.0, -1.0]).astype(complex)
PAULI = {"I": I2, "X": X, "Y": Y, "Z": Z}

HAVE_CH2 = bool(fixture_values("CH2", FIXTURE_DIR))
needs_ch2 = pytest.mark.skipif(not HAVE_CH2, reason="CH2 fixtures not bundled")
HAVE_NH = bool(fixture_values("NH", FIXTURE_DIR))
needs_nh = pytest.mark.skipif(not HAVE_NH, reason="NH fixtures not bundled")


def kron_string(letters: str) -> np.ndarray:
    """Dense matrix of a Pauli word; letter q acts on qubit q (bit q of the index)."""
    out = np.eye(1, dtype=complex)
    for ch in letters:
        # qubit q is bit q, so later qubits are the more significant Kronecker factor
        out = np.kron(PAULI[ch], out)
    return out


def dense_annihilator(p: int, n: int) -> np.ndarray:
    """a_p built directly in the occupation basis, sign = (-1)^(occupied modes below p)."""
    dim = 1 << n
    a = np.zeros((dim, dim))
    for idx in range(dim):
        if (idx >> p) & 1:
            sign = (-1) ** bin(idx & ((1 << p) - 1)).count("1")
            a[idx ^ (1 << p), idx] = sign
    return a


def dense_operator(op, n: int) -> np.ndarray:
    """Matrix of a FermionOperator from explicit ladder matrices (no Jordan-Wigner code)."""
    dim = 1 << n
    ann = [dense_annihilator(p, n) for p in range(n)]
    out = np.zeros((dim, dim), dtype=complex)
    for term, c in op:
        m = np.eye(dim, dtype=complex)
        for p, dag in term:
            m = m @ (ann[p].T if dag else ann[p])
        out += c * m
    return out


def dense_qubit(op) -> np.ndarray:
    n = op.n_qubits
    out = np.zeros((1 << n, 1 << n), dtype=complex)
    for string, c in op.terms.items():
        letters = ["I"] * n
        for q, l in string:
            letters[q] = l
        out += c * kron_string("".join(letters))
    return out


def random_mo(n: int, seed: int = 0, scale: float = 0.3, e_nuc: float = 0.0) -> MOIntegrals:
    """Random real integrals with full 8-fold symmetry."""
    rng = np.random.default_rng(seed)
    h = rng.normal(size=(n, n))
    h = 0.5 * (h + h.T)
    g = rng.normal(size=(n, n, n, n)) * scale
    g = g + g.transpose(1, 0, 2, 3)
    g = g + g.transpose(0, 1, 3, 2)
    g = g + g.transpose(2, 3, 0, 1)
    return MOIntegrals(h=h, g=g / 8, e_nuc=e_nuc)


@functools.lru_cache(maxsize=None)
def h2_mo(bond: float = 0.7414, basis: str = "STO-3G") -> MOIntegrals:
    return molecule_integrals(geo.h2(bond), basis)


@functools.lru_cache(maxsize=None)
def h3_mo(bond: float = 0.93, basis: str = "6-31G") -> MOIntegrals:
    return molecule_integrals(geo.h3_linear(bond, 0.93), basis)


@functools.lru_cache(maxsize=None)
def fixture_mo(name: str, value: float) -> MOIntegrals:
    """Bundled fixture with the 1s core frozen (7 -> 6 active orbitals)."""
    return freeze_orbitals(read_fcidump(FIXTURE_DIR / fixture_name(name, value)), (0,))


def all_bitstrings(n):
    return ["".join(b) for b in product("01", repeat=n)]


@pytest.fixture
def h2():
    return h2_mo()


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
