"""Second-quantized operators and their qubit encoding."""

from .fermion import (FermionOperator, alpha, anti_hermitian_generator, beta, build_hamiltonian,
                      build_number, build_s2, build_s_plus, build_sz, excitation)
from .qubit import QubitOperator, jordan_wigner

__all__ = [
    "FermionOperator", "QubitOperator", "alpha", "anti_hermitian_generator", "beta",
    "build_hamiltonian", "build_number", "build_s2", "build_s_plus", "build_sz", "excitation",
    "jordan_wigner",
]
