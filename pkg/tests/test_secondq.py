from pathlib import Path

import numpy as np
import pytest

from excitedvqe.exact import fci_solve, qubit_space_diagonalize
from excitedvqe.secondq import (FermionOperator, anti_hermitian_generator, build_hamiltonian,
                                build_number, build_s2, build_sz, excitation, jordan_wigner, QubitOperator)
from excitedvqe.scf import MOIntegrals
from excitedvqe.statesim import Statevector, expectation, prepare_register

from conftest import dense_operator, dense_qubit, h2_mo, kron_string, random_mo

GOLDEN = Path(__file__).parent / "golden"


def test_one_orbital_hamiltonian():
    mo = MOIntegrals(h=[[-1.0]], g=np.zeros((1, 1, 1, 1)))
    H = build_hamiltonian(mo)
    assert H.terms == {((0, True), (0, False)): -1.0, ((1, True), (1, False)): -1.0}


def test_constant_only_hamiltonian():
    mo = MOIntegrals(h=np.zeros((2, 2)), g=np.zeros((2, 2, 2, 2)), e_nuc=0.5)
    q = jordan_wigner(build_hamiltonian(mo), 4)
    assert q.terms == {(): 0.5}


def test_h2_hamiltonian_spectrum_matches_fci():
    mo = h2_mo()
    q = jordan_wigner(build_hamiltonian(mo), 4)
    e_full = np.linalg.eigvalsh(dense_qubit(q))
    e_fci = fci_solve(mo, 2, 0.0).energies[0]
    assert e_full.min() == pytest.approx(e_fci, abs=1e-12)
    # pyscf FCI for the same geometry, see test_molint
    assert e_fci == pytest.approx(-1.137270174660903, abs=1e-8)


def test_hamiltonian_matches_dense_second_quantization():
    mo = random_mo(2, seed=3, e_nuc=0.2)
    H = build_hamiltonian(mo)
    # oracle: explicit spin-orbital sum with dense ladder matrices
    from conftest import dense_annihilator
    n = 4
    a = [dense_annihilator(p, n) for p in range(n)]
    M = 0.2 * np.eye(16)
    for p in range(2):
        for q in range(2):
            for s in range(2):
                M = M + mo.h[p, q] * a[2 * p + s].T @ a[2 * q + s]
    for p in range(2):
        for q in range(2):
            for r in range(2):
                for t in range(2):
                    for s1 in range(2):
                        for s2 in range(2):
                            M = M + 0.5 * mo.g[p, q, r, t] * (a[2 * p + s1].T @ a[2 * r + s2].T
                                                              @ a[2 * t + s2] @ a[2 * q + s1])
    assert np.allclose(dense_operator(H, n), M, atol=1e-12)
    assert np.allclose(dense_qubit(jordan_wigner(H, n)), M, atol=1e-12)


def test_hamiltonian_conserves_n_and_sz():
    mo = random_mo(3, seed=1)
    H = jordan_wigner(build_hamiltonian(mo), 6)
    for op in (build_number(3), build_sz(3), build_s2(3)):
        assert H.commutator(jordan_wigner(op, 6)).norm() < 1e-10
    assert H.is_hermitian()


def test_hamiltonian_term_count_matches_pauli_decomposition():
    from itertools import product
    for n_sp in (2, 3):
        mo = random_mo(n_sp, seed=0)
        n = 2 * n_sp
        M = dense_operator(build_hamiltonian(mo), n)
        # oracle: project the dense matrix onto every Pauli word
        support = 0
        for word in product("IXYZ", repeat=n):
            c = np.trace(kron_string("".join(word)) @ M) / (1 << n)
            support += abs(c) > 1e-10
        assert len(jordan_wigner(build_hamiltonian(mo), n)) == support


class TestSpinOperators:
    def test_closed_shell(self):
        s2 = jordan_wigner(build_s2(2), 4)
        assert expectation(Statevector.from_ket("1100"), s2) == pytest.approx(0.0, abs=1e-14)

    def test_triplet_register(self):
        s2 = jordan_wigner(build_s2(6), 12)
        state = prepare_register("T", 12, 6)
        assert expectation(state, s2) == pytest.approx(2.0, abs=1e-12)

    def test_open_shell_singlet_circuit(self):
        state = prepare_register("S3", 4, 2)
        # oracle: S^2 and S_z from dense ladder matrices applied to the 16-dim vector
        s2 = dense_operator(build_s2(2), 4)
        sz = dense_operator(build_sz(2), 4)
        psi = state.amplitudes
        assert np.vdot(psi, s2 @ psi).real == pytest.approx(0.0, abs=1e-12)
        assert np.vdot(psi, sz @ psi).real == pytest.approx(0.0, abs=1e-12)

    def test_determinant_eigenvalues(self):
        s2 = dense_operator(build_s2(2), 4)
        # |1010>: two alpha electrons -> S = 1; |1001>: alpha in 0, beta in 1 -> not an eigenstate
        v = Statevector.from_ket("1010").amplitudes
        assert np.allclose(s2 @ v, 2 * v)
        vals = np.linalg.eigvalsh(s2)
        assert set(np.round(vals, 10)) == {0.0, 0.75, 2.0}

    def test_empty_register_rejected(self):
        with pytest.raises(ValueError):
            build_s2(0)


class TestJordanWigner:
    def test_single_creation(self):
        q = jordan_wigner(FermionOperator([(0, True)]), 2)
        assert q.terms == {((0, "X"),): 0.5, ((0, "Y"),): -0.5j}

    def test_hop_example(self):
        op = excitation([2], [0])
        q = jordan_wigner(op, 4)
        # the four-term form with words written from qubit 2 down to qubit 0
        form = 0.25 * (kron_string("XZXI") + kron_string("YZYI")
                       + 1j * kron_string("YZXI") - 1j * kron_string("XZYI"))
        assert np.allclose(dense_qubit(q), form)
        assert np.allclose(dense_qubit(q), dense_operator(op, 4))

    def test_number_operator(self):
        q = jordan_wigner(build_number(1) + FermionOperator([(2, True), (2, False)]), 3)
        expected = {(): 1.5, ((0, "Z"),): -0.5, ((1, "Z"),): -0.5, ((2, "Z"),): -0.5}
        assert q.terms == pytest.approx(expected)

    def test_index_overflow(self):
        with pytest.raises(ValueError):
            jordan_wigner(FermionOperator([(4, True)]), 4)

    def test_anticommutators_all_pairs(self):
        n = 4
        ops = [jordan_wigner(FermionOperator([(p, False)]), n) for p in range(n)]
        dags = [jordan_wigner(FermionOperator([(p, True)]), n) for p in range(n)]
        ident = QubitOperator.identity(n)
        for p in range(n):
            for q in range(n):
                anti = ops[p] * dags[q] + dags[q] * ops[p]
                expected = ident if p == q else QubitOperator(n)
                assert (anti - expected).norm() < 1e-14
                assert (ops[p] * ops[q] + ops[q] * ops[p]).norm() < 1e-14

    def test_homomorphism_on_products(self):
        rng = np.random.default_rng(5)
        for _ in range(10):
            terms = [[(int(rng.integers(4)), bool(rng.integers(2))) for _ in range(2)] for _ in range(2)]
            a = FermionOperator(terms[0], rng.normal())
            b = FermionOperator(terms[1], rng.normal())
            lhs = jordan_wigner(a * b, 4)
            rhs = jordan_wigner(a, 4) * jordan_wigner(b, 4)
            assert (lhs - rhs).norm() < 1e-13

    def test_text_roundtrip(self):
        q = jordan_wigner(build_hamiltonian(h2_mo()), 4)
        back = QubitOperator.from_text(4, q.to_text())
        assert (q - back).norm() == 0.0

    def test_golden_text(self):
        q = jordan_wigner(build_s2(1), 2)
        assert q.to_text() == (GOLDEN / "s2_one_orbital.txt").read_text()


class TestGenerators:
    def test_single(self):
        g = anti_hermitian_generator(excitation([1], [0]))
        expected = (FermionOperator([(1, True), (0, False)]) - FermionOperator([(0, True), (1, False)]))
        assert (g - expected.normal_ordered()).is_zero()

    def test_zero(self):
        assert len(anti_hermitian_generator(FermionOperator())) == 0

    def test_random_two_body_is_anti_hermitian(self):
        rng = np.random.default_rng(2)
        t = FermionOperator()
        for _ in range(6):
            p, q, r, s = rng.choice(6, 4, replace=False)
            t = t + excitation([p, q], [r, s], rng.normal() + 1j * rng.normal())
        G = dense_qubit(jordan_wigner(anti_hermitian_generator(t), 6))
        assert np.allclose(G.conj().T, -G, atol=1e-13)
        assert (anti_hermitian_generator(t) + anti_hermitian_generator(t).adjoint()).is_zero()


class TestFermionAlgebra:
    def test_normal_order_idempotent(self):
        op = FermionOperator([(0, False), (1, True), (0, True)], 0.7)
        once = op.normal_ordered()
        assert (once.normal_ordered() - once).is_zero()
        assert np.allclose(dense_operator(once, 2), dense_operator(op, 2))

    def test_negation_cancels(self):
        op = excitation([3, 2], [0, 1], 0.3)
        assert (op + (-op)).is_zero()

    def test_pauli_exclusion(self):
        op = FermionOperator([(1, True), (1, True)])
        assert op.normal_ordered().is_zero()


def test_qubit_operator_hermitian_check():
    q = QubitOperator.from_strings(2, {"X0 Y1": 1.0, "Z0": 1j})
    assert not q.is_hermitian()
    with pytest.raises(ValueError):
        expectation(Statevector.zero(2), q)


def test_qubit_space_diagonalize_constant():
    q = QubitOperator.identity(4, 0.3)
    assert np.allclose(qubit_space_diagonalize(q, 2, 0.0), 0.3)
