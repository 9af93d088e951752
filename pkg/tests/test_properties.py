"""Hypothesis property suites. No bundled fixtures needed."""

import numpy as np
import pytest
from hypothesis import HealthCheck, assume, given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from excitedvqe import geometry as geo
from excitedvqe.ansatz import FAMILIES, AnsatzError, AnsatzSpec, ParameterMap, compile_circuit, run_circuit
from excitedvqe.basis import load_basis
from excitedvqe.exact import fci_solve, qubit_space_diagonalize
from excitedvqe.fcidump import read_fcidump, write_fcidump
from excitedvqe.integrals import compute_s_integrals
from excitedvqe.molint import molecule_integrals
from excitedvqe.scf import MOIntegrals, run_rhf
from excitedvqe.secondq import (FermionOperator, QubitOperator, anti_hermitian_generator,
                                build_hamiltonian, build_number, build_sz, excitation,
                                jordan_wigner)
from excitedvqe.statesim import (Gate, PrepCircuit, Statevector, apply_gate,
                                 apply_pauli_exponential, expectation, prepare_register)
from excitedvqe.vqe import Objective, RestartPolicy, evaluate, gradient, minimize

from conftest import dense_operator, random_mo

FAST = settings(max_examples=30, deadline=None, suppress_health_check=[HealthCheck.too_slow])
N_SPATIAL = 3
N_QUBITS = 2 * N_SPATIAL

seeds = st.integers(0, 2 ** 32 - 1)
angles = st.floats(-np.pi, np.pi, allow_nan=False)


def random_state(seed, n):
    rng = np.random.default_rng(seed)
    return Statevector(rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n), n).normalized()


def spin_flip(psi: np.ndarray, n_qubits: int) -> np.ndarray:
    """Fermionic alpha <-> beta exchange: qubit 2i <-> 2i+1, sign -1 per doubly occupied orbital."""
    idx = np.arange(1 << n_qubits)
    even = idx & int("01" * (n_qubits // 2), 2)
    odd = idx & int("10" * (n_qubits // 2), 2)
    swapped = (even << 1) | (odd >> 1)
    n_double = np.bitwise_count(even & (odd >> 1))
    out = np.empty_like(psi)
    out[swapped] = psi * (-1.0) ** n_double
    return out


# ---- second quantization ------------------------------------------------------------

@FAST
@given(p=st.integers(0, 4), q=st.integers(0, 4), dag_p=st.booleans(), dag_q=st.booleans())
def test_jw_anticommutation(p, q, dag_p, dag_q):
    n = 5
    a = jordan_wigner(FermionOperator([(p, dag_p)]), n)
    b = jordan_wigner(FermionOperator([(q, dag_q)]), n)
    anti = a * b + b * a
    expected = QubitOperator.identity(n) if (p == q and dag_p != dag_q) else QubitOperator(n)
    assert (anti - expected).norm() < 1e-14


@FAST
@given(seed=seeds)
def test_jw_matches_ladder_matrices(seed):
    rng = np.random.default_rng(seed)
    op = FermionOperator()
    for _ in range(3):
        length = int(rng.integers(1, 5))
        term = [(int(rng.integers(4)), bool(rng.integers(2))) for _ in range(length)]
        op = op + FermionOperator(term, complex(rng.normal(), rng.normal()))
    from conftest import dense_qubit
    assert np.allclose(dense_qubit(jordan_wigner(op, 4)), dense_operator(op, 4), atol=1e-12)


def _family_generators(family):
    spec = AnsatzSpec.create(family, N_SPATIAL, 2, "S1")
    return {sl.excitation for sl in ParameterMap.build(spec).slots}


@pytest.mark.parametrize("family", sorted(FAMILIES))
def test_generators_commute_with_n_and_sz(family):
    N = jordan_wigner(build_number(N_SPATIAL), N_QUBITS)
    Sz = jordan_wigner(build_sz(N_SPATIAL), N_QUBITS)
    for exc in _family_generators(family):
        G = jordan_wigner(exc.generator(), N_QUBITS)
        assert G.is_anti_hermitian()
        assert G.commutator(N).norm() < 1e-12
        assert G.commutator(Sz).norm() < 1e-12


# ---- statevector ------------------------------------------------------------------

gate_st = st.one_of(
    st.tuples(st.just("X"), st.integers(0, 3)).map(lambda t: Gate(t[0], (t[1],))),
    st.tuples(st.just("H"), st.integers(0, 3)).map(lambda t: Gate(t[0], (t[1],))),
    st.tuples(st.integers(0, 3), st.integers(0, 3)).filter(lambda t: t[0] != t[1])
      .map(lambda t: Gate("CNOT", t)),
)


@FAST
@given(gates=st.lists(gate_st, min_size=1, max_size=40))
def test_prep_circuits_normalized(gates):
    state = PrepCircuit(4, tuple(gates)).run()
    assert abs(state.norm() - 1) < 1e-12


def test_norm_after_ten_thousand_gates():
    rng = np.random.default_rng(0)
    state = random_state(1, 4)
    for _ in range(10_000):
        r = rng.integers(3)
        if r == 0:
            apply_gate(state, Gate("H", (int(rng.integers(4)),)))
        elif r == 1:
            c, t = rng.choice(4, 2, replace=False)
            apply_gate(state, Gate("CNOT", (int(c), int(t))))
        else:
            x, z = int(rng.integers(1, 16)), int(rng.integers(16))
            state = apply_pauli_exponential(state, (x, z), float(rng.uniform(-3, 3)))
    assert abs(state.norm() - 1) < 1e-12


@FAST
@given(seed=seeds, x=st.integers(0, 15), z=st.integers(0, 15), theta=angles)
def test_pauli_exponential_inverse(seed, x, z, theta):
    assume(x or z)
    psi = random_state(seed, 4)
    back = apply_pauli_exponential(apply_pauli_exponential(psi, (x, z), theta), (x, z), -theta)
    assert np.allclose(back.amplitudes, psi.amplitudes, atol=1e-12)


@pytest.mark.parametrize("label,kets", [
    ("S2", {"1100": 1, "0011": -1}),
    ("S3", {"0110": 1, "1001": -1}),
])
def test_multireference_circuits_bit_exact(label, kets):
    target = Statevector.from_kets(kets)
    assert np.array_equal(prepare_register(label, 4, 2).amplitudes, target.amplitudes)


# ---- ansatz circuits ------------------------------------------------------------------

def _circuit_state(family, register, params):
    spec = AnsatzSpec.create(family, N_SPATIAL, 2, register)
    mapping = ParameterMap.build(spec)
    ref = prepare_register(register, N_QUBITS, 2)
    return run_circuit(ref, compile_circuit(spec, mapping, params))


def _n_params(family, register="S1"):
    return ParameterMap.build(AnsatzSpec.create(family, N_SPATIAL, 2, register)).n_params


CONSERVE = settings(max_examples=100, deadline=None, suppress_health_check=[HealthCheck.too_slow])


@pytest.mark.parametrize("family", ["UCCSD", "UCCS'D", "UCCD", "UCCGSD", "UCCGS'D", "UCCGD",
                                    "2-UpCCGSD", "2-UpCCGS'D", "2-UpCCGD", "2-UpCCSGD",
                                    "2-UpCCS'GD"])
def test_circuit_conserves_n_and_sz(family):
    N = jordan_wigner(build_number(N_SPATIAL), N_QUBITS)
    Sz = jordan_wigner(build_sz(N_SPATIAL), N_QUBITS)
    n = _n_params(family)

    @CONSERVE
    @given(params=arrays(np.float64, n, elements=st.floats(-2, 2)))
    def check(params):
        psi = _circuit_state(family, "S1", params)
        assert expectation(psi, N) == pytest.approx(2.0, abs=1e-10)
        assert expectation(psi, Sz) == pytest.approx(0.0, abs=1e-10)

    check()


@pytest.mark.parametrize("family,register", [
    ("1-UpCCGS'D", "S1"), ("2-UpCCGS'D", "S1"), ("2-UpCCGS'D", "S2"), ("2-UpCCS'GD", "S1"),
])
def test_primed_pair_families_keep_mirror_symmetry(family, register):
    n = _n_params(family, register)

    @CONSERVE
    @given(params=arrays(np.float64, n, elements=st.floats(-2, 2)))
    def check(params):
        psi = _circuit_state(family, register, params).amplitudes
        # eigenvector of the spin flip: |<psi|F psi>| = 1
        assert abs(np.vdot(psi, spin_flip(psi, N_QUBITS))) == pytest.approx(1.0, abs=1e-10)

    check()


def test_unpaired_doubles_break_mirror_symmetry():
    # primed singles alone are not enough once alpha-beta doubles have free amplitudes
    params = np.random.default_rng(0).normal(scale=0.5, size=_n_params("UCCS'D"))
    psi = _circuit_state("UCCS'D", "S1", params).amplitudes
    assert abs(np.vdot(psi, spin_flip(psi, N_QUBITS))) < 0.99


@FAST
@given(params=arrays(np.float64, _n_params("2-UpCCGSD"), elements=st.floats(-2, 2)))
def test_compile_deterministic(params):
    spec = AnsatzSpec.create("2-UpCCGSD", N_SPATIAL, 2, "S1")
    assert compile_circuit(spec, ParameterMap.build(spec), params) == \
        compile_circuit(spec, ParameterMap.build(spec), params)


# ---- variational bound and gradients -----------------------------------------------

@settings(max_examples=15, deadline=None)
@given(seed=seeds, family=st.sampled_from(["UCCSD", "UCCGSD", "2-UpCCGSD"]))
def test_variational_bound_random_hamiltonians(seed, family):
    mo = random_mo(3, seed=seed, e_nuc=0.3)
    obj = Objective.from_integrals(mo, family, "S1", n_electrons=2)
    res = minimize(obj, RestartPolicy(n_restarts=1, seed=seed % 1000))
    e_fci = fci_solve(mo, 2, 0.0).energies[0]
    assert res.energy >= e_fci - 1e-9


@settings(max_examples=15, deadline=None)
@given(seed=seeds, penalty=st.floats(0.0, 10.0))
def test_gradient_against_five_point(seed, penalty):
    mo = random_mo(2, seed=seed)
    obj = Objective.from_integrals(mo, "UCCGSD", "S", n_electrons=2, penalty=penalty)
    x = np.random.default_rng(seed).normal(scale=0.5, size=obj.n_params)
    f = lambda y: evaluate(obj, y)[0]
    h = 1e-3
    oracle = np.array([(-f(x + 2 * e) + 8 * f(x + e) - 8 * f(x - e) + f(x - 2 * e)) / (12 * h)
                       for e in np.eye(len(x)) * h])
    fd = gradient(obj, x)
    assert np.all(np.abs(fd - oracle) <= np.maximum(1e-6 * np.abs(oracle), 1e-9) + 5e-9)
    assert np.allclose(obj.value_and_grad(x)[1], fd, atol=1e-7)


# ---- integrals and files ----------------------------------------------------------

@FAST
@given(seed=seeds, n=st.integers(1, 4), e_nuc=st.floats(-50, 50), e_core=st.floats(-5, 5))
def test_fcidump_roundtrip_bit_exact(tmp_path_factory, seed, n, e_nuc, e_core):
    mo = random_mo(n, seed=seed, e_nuc=e_nuc)
    mo = MOIntegrals(mo.h, mo.g, e_nuc, e_core, n_electrons=min(2, 2 * n), ms2=0)
    path = tmp_path_factory.mktemp("dump") / "x.fcidump"
    write_fcidump(path, mo)
    back = read_fcidump(path)
    assert np.array_equal(back.h, mo.h) and np.array_equal(back.g, mo.g)
    assert back.e_nuc == mo.e_nuc and back.e_core == mo.e_core


@settings(max_examples=10, deadline=None)
@given(seed=seeds)
def test_dual_oracle_random_sectors(seed):
    mo = random_mo(3, seed=seed)
    H = jordan_wigner(build_hamiltonian(mo), 6)
    rng = np.random.default_rng(seed)
    ne = int(rng.integers(1, 6))
    sz = (ne % 2) / 2
    sol = fci_solve(mo, ne, sz, n_roots=400)
    assert np.allclose(sol.energies, qubit_space_diagonalize(H, ne, sz), atol=1e-9)
    assert np.allclose(sol.s2, np.round(sol.s2 * 4) / 4, atol=1e-8)


geometries = st.builds(
    lambda r1, r2: geo.h3_linear(r1, r2),
    st.floats(0.5, 2.5), st.floats(0.5, 2.5),
)


@settings(max_examples=10, deadline=None)
@given(g=geometries)
def test_overlap_positive_definite_and_rhf_bound(g):
    ao = compute_s_integrals(g, load_basis("6-31G", [a.label for a in g.atoms]))
    assert np.allclose(ao.overlap, ao.overlap.T)
    assert np.linalg.eigvalsh(ao.overlap).min() > 0
    cation = geo.Geometry(g.atoms, charge=1)
    e_rhf = run_rhf(compute_s_integrals(cation, load_basis("6-31G", ["H"] * 3)), 2).energy
    mo = molecule_integrals(cation, "6-31G")
    assert e_rhf >= fci_solve(mo, 2, 0.0).energies[0] - 1e-10


@settings(max_examples=8, deadline=None)
@given(seed=seeds, bond=st.floats(0.5, 2.0))
def test_rigid_motion_invariance(seed, bond):
    from scipy.stats import special_ortho_group
    g = geo.h3_linear(bond, 0.93, charge=1)
    R = special_ortho_group.rvs(3, random_state=seed % (2 ** 31))
    t = np.random.default_rng(seed).normal(size=3) * 3
    e0 = [fci_solve(molecule_integrals(g, "STO-3G"), 2, sz).energies[0] for sz in (0.0, 1.0)]
    moved = g.transformed(R, t)
    e1 = [fci_solve(molecule_integrals(moved, "STO-3G"), 2, sz).energies[0] for sz in (0.0, 1.0)]
    assert np.allclose(e0, e1, atol=1e-8)
