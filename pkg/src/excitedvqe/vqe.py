"""Penalized VQE objective, gradients and restarted quasi-Newton minimization."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.optimize import minimize as scipy_minimize

from .ansatz import AnsatzSpec, CompiledAnsatz, ParameterMap, run_circuit
from .engine import SectorEngine
from .fermion import build_hamiltonian, build_number, build_s2
from .optimize import LBFGSOptions, lbfgs
from .qubit import QubitOperator, jordan_wigner
from .scf import MOIntegrals
from .statesim import Statevector, expectation, prepare_register

FD_STEP = 1e-6


class OptimizationError(RuntimeError):
    pass


@dataclass
class Objective:
    """E_VQE = E + p * (<S^2> - target)^2 with target 0 unless ``s2_target`` is set."""

    hamiltonian: QubitOperator
    s2: QubitOperator
    spec: AnsatzSpec
    mapping: ParameterMap
    reference: Statevector
    penalty: float = 0.0
    s2_target: float | None = None

    def __post_init__(self):
        if self.penalty < 0:
            raise ValueError("penalty must be non-negative")
        if self.mapping.spec != self.spec:
            raise ValueError("parameter map does not belong to this ansatz")
        if self.reference.n_qubits != self.hamiltonian.n_qubits:
            raise ValueError("reference and Hamiltonian sizes differ")

    @classmethod
    def from_integrals(cls, mo: MOIntegrals, family: str, register: str, n_electrons=None,
                       k=None, penalty=0.0, reference: Statevector | None = None,
                       s2_target=None) -> "Objective":
        n_electrons = mo.n_electrons if n_electrons is None else n_electrons
        if n_electrons is None:
            raise ValueError("electron count unknown")
        n_qubits = 2 * mo.n_orb
        if reference is None:
            reference = prepare_register(register, n_qubits, n_electrons)
            ref_det = None
        else:
            ref_det = int(np.argmax(np.abs(reference.amplitudes)))
        spec = AnsatzSpec.create(family, mo.n_orb, n_electrons, register, reference_det=ref_det, k=k)
        return cls(
            hamiltonian=jordan_wigner(build_hamiltonian(mo), n_qubits),
            s2=jordan_wigner(build_s2(mo.n_orb), n_qubits),
            spec=spec, mapping=ParameterMap.build(spec), reference=reference,
            penalty=penalty, s2_target=s2_target,
        )

    def with_k(self, k: int) -> "Objective":
        spec = AnsatzSpec(self.spec.family, k, self.spec.n_spatial, self.spec.n_electrons,
                          self.spec.register, self.spec.reference_det)
        return Objective(self.hamiltonian, self.s2, spec, ParameterMap.build(spec), self.reference,
                         self.penalty, self.s2_target)

    def with_penalty(self, penalty: float) -> "Objective":
        return Objective(self.hamiltonian, self.s2, self.spec, self.mapping, self.reference,
                         penalty, self.s2_target)

    @property
    def n_params(self) -> int:
        return self.mapping.n_params

    @property
    def target(self) -> float:
        return 0.0 if self.s2_target is None else float(self.s2_target)

    @cached_property
    def engine(self) -> SectorEngine:
        return SectorEngine.build(self.mapping, self.reference, self.hamiltonian, self.s2)

    def state(self, params) -> Statevector:
        return self.engine.statevector(params)

    def circuit_state(self, params) -> Statevector:
        """Same state via explicit Pauli exponentials on the full register (slow reference path)."""
        return run_circuit(self.reference, CompiledAnsatz(self.mapping).circuit(params))

    def value_and_grad(self, params):
        v, _, _, g = self.engine.value_and_grad(params, self.penalty, self.target)
        return v, g


def evaluate(objective: Objective, params) -> tuple[float, float, float]:
    """(E_VQE, E, <S^2>)."""
    psi = objective.engine.state_vector(params)
    e, s2, _ = objective.engine.observables(psi)
    return e + objective.penalty * (s2 - objective.target) ** 2, e, s2


def gradient(objective: Objective, params, step: float = FD_STEP, fun=None) -> np.ndarray:
    """Central finite differences of E_VQE (or of ``fun`` when given)."""
    f = fun if fun is not None else (lambda x: evaluate(objective, x)[0])
    params = np.asarray(params, dtype=float)
    out = np.empty(len(params))
    for i in range(len(params)):
        e = np.zeros(len(params))
        e[i] = step
        out[i] = (f(params + e) - f(params - e)) / (2 * step)
    return out


def adjoint_gradient(objective: Objective, params) -> np.ndarray:
    return objective.value_and_grad(params)[1]


@dataclass(frozen=True)
class RestartPolicy:
    n_restarts: int | None = None  # None: 8 for k > 1, else 1
    r_f: float = 1e-2  # variance of the initial amplitudes
    seed: int = 0
    initial: tuple | None = None  # explicit starting vector for restart 0

    def __post_init__(self):
        if self.r_f <= 0:
            raise ValueError("r_f must be positive")
        if self.n_restarts is not None and self.n_restarts < 1:
            raise ValueError("need at least one restart")

    def count(self, spec: AnsatzSpec) -> int:
        if self.n_restarts is not None:
            return self.n_restarts
        return 8 if spec.k > 1 else 1

    def starts(self, spec: AnsatzSpec, n_params: int) -> list[np.ndarray]:
        n = self.count(spec)
        children = np.random.SeedSequence(self.seed).spawn(n)
        starts = [np.random.default_rng(c).normal(0.0, np.sqrt(self.r_f), n_params) for c in children]
        if self.initial is not None:
            x0 = np.asarray(self.initial, dtype=float)
            if x0.shape != (n_params,):
                raise ValueError("initial vector length does not match the ansatz")
            starts[0] = x0.copy()
        return starts


@dataclass
class RestartRecord:
    index: int
    e_vqe: float
    energy: float
    s2: float
    iterations: int
    gradient_norm: float
    converged: bool
    message: str
    params: np.ndarray = field(repr=False)
    failed: bool = False


@dataclass
class VQEResult:
    e_vqe: float
    energy: float
    params: np.ndarray
    s2_expectation: float
    n_expectation: float
    iterations: int
    gradient_norm: float
    restart_index: int
    converged: bool
    message: str
    restarts: list[RestartRecord] = field(default_factory=list)
    wall_time: float = 0.0

    @property
    def restart_energies(self) -> np.ndarray:
        return np.array([r.e_vqe for r in self.restarts if not r.failed])

    @property
    def spread(self) -> tuple[float, float]:
        e = self.restart_energies
        return float(e.min()), float(e.max())

    @property
    def failed_restarts(self) -> list[int]:
        return [r.index for r in self.restarts if r.failed]


def format_progress(restart: int, it: int, e_vqe: float, e: float, s2: float, gnorm: float) -> str:
    return f"restart {restart:3d} iter {it:5d} {e_vqe:20.12f} {e:20.12f} {s2:14.10f} {gnorm:12.4e}"


def _run_one(objective, x0, index, options, method, grad_mode, log):
    if grad_mode == "adjoint":
        fg = objective.value_and_grad
    elif grad_mode == "fd":
        def fg(x):
            return evaluate(objective, x)[0], gradient(objective, x)
    else:
        raise ValueError(f"unknown gradient mode {grad_mode!r}")

    def callback(it, x, f, g):
        if log is not None:
            v, e, s2 = evaluate(objective, x)
            log(format_progress(index, it, v, e, s2, float(np.linalg.norm(g))))

    if method == "lbfgs":
        res = lbfgs(fg, x0, options, callback=callback)
        x, iters, converged, msg = res.x, res.iterations, res.converged, res.message
    elif method == "L-BFGS-B":
        counter = [0]

        def cb(xk):
            counter[0] += 1
            callback(counter[0], xk, None, fg(xk)[1])

        res = scipy_minimize(fg, x0, jac=True, method="L-BFGS-B", callback=cb,
                             options={"maxiter": options.max_iter, "gtol": options.gtol,
                                      "ftol": 1e-15, "maxcor": options.history})
        x, iters, converged, msg = res.x, int(res.nit), bool(res.success), str(res.message)
    else:
        raise ValueError(f"unknown method {method!r}")
    v, e, s2 = evaluate(objective, x)
    g = fg(x)[1]
    if not np.isfinite(v):
        raise OptimizationError("non-finite objective")
    return RestartRecord(index, v, e, s2, iters, float(np.linalg.norm(g)), converged, msg, x)


def minimize(objective: Objective, policy: RestartPolicy = RestartPolicy(),
             options: LBFGSOptions = LBFGSOptions(max_iter=2000), method: str = "lbfgs",
             grad_mode: str = "adjoint", log=None) -> VQEResult:
    """Run every restart of ``policy`` and keep the lowest E_VQE.

    ``log`` is an optional callable receiving one progress line per iteration.
    A restart that raises or produces non-finite values is recorded as failed.
    """
    t0 = time.perf_counter()
    records = []
    for i, x0 in enumerate(policy.starts(objective.spec, objective.n_params)):
        try:
            records.append(_run_one(objective, x0, i, options, method, grad_mode, log))
        except (OptimizationError, FloatingPointError, np.linalg.LinAlgError) as exc:
            records.append(RestartRecord(i, np.nan, np.nan, np.nan, 0, np.nan, False,
                                         f"failed: {exc}", x0, failed=True))
    good = [r for r in records if not r.failed]
    if not good:
        raise OptimizationError("all restarts failed")
    best = min(good, key=lambda r: (r.e_vqe, r.index))
    # observables recomputed from the final state on the full register
    state = objective.state(best.params)
    s2 = expectation(state, objective.s2)
    n = expectation(state, jordan_wigner(build_number(objective.spec.n_spatial), state.n_qubits))
    return VQEResult(
        e_vqe=best.e_vqe, energy=best.energy, params=best.params, s2_expectation=s2,
        n_expectation=n, iterations=best.iterations, gradient_norm=best.gradient_norm,
        restart_index=best.index, converged=best.converged, message=best.message,
        restarts=records, wall_time=time.perf_counter() - t0,
    )
