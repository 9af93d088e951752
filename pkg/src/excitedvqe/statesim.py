"""Dense statevector simulation.

Bit ``q`` of a basis index is the occupation of qubit ``q``. Kets are written
left to right as qubit 0 ... n-1, so ``"1100"`` is index ``0b0011``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .qubit import QubitOperator, string_to_masks

MAX_QUBITS = 16


def ket_to_index(ket: str) -> int:
    return sum(1 << q for q, ch in enumerate(ket) if ch == "1")


def index_to_ket(index: int, n_qubits: int) -> str:
    return "".join("1" if (index >> q) & 1 else "0" for q in range(n_qubits))


@dataclass
class Statevector:
    amplitudes: np.ndarray
    n_qubits: int

    def __post_init__(self):
        if self.n_qubits > MAX_QUBITS:
            raise ValueError(f"{self.n_qubits} qubits exceeds the dense limit of {MAX_QUBITS}")
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if self.amplitudes.shape != (1 << self.n_qubits,):
            raise ValueError("amplitude vector length must be 2**n_qubits")

    @classmethod
    def zero(cls, n_qubits: int) -> "Statevector":
        amps = np.zeros(1 << n_qubits, dtype=complex)
        amps[0] = 1.0
        return cls(amps, n_qubits)

    @classmethod
    def from_ket(cls, ket: str) -> "Statevector":
        state = cls(np.zeros(1 << len(ket), dtype=complex), len(ket))
        state.amplitudes[ket_to_index(ket)] = 1.0
        return state

    @classmethod
    def from_kets(cls, kets: dict[str, complex]) -> "Statevector":
        n = len(next(iter(kets)))
        state = cls(np.zeros(1 << n, dtype=complex), n)
        for ket, amp in kets.items():
            state.amplitudes[ket_to_index(ket)] += amp
        return state.normalized()

    def copy(self) -> "Statevector":
        return Statevector(self.amplitudes.copy(), self.n_qubits)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> "Statevector":
        return Statevector(self.amplitudes / self.norm(), self.n_qubits)

    def fidelity(self, other: "Statevector") -> float:
        return float(abs(np.vdot(self.amplitudes, other.amplitudes)) ** 2)

    def equivalent(self, other: "Statevector", tol: float = 1e-12) -> bool:
        """Equality up to global phase."""
        return abs(np.vdot(self.amplitudes, other.amplitudes)) > 1 - tol

    def dump(self, threshold: float = 1e-8) -> str:
        lines = []
        for idx in np.nonzero(np.abs(self.amplitudes) > threshold)[0]:
            a = self.amplitudes[idx]
            lines.append(f"{index_to_ket(int(idx), self.n_qubits)} {a.real:.17g} {a.imag:.17g}")
        return "\n".join(lines) + "\n"


# ---- gates ------------------------------------------------------------------

@dataclass(frozen=True)
class Gate:
    name: str  # "X", "H" or "CNOT"
    qubits: tuple[int, ...]


@dataclass(frozen=True)
class PrepCircuit:
    n_qubits: int
    gates: tuple[Gate, ...]

    def __post_init__(self):
        for g in self.gates:
            if any(not 0 <= q < self.n_qubits for q in g.qubits):
                raise ValueError(f"gate {g} outside a {self.n_qubits}-qubit register")

    def run(self, state: Statevector | None = None) -> Statevector:
        state = Statevector.zero(self.n_qubits) if state is None else state.copy()
        for g in self.gates:
            apply_gate(state, g)
        return state


def apply_gate(state: Statevector, gate: Gate) -> None:
    amps = state.amplitudes
    idx = np.arange(len(amps))
    if gate.name == "X":
        (q,) = gate.qubits
        state.amplitudes = amps[idx ^ (1 << q)]
    elif gate.name == "H":
        (q,) = gate.qubits
        bit = (idx >> q) & 1
        partner = amps[idx ^ (1 << q)]
        state.amplitudes = np.where(bit == 0, amps + partner, partner - amps) / np.sqrt(2)
    elif gate.name == "CNOT":
        c, t = gate.qubits
        flip = ((idx >> c) & 1).astype(bool)
        src = np.where(flip, idx ^ (1 << t), idx)
        state.amplitudes = amps[src]
    else:
        raise ValueError(f"unknown gate {gate.name!r}")


def x_layer(qubits) -> list[Gate]:
    return [Gate("X", (q,)) for q in qubits]


def closed_shell_circuit(local) -> list[Gate]:
    """(|1100> - |0011>)/sqrt(2) on the four ``local`` qubits."""
    a, b, c, d = local
    return x_layer((a, b, c)) + [Gate("H", (c,)), Gate("CNOT", (c, a)), Gate("CNOT", (c, b)),
                                 Gate("CNOT", (c, d))]


def open_shell_circuit(local) -> list[Gate]:
    """(|0110> - |1001>)/sqrt(2) on the four ``local`` qubits."""
    a, b, c, d = local
    return x_layer((a, b, c)) + [Gate("H", (a,)), Gate("CNOT", (a, d)), Gate("CNOT", (a, c)),
                                 Gate("CNOT", (a, b))]


REGISTER_LABELS = ("S", "S1", "S2", "S3", "T", "D", "Q")


def register_circuit(label: str, n_qubits: int, n_electrons: int) -> PrepCircuit:
    """Reference-register preparation in the alternating alpha/beta qubit layout.

    S/S1 and D fill the lowest ``n_electrons`` spin orbitals. T moves the top
    pair to two alpha electrons in HOMO and LUMO; Q puts three alpha electrons
    in the top three orbitals. S2 and S3 entangle the four qubits starting at
    ``n_electrons - 2`` (HOMO and LUMO spin orbitals).
    """
    label = label.upper()
    if label in ("S", "S1", "D"):
        if (label == "D") != (n_electrons % 2 == 1):
            raise ValueError(f"register {label} incompatible with {n_electrons} electrons")
        gates = x_layer(range(n_electrons))
        top = n_electrons
    elif label == "T":
        core = n_electrons - 2
        _require(core >= 0 and core % 2 == 0, label, n_electrons)
        gates = x_layer(list(range(core)) + [core, core + 2])
        top = core + 3
    elif label == "Q":
        core = n_electrons - 3
        _require(core >= 0 and core % 2 == 0, label, n_electrons)
        gates = x_layer(list(range(core)) + [core, core + 2, core + 4])
        top = core + 5
    elif label in ("S2", "S3"):
        core = n_electrons - 2
        _require(core >= 0 and core % 2 == 0, label, n_electrons)
        local = (core, core + 1, core + 2, core + 3)
        build = closed_shell_circuit if label == "S2" else open_shell_circuit
        gates = x_layer(range(core)) + build(local)
        top = core + 4
    else:
        raise ValueError(f"unknown register label {label!r}; known: {', '.join(REGISTER_LABELS)}")
    if top > n_qubits:
        raise ValueError(f"register {label} needs {top} qubits, have {n_qubits}")
    return PrepCircuit(n_qubits, tuple(gates))


def _require(ok, label, n_electrons):
    if not ok:
        raise ValueError(f"register {label} incompatible with {n_electrons} electrons")


def prepare_register(label: str, n_qubits: int, n_electrons: int) -> Statevector:
    """Prepare a named register; ``ket:<bits>`` gives an explicit basis state."""
    if label.lower().startswith("ket:"):
        ket = label[4:]
        if len(ket) != n_qubits or set(ket) - {"0", "1"}:
            raise ValueError(f"bad explicit ket {ket!r}")
        return Statevector.from_ket(ket)
    return register_circuit(label, n_qubits, n_electrons).run()


def is_multireference(label: str) -> bool:
    return label.upper() in ("S2", "S3")


def is_closed_shell(label: str) -> bool:
    return label.upper() in ("S", "S1", "S2")


# ---- Pauli rotations and observables ------------------------------------------

def pauli_action(state_amps: np.ndarray, x: int, z: int) -> np.ndarray:
    """P(x, z) |psi> for the masked Pauli string."""
    idx = np.arange(len(state_amps), dtype=np.int64)
    phase = (1j) ** (bin(x & z).count("1") % 4) * (1 - 2 * (np.bitwise_count(idx & z) & 1).astype(np.int64))
    out = np.empty_like(state_amps)
    out[idx ^ x] = phase * state_amps
    return out


def apply_pauli_exponential(state: Statevector, pauli, angle: float) -> Statevector:
    """exp(i angle P) |psi> = cos(angle) |psi> + i sin(angle) P |psi>."""
    x, z = pauli if isinstance(pauli, tuple) and len(pauli) == 2 and isinstance(pauli[0], int) \
        else string_to_masks(pauli)
    if x == 0 and z == 0:
        raise ValueError("identity string has no nontrivial exponential")
    amps = state.amplitudes
    new = np.cos(angle) * amps + 1j * np.sin(angle) * pauli_action(amps, x, z)
    return Statevector(new, state.n_qubits)


def expectation(state: Statevector, op: QubitOperator) -> float:
    if op.n_qubits != state.n_qubits:
        raise ValueError("operator/state qubit mismatch")
    if not op.is_hermitian(1e-10):
        raise ValueError("expectation requires a Hermitian operator")
    psi = state.amplitudes
    value = np.vdot(psi, op.to_sparse() @ psi)
    if abs(value.imag) > 1e-10:
        raise ArithmeticError(f"expectation has imaginary part {value.imag:.3e}")
    return float(value.real)


def dominant_determinants(state: Statevector, cutoff: float = 0.01):
    if not 0 < cutoff < 1:
        raise ValueError("cutoff must lie in (0, 1)")
    probs = np.abs(state.amplitudes) ** 2
    idx = np.nonzero(probs >= cutoff)[0]
    idx = idx[np.argsort(-probs[idx], kind="stable")]
    return [(index_to_ket(int(i), state.n_qubits), complex(state.amplitudes[i])) for i in idx]
