"""Exact statevector simulation for 1 to 4 qubits.

Basis indices are little-endian: qubit 0 is the least significant bit, so
``|b_{n-1} ... b_1 b_0>`` lives at index ``sum(b_q << q)``.

Every angled gate is ``exp(-1j * angle / 2 * P)`` for a Pauli string ``P``
with eigenvalues +-1, which is what makes the two-term shift rule exact.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

MAX_QUBITS = 4

_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)
_H = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)


class GateKind(str, enum.Enum):
    H = "H"
    RX = "RX"
    RY = "RY"
    RZ = "RZ"
    RXX = "RXX"
    RYY = "RYY"

    @property
    def arity(self) -> int:
        return 2 if self in (GateKind.RXX, GateKind.RYY) else 1

    @property
    def angled(self) -> bool:
        return self is not GateKind.H

    @property
    def generator(self) -> np.ndarray | None:
        """Hermitian Pauli string P with U(angle) = exp(-1j*angle/2*P)."""
        return _GENERATORS.get(self)


_GENERATORS = {
    GateKind.RX: _X,
    GateKind.RY: _Y,
    GateKind.RZ: _Z,
    # for two-qubit gates the first target is the more significant kron factor
    GateKind.RXX: np.kron(_X, _X),
    GateKind.RYY: np.kron(_Y, _Y),
}


@dataclass(frozen=True, eq=False)
class StateVector:
    """Normalised pure state of ``num_qubits`` qubits."""

    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex).reshape(-1)
        n = _num_qubits_for(len(amps))
        norm = float(np.vdot(amps, amps).real)
        if abs(norm - 1.0) > 1e-10:
            raise ValueError(f"state is not normalised (norm^2 = {norm:.3e})")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "_n", n)

    @property
    def num_qubits(self) -> int:
        return self._n

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def equals_up_to_phase(self, other: StateVector, atol: float = 1e-12) -> bool:
        if other.num_qubits != self.num_qubits:
            return False
        return abs(abs(np.vdot(self.amplitudes, other.amplitudes)) - 1.0) <= atol

    def __repr__(self):
        return f"StateVector(num_qubits={self.num_qubits}, amplitudes={self.amplitudes!r})"


def _num_qubits_for(length: int) -> int:
    n = length.bit_length() - 1
    if length < 2 or (1 << n) != length or n > MAX_QUBITS:
        raise ValueError(f"amplitude vector length {length} is not 2**n for n in 1..{MAX_QUBITS}")
    return n


def _check_num_qubits(num_qubits: int) -> None:
    if not 1 <= num_qubits <= MAX_QUBITS:
        raise ValueError(f"num_qubits must be in 1..{MAX_QUBITS}, got {num_qubits}")


def zero_state(num_qubits: int) -> StateVector:
    _check_num_qubits(num_qubits)
    amps = np.zeros(1 << num_qubits, dtype=complex)
    amps[0] = 1.0
    return StateVector(amps)


def gate_matrix(kind: GateKind | str, angle: float = 0.0) -> np.ndarray:
    """Unitary of ``kind`` at ``angle`` (ignored for H)."""
    kind = GateKind(kind)
    if kind is GateKind.H:
        return _H.copy()
    if not math.isfinite(angle):
        raise ValueError(f"gate angle must be finite, got {angle}")
    return batched_gate_matrices(kind, np.array([angle], dtype=float))[0]


def batched_gate_matrices(kind: GateKind, angles: np.ndarray) -> np.ndarray:
    """Stack of unitaries, one per entry of ``angles`` (shape ``(B, d, d)``)."""
    if kind is GateKind.H:
        return np.broadcast_to(_H, (len(angles), 2, 2))
    p = _GENERATORS[kind]
    half = 0.5 * np.asarray(angles, dtype=float)
    c = np.cos(half)[:, None, None]
    s = np.sin(half)[:, None, None]
    return c * np.eye(p.shape[0]) - 1j * s * p


def _check_targets(kind: GateKind, targets, num_qubits: int) -> tuple[int, ...]:
    targets = tuple(int(t) for t in targets)
    if len(targets) != kind.arity:
        raise ValueError(f"{kind.value} acts on {kind.arity} qubit(s), got targets {targets}")
    if len(set(targets)) != len(targets):
        raise ValueError(f"duplicate targets {targets}")
    for t in targets:
        if not 0 <= t < num_qubits:
            raise ValueError(f"target {t} out of range for {num_qubits} qubits")
    return targets


def apply_matrices(states: np.ndarray, mats: np.ndarray, targets: tuple[int, ...]) -> np.ndarray:
    """Apply per-row gate matrices to a batch of statevectors.

    ``states`` has shape ``(B, 2**n)`` and ``mats`` shape ``(B, d, d)`` with
    ``d = 2**len(targets)``.  Targets must already be validated.
    """
    batch, dim = states.shape
    n = dim.bit_length() - 1
    # reshaped axis 1 + k holds qubit n - 1 - k
    axes = [1 + n - 1 - t for t in targets]
    psi = states.reshape((batch,) + (2,) * n)
    psi = np.moveaxis(psi, axes, range(n + 1 - len(targets), n + 1))
    moved_shape = psi.shape
    psi = psi.reshape(batch, -1, 1 << len(targets))
    psi = np.einsum("bij,bkj->bki", mats, psi)
    psi = psi.reshape(moved_shape)
    psi = np.moveaxis(psi, range(n + 1 - len(targets), n + 1), axes)
    return psi.reshape(batch, dim)


def apply_gate(state: StateVector, kind: GateKind | str, angle: float | None, targets) -> StateVector:
    kind = GateKind(kind)
    targets = _check_targets(kind, targets, state.num_qubits)
    mat = gate_matrix(kind, 0.0 if angle is None else angle)
    out = apply_matrices(state.amplitudes[None, :], mat[None], targets)[0]
    return StateVector(out)


def z_expectations(states: np.ndarray, qubit: int) -> np.ndarray:
    """Pauli-Z expectation on ``qubit`` for each row of a state batch."""
    probs = np.abs(states) ** 2
    idx = np.arange(states.shape[1])
    signs = 1.0 - 2.0 * ((idx >> qubit) & 1)
    return probs @ signs


def expectation_pauli_z(state: StateVector, qubit: int) -> float:
    if not 0 <= qubit < state.num_qubits:
        raise ValueError(f"qubit {qubit} out of range for {state.num_qubits} qubits")
    return float(z_expectations(state.amplitudes[None, :], qubit)[0])


def basis_encode(bits) -> StateVector:
    """Computational basis state ``|b_{n-1} ... b_0>`` with ``bits[q]`` on qubit q."""
    bits = list(bits)
    _check_num_qubits(len(bits))
    index = 0
    for q, b in enumerate(bits):
        if b not in (0, 1):
            raise ValueError(f"basis encoding needs binary entries, got {b!r}")
        index |= int(b) << q
    amps = np.zeros(1 << len(bits), dtype=complex)
    amps[index] = 1.0
    return StateVector(amps)


def amplitude_encode(data) -> StateVector:
    """Normalised amplitudes, zero-padded to the next power of two (min. 2)."""
    x = np.asarray(data, dtype=float).reshape(-1)
    if x.size == 0 or x.size > 1 << MAX_QUBITS:
        raise ValueError(f"amplitude encoding takes 1..{1 << MAX_QUBITS} values, got {x.size}")
    norm = np.linalg.norm(x)
    if norm == 0.0:
        raise ValueError("cannot amplitude-encode an all-zero vector")
    dim = max(2, 1 << (x.size - 1).bit_length())
    amps = np.zeros(dim, dtype=complex)
    amps[: x.size] = x / norm
    return StateVector(amps)


def dense_angle_encode(data) -> StateVector:
    """Two features per qubit: ``cos(pi a)|0> + exp(2j pi b) sin(pi a)|1>``.

    Feature pair ``(data[2q], data[2q + 1])`` goes to qubit q.
    """
    x = np.asarray(data, dtype=float).reshape(-1)
    if x.size == 0 or x.size % 2:
        raise ValueError(f"dense angle encoding needs an even number of features, got {x.size}")
    _check_num_qubits(x.size // 2)
    amps = np.ones(1, dtype=complex)
    for q in range(x.size // 2):
        a, b = x[2 * q], x[2 * q + 1]
        qubit = np.array([math.cos(math.pi * a), np.exp(2j * math.pi * b) * math.sin(math.pi * a)])
        # qubit q is more significant than every earlier one
        amps = np.kron(qubit, amps)
    return StateVector(amps)
