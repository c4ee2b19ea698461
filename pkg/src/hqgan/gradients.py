"""Parameter-shift derivatives of Pauli-Z readouts.

Shifts are applied per gate occurrence: a parameter (or input feature) that
enters a gate as ``scale * value`` contributes
``scale * (f(angle + pi/2) - f(angle - pi/2)) / 2`` for that gate, summed over
all gates it feeds.  For a parameter used once with unit scale this is the
plain two-term rule ``(f(theta_i + pi/2) - f(theta_i - pi/2)) / 2``.
"""
from __future__ import annotations

import math

import numpy as np

from .circuits import Circuit, DataFeature, Trainable, _as_rows, simulate
from .sim import z_expectations
from .telemetry import instrument, record_grad_norm  # noqa: F401  (re-exported)

SHIFT = math.pi / 2
DEFAULT_EPSILON = 1e-4


def expectations(circuit: Circuit, features, thetas, qubits=None, offsets=None) -> np.ndarray:
    """Batched Z expectations, shape ``(B, len(qubits))``."""
    qubits = circuit.readout_qubits if qubits is None else tuple(qubits)
    for q in qubits:
        if not 0 <= q < circuit.num_qubits:
            raise ValueError(f"qubit {q} out of range")
    states = simulate(circuit, features, thetas, offsets)
    return np.stack([z_expectations(states, q) for q in qubits], axis=1)


def expectation(circuit: Circuit, features, theta, qubit: int = 0) -> float:
    return float(expectations(circuit, _single(features, circuit.num_features, "features"),
                              _single(theta, circuit.num_trainable, "theta"), (qubit,))[0, 0])


def _single(values, width, what):
    arr = np.asarray(values, dtype=float).reshape(-1)
    if arr.size != width:
        raise ValueError(f"{what} must have length {width}, got {arr.size}")
    return arr


def occurrences(circuit: Circuit, source: type) -> list[list[tuple[int, float]]]:
    """``(gate position, scale)`` pairs per parameter (``Trainable``) or feature (``DataFeature``)."""
    width = circuit.num_trainable if source is Trainable else circuit.num_features
    out: list[list[tuple[int, float]]] = [[] for _ in range(width)]
    for k, g in enumerate(circuit.gates):
        if isinstance(g.binding, source):
            out[g.binding.index].append((k, g.binding.scale))
    return out


def _shift_jacobian(circuit: Circuit, features: np.ndarray, thetas: np.ndarray, qubits, source) -> np.ndarray:
    """Exact derivatives for a batch of inputs, shape ``(S, len(qubits), width)``.

    ``features``/``thetas`` are row batches of a common length ``S`` (or 1).
    """
    occ = occurrences(circuit, source)
    flat = [(i, k, s) for i, lst in enumerate(occ) for k, s in lst]
    n_samples = max(features.shape[0], thetas.shape[0])
    width = len(occ)
    if not flat:
        return np.zeros((n_samples, len(qubits), width))
    n_occ = len(flat)
    n_gates = len(circuit.gates)
    # rows: sample-major, then occurrence, then (+, -)
    offsets = np.zeros((2 * n_occ, n_gates))
    for r, (_, k, _) in enumerate(flat):
        offsets[2 * r, k] = SHIFT
        offsets[2 * r + 1, k] = -SHIFT
    reps = 2 * n_occ
    f = np.repeat(np.broadcast_to(features, (n_samples, features.shape[1])), reps, axis=0)
    t = np.repeat(np.broadcast_to(thetas, (n_samples, thetas.shape[1])), reps, axis=0)
    vals = expectations(circuit, f, t, qubits, np.tile(offsets, (n_samples, 1)))
    vals = vals.reshape(n_samples, n_occ, 2, len(qubits))
    diffs = 0.5 * (vals[:, :, 0, :] - vals[:, :, 1, :])  # (S, n_occ, Q)
    index = np.array([i for i, _, _ in flat])
    scale = np.array([s for _, _, s in flat])
    jac = np.zeros((n_samples, len(qubits), width))
    for r in range(n_occ):
        jac[:, :, index[r]] += scale[r] * diffs[:, r, :]
    return jac


def theta_jacobian(circuit: Circuit, features, thetas, qubits=None) -> np.ndarray:
    """d<Z_q>/d theta_i for a batch of samples: shape ``(S, Q, num_trainable)``."""
    qubits = circuit.readout_qubits if qubits is None else tuple(qubits)
    f = _as_rows(features, circuit.num_features, None, "features")
    t = _as_rows(thetas, circuit.num_trainable, None, "theta")
    return _shift_jacobian(circuit, f, t, qubits, Trainable)


def feature_jacobian(circuit: Circuit, features, thetas, qubits=None) -> np.ndarray:
    """d<Z_q>/d x_j for a batch of samples: shape ``(S, Q, num_features)``."""
    qubits = circuit.readout_qubits if qubits is None else tuple(qubits)
    f = _as_rows(features, circuit.num_features, None, "features")
    t = _as_rows(thetas, circuit.num_trainable, None, "theta")
    return _shift_jacobian(circuit, f, t, qubits, DataFeature)


def param_shift_gradient(circuit: Circuit, features, theta, qubit: int = 0) -> np.ndarray:
    f = _single(features, circuit.num_features, "features")
    t = _single(theta, circuit.num_trainable, "theta")
    grad = _shift_jacobian(circuit, f[None], t[None], (qubit,), Trainable)[0, 0]
    record_grad_norm(np.linalg.norm(grad))
    return grad


def param_shift_derivative(circuit: Circuit, features, theta, i: int, qubit: int = 0) -> float:
    if not 0 <= i < circuit.num_trainable:
        raise ValueError(f"parameter index {i} out of range for {circuit.num_trainable} parameters")
    f = _single(features, circuit.num_features, "features")
    t = _single(theta, circuit.num_trainable, "theta")
    total = 0.0
    for k, scale in occurrences(circuit, Trainable)[i]:
        offsets = np.zeros((2, len(circuit.gates)))
        offsets[0, k], offsets[1, k] = SHIFT, -SHIFT
        plus, minus = expectations(circuit, f, t, (qubit,), offsets)[:, 0]
        total += scale * 0.5 * (plus - minus)
    return float(total)


def feature_derivative(circuit: Circuit, features, theta, j: int, qubit: int = 0, *,
                       mode: str = "exact", k: float = 0.5, delta: float = 0.5) -> float:
    """d<Z_qubit>/d x_j.

    ``mode="exact"`` sums the shift rule over every gate reading feature ``j``.
    ``mode="paper"`` is the single global shift ``k * (f(x_j + delta) - f(x_j - delta))``,
    which is only a heuristic when the feature feeds several gates.
    """
    if not 0 <= j < circuit.num_features:
        raise ValueError(f"feature index {j} out of range for {circuit.num_features} features")
    if mode == "paper":
        return feature_shift_difference(circuit, features, theta, j, k, delta, qubit)
    if mode != "exact":
        raise ValueError(f"mode must be 'exact' or 'paper', got {mode!r}")
    f = _single(features, circuit.num_features, "features")
    t = _single(theta, circuit.num_trainable, "theta")
    return float(_shift_jacobian(circuit, f[None], t[None], (qubit,), DataFeature)[0, 0, j])


def feature_shift_difference(circuit: Circuit, features, theta, j: int, k: float, delta: float,
                             qubit: int = 0) -> float:
    """Single global shift ``k * (f(x_j + delta) - f(x_j - delta))`` of the raw feature."""
    if not 0 <= j < circuit.num_features:
        raise ValueError(f"feature index {j} out of range for {circuit.num_features} features")
    f = _single(features, circuit.num_features, "features")
    t = _single(theta, circuit.num_trainable, "theta")
    rows = np.stack([f, f])
    rows[0, j] += delta
    rows[1, j] -= delta
    plus, minus = expectations(circuit, rows, t, (qubit,))[:, 0]
    return float(k * (plus - minus))


def finite_difference(circuit: Circuit, features, theta, i: int, qubit: int = 0,
                      epsilon: float = DEFAULT_EPSILON) -> float:
    """Central difference of the readout in theta_i; the independent oracle."""
    if not 1e-7 <= epsilon <= 1e-2:
        raise ValueError(f"epsilon must lie in [1e-7, 1e-2], got {epsilon}")
    if not 0 <= i < circuit.num_trainable:
        raise ValueError(f"parameter index {i} out of range")
    f = _single(features, circuit.num_features, "features")
    t = _single(theta, circuit.num_trainable, "theta")
    rows = np.stack([t, t])
    rows[0, i] += epsilon
    rows[1, i] -= epsilon
    plus, minus = expectations(circuit, f, rows, (qubit,))[:, 0]
    return float((plus - minus) / (2 * epsilon))


def feature_finite_difference(circuit: Circuit, features, theta, j: int, qubit: int = 0,
                              epsilon: float = DEFAULT_EPSILON) -> float:
    if not 1e-7 <= epsilon <= 1e-2:
        raise ValueError(f"epsilon must lie in [1e-7, 1e-2], got {epsilon}")
    return feature_shift_difference(circuit, features, theta, j, 1 / (2 * epsilon), epsilon, qubit)
