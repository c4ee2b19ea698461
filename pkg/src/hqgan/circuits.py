"""Parameterised two-qubit circuits for the generator and discriminator.

A circuit is an ordered list of gates whose angles come from one of three
sources: a fixed constant, a (scaled) input feature, or an entry of the
trainable parameter vector.  Data-bound and trainable gates may interleave
freely, which is how the discriminator's trainable encoders are built.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .telemetry import record_evaluations
from .sim import GateKind, StateVector, _check_num_qubits, _check_targets, apply_matrices, batched_gate_matrices


@dataclass(frozen=True)
class Constant:
    angle: float


@dataclass(frozen=True)
class DataFeature:
    index: int
    scale: float = math.pi

    def __post_init__(self):
        if not math.isfinite(self.scale) or self.scale == 0.0:
            raise ValueError(f"feature scale must be finite and nonzero, got {self.scale}")


@dataclass(frozen=True)
class Trainable:
    index: int
    scale: float = 1.0

    def __post_init__(self):
        if not math.isfinite(self.scale) or self.scale == 0.0:
            raise ValueError(f"parameter scale must be finite and nonzero, got {self.scale}")


ParamBinding = Union[Constant, DataFeature, Trainable]


@dataclass(frozen=True)
class GateSpec:
    kind: GateKind
    targets: tuple[int, ...]
    binding: ParamBinding | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", GateKind(self.kind))
        object.__setattr__(self, "targets", tuple(int(t) for t in self.targets))
        if len(self.targets) != self.kind.arity:
            raise ValueError(f"{self.kind.value} needs {self.kind.arity} target(s), got {self.targets}")
        if self.kind.angled != (self.binding is not None):
            raise ValueError(f"{self.kind.value}: binding must be given iff the gate takes an angle")


@dataclass(frozen=True)
class Circuit:
    num_qubits: int
    gates: tuple[GateSpec, ...]
    num_trainable: int
    num_features: int
    readout_qubits: tuple[int, ...] = (0,)
    name: str = ""
    _plan: dict = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        _check_num_qubits(self.num_qubits)
        object.__setattr__(self, "gates", tuple(self.gates))
        object.__setattr__(self, "readout_qubits", tuple(self.readout_qubits))
        used_t, used_f = set(), set()
        for g in self.gates:
            _check_targets(g.kind, g.targets, self.num_qubits)
            if isinstance(g.binding, Trainable):
                used_t.add(g.binding.index)
            elif isinstance(g.binding, DataFeature):
                used_f.add(g.binding.index)
        if used_t != set(range(self.num_trainable)):
            raise ValueError(f"trainable indices {sorted(used_t)} are not dense over 0..{self.num_trainable - 1}")
        if any(not 0 <= i < self.num_features for i in used_f):
            raise ValueError(f"feature indices {sorted(used_f)} exceed num_features={self.num_features}")
        for q in self.readout_qubits:
            if not 0 <= q < self.num_qubits:
                raise ValueError(f"readout qubit {q} out of range")
        object.__setattr__(self, "_plan", _compile(self))


def _compile(circuit: Circuit) -> dict:
    """Flat index/scale arrays so every gate angle is one vectorised lookup."""
    n = len(circuit.gates)
    const = np.zeros(n)
    f_idx = np.full(n, circuit.num_features, dtype=int)  # points at a zero pad column
    f_scale = np.zeros(n)
    t_idx = np.full(n, circuit.num_trainable, dtype=int)
    t_scale = np.zeros(n)
    for k, g in enumerate(circuit.gates):
        b = g.binding
        if isinstance(b, Constant):
            const[k] = b.angle
        elif isinstance(b, DataFeature):
            f_idx[k], f_scale[k] = b.index, b.scale
        elif isinstance(b, Trainable):
            t_idx[k], t_scale[k] = b.index, b.scale
    return dict(const=const, f_idx=f_idx, f_scale=f_scale, t_idx=t_idx, t_scale=t_scale)


def gate_angles(circuit: Circuit, features: np.ndarray, thetas: np.ndarray) -> np.ndarray:
    """Resolved angles, shape ``(B, num_gates)``, for batched inputs."""
    plan = circuit._plan
    batch = features.shape[0]
    fpad = np.concatenate([features, np.zeros((batch, 1))], axis=1)
    tpad = np.concatenate([thetas, np.zeros((batch, 1))], axis=1)
    return plan["const"] + plan["f_scale"] * fpad[:, plan["f_idx"]] + plan["t_scale"] * tpad[:, plan["t_idx"]]


def _as_rows(values, width: int, batch: int | None, what: str) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[1] != width:
        raise ValueError(f"{what} must have length {width}, got shape {np.shape(values)}")
    if batch is not None and arr.shape[0] not in (1, batch):
        raise ValueError(f"{what} batch size {arr.shape[0]} does not match {batch}")
    return arr


def simulate(circuit: Circuit, features, thetas, offsets: np.ndarray | None = None) -> np.ndarray:
    """Run the circuit on ``|0...0>`` for a batch of inputs.

    ``features`` is ``(B, num_features)`` and ``thetas`` ``(B, num_trainable)``;
    either may be a single row that is broadcast.  ``offsets`` (``(B, num_gates)``)
    is added to the resolved gate angles, which is how shift rules are applied
    per gate occurrence.  Returns amplitudes of shape ``(B, 2**num_qubits)``.
    """
    f = _as_rows(features, circuit.num_features, None, "features")
    t = _as_rows(thetas, circuit.num_trainable, None, "theta")
    batch = max(f.shape[0], t.shape[0], 0 if offsets is None else offsets.shape[0])
    f = np.broadcast_to(f, (batch, f.shape[1]))
    t = np.broadcast_to(t, (batch, t.shape[1]))
    angles = gate_angles(circuit, f, t)
    if offsets is not None:
        angles = angles + offsets
    if not np.all(np.isfinite(angles)):
        raise ValueError("non-finite gate angle")
    states = np.zeros((batch, 1 << circuit.num_qubits), dtype=complex)
    states[:, 0] = 1.0
    for k, g in enumerate(circuit.gates):
        states = apply_matrices(states, batched_gate_matrices(g.kind, angles[:, k]), g.targets)
    record_evaluations(batch)
    return states


def bind_and_run(circuit: Circuit, features=(), theta=()) -> StateVector:
    f = np.asarray(features, dtype=float).reshape(-1)
    t = np.asarray(theta, dtype=float).reshape(-1)
    if f.size != circuit.num_features:
        raise ValueError(f"expected {circuit.num_features} features, got {f.size}")
    if t.size != circuit.num_trainable:
        raise ValueError(f"expected {circuit.num_trainable} parameters, got {t.size}")
    return StateVector(simulate(circuit, f, t)[0])


def count_gates(circuit: Circuit) -> int:
    return len(circuit.gates)


def count_trainable(circuit: Circuit) -> int:
    return sum(isinstance(g.binding, Trainable) for g in circuit.gates)


# --- builders -------------------------------------------------------------

def _ry(q, b):
    return GateSpec(GateKind.RY, (q,), b)


def build_generator(noise_scale: float = math.pi, final_layer: bool = True) -> Circuit:
    """Angle-encoding generator: ``RY(pi z_q)`` per qubit then an RY/RXX ansatz.

    Ansatz layout is ``[RY, RY, RXX] x 3 + [RY, RY]`` (11 parameters).
    ``final_layer=False`` drops the closing RY pair; it exists to provoke a
    degenerate generator in the mode-collapse experiments.
    """
    gates = [_ry(0, DataFeature(0, noise_scale)), _ry(1, DataFeature(1, noise_scale))]
    p = 0
    for _ in range(3):
        gates += [_ry(0, Trainable(p)), _ry(1, Trainable(p + 1)),
                  GateSpec(GateKind.RXX, (0, 1), Trainable(p + 2))]
        p += 3
    if final_layer:
        gates += [_ry(0, Trainable(p)), _ry(1, Trainable(p + 1))]
        p += 2
    return Circuit(2, gates, p, 2, readout_qubits=(0, 1), name="generator")


def _encoder(second_entangler: GateKind, name: str) -> Circuit:
    x0, x1 = DataFeature(0), DataFeature(1)
    gates = [
        GateSpec(GateKind.H, (0,)),
        GateSpec(GateKind.H, (1,)),
        GateSpec(GateKind.RX, (0,), x0),
        GateSpec(GateKind.RX, (1,), x1),
        GateSpec(GateKind.RYY, (0, 1), Trainable(0)),
        GateSpec(GateKind.RX, (0,), x0),
        GateSpec(GateKind.RZ, (0,), x1),
        GateSpec(second_entangler, (0, 1), Trainable(1)),
        GateSpec(GateKind.RZ, (0,), Trainable(2)),
        GateSpec(GateKind.RZ, (1,), Trainable(3)),
    ]
    return Circuit(2, gates, 4, 2, readout_qubits=(0,), name=name)


def build_encoder_e1() -> Circuit:
    return _encoder(GateKind.RXX, "E1")


def build_encoder_e2() -> Circuit:
    return _encoder(GateKind.RYY, "E2")


def build_ansatz_a() -> Circuit:
    gates = [
        GateSpec(GateKind.H, (0,)),
        GateSpec(GateKind.H, (1,)),
        GateSpec(GateKind.RX, (0,), Trainable(0)),
        GateSpec(GateKind.RX, (1,), Trainable(1)),
        GateSpec(GateKind.RXX, (0, 1), Trainable(2)),
        GateSpec(GateKind.RYY, (0, 1), Trainable(3)),
        GateSpec(GateKind.RZ, (0,), Trainable(4)),
        GateSpec(GateKind.RZ, (1,), Trainable(5)),
    ]
    return Circuit(2, gates, 6, 0, readout_qubits=(0,), name="A")


def _rebase(binding, offset: int):
    if isinstance(binding, Trainable):
        return Trainable(binding.index + offset, binding.scale)
    return binding


def compose(parts: Sequence[Circuit], name: str = "") -> Circuit:
    """Concatenate circuits; parameters are stacked, features are shared."""
    parts = list(parts)
    if not parts:
        raise ValueError("compose needs at least one circuit")
    nq = parts[0].num_qubits
    if any(p.num_qubits != nq for p in parts):
        raise ValueError("all parts must act on the same number of qubits")
    gates, offset = [], 0
    for p in parts:
        gates += [GateSpec(g.kind, g.targets, _rebase(g.binding, offset)) for g in p.gates]
        offset += p.num_trainable
    return Circuit(nq, gates, offset, max(p.num_features for p in parts),
                   readout_qubits=parts[-1].readout_qubits,
                   name=name or "+".join(p.name or "?" for p in parts))


def stacked_encoder(stages: int, kind: str = "E1") -> Circuit:
    if not 1 <= stages <= 5:
        raise ValueError(f"stages must be in 1..5, got {stages}")
    block = {"E1": build_encoder_e1, "E2": build_encoder_e2}[kind]()
    return compose([block] * stages, name=f"{stages}x{kind}")


def build_network(name: str) -> Circuit:
    """Named circuit: ``generator``, ``E1``, ``E2``, ``A``, ``net1``..``net5`` or ``stages<N>``."""
    e1, e2, a = build_encoder_e1(), build_encoder_e2(), build_ansatz_a()
    table = {
        "generator": build_generator,
        "E1": lambda: e1,
        "E2": lambda: e2,
        "A": lambda: a,
        "net1": lambda: stacked_encoder(5, "E1"),
        "net2": lambda: stacked_encoder(5, "E2"),
        "net3": lambda: compose([e1, a], name="net3"),
        "net4": lambda: compose([e2, a], name="net4"),
        "net5": lambda: compose([a, e1], name="net5"),
    }
    for n in range(1, 6):
        table[f"stages{n}"] = lambda n=n: stacked_encoder(n, "E1")
    if name not in table:
        raise KeyError(f"unknown circuit {name!r}; choose from {sorted(table)}")
    return table[name]()


NETWORK_NAMES = ("generator", "E1", "E2", "A", "net1", "net2", "net3", "net4", "net5",
                 "stages1", "stages2", "stages3", "stages4", "stages5")


# --- serialisation ----------------------------------------------------------

def _binding_to_dict(b) -> dict | None:
    if b is None:
        return None
    if isinstance(b, Constant):
        return {"type": "constant", "angle": b.angle}
    if isinstance(b, DataFeature):
        return {"type": "feature", "index": b.index, "scale": b.scale}
    return {"type": "trainable", "index": b.index, "scale": b.scale}


def _binding_from_dict(d):
    if d is None:
        return None
    kind = d["type"]
    if kind == "constant":
        return Constant(float(d["angle"]))
    if kind == "feature":
        return DataFeature(int(d["index"]), float(d.get("scale", math.pi)))
    if kind == "trainable":
        return Trainable(int(d["index"]), float(d.get("scale", 1.0)))
    raise ValueError(f"unknown binding type {kind!r}")


def circuit_to_dict(circuit: Circuit) -> dict:
    return {
        "name": circuit.name,
        "num_qubits": circuit.num_qubits,
        "num_trainable": circuit.num_trainable,
        "num_features": circuit.num_features,
        "readout_qubits": list(circuit.readout_qubits),
        "gate_count": count_gates(circuit),
        "gates": [
            {"kind": g.kind.value, "targets": list(g.targets), "binding": _binding_to_dict(g.binding)}
            for g in circuit.gates
        ],
    }


def circuit_from_dict(doc: dict) -> Circuit:
    gates = [GateSpec(GateKind(g["kind"]), tuple(g["targets"]), _binding_from_dict(g.get("binding")))
             for g in doc["gates"]]
    return Circuit(int(doc["num_qubits"]), gates, int(doc["num_trainable"]), int(doc["num_features"]),
                   readout_qubits=tuple(doc.get("readout_qubits", (0,))), name=doc.get("name", ""))


def circuit_to_json(circuit: Circuit, indent: int | None = 2) -> str:
    return json.dumps(circuit_to_dict(circuit), indent=indent)


def circuit_from_json(text: str) -> Circuit:
    return circuit_from_dict(json.loads(text))
