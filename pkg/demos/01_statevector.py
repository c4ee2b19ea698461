"""Statevectors, gates and Pauli-Z readout on one and two qubits."""
import math

import numpy as np

from hqgan.sim import (amplitude_encode, apply_gate, basis_encode, dense_angle_encode, expectation_pauli_z,
                       gate_matrix, zero_state)

np.set_printoptions(precision=4, suppress=True)

# A single qubit starts in |0>; RY(theta) tips it so that <Z> = cos(theta).
psi = zero_state(1)
for theta in (0.0, math.pi / 3, math.pi / 2, math.pi):
    out = apply_gate(psi, "RY", theta, [0])
    print(f"RY({theta:.3f})|0> = {out.amplitudes}   <Z> = {expectation_pauli_z(out, 0):+.4f}")

# Qubit 0 is the least significant bit, so H on qubit 0 mixes indices 0 and 1.
print("H on q0 of |00>:", apply_gate(zero_state(2), "H", None, [0]).amplitudes)

# The two-qubit rotations entangle: RXX(pi/2)|00> = (|00> - i|11>)/sqrt(2).
bell = apply_gate(zero_state(2), "RXX", math.pi / 2, [0, 1])
print("RXX(pi/2)|00> =", bell.amplitudes)
print("marginal <Z> on each qubit:", [expectation_pauli_z(bell, q) for q in (0, 1)])

# Every rotation is exp(-i angle/2 P); a 2 pi turn only flips the global sign.
m = gate_matrix("RYY", 0.8)
print("unitary:", np.allclose(m @ m.conj().T, np.eye(4)))
print("period 4 pi:", np.allclose(gate_matrix("RYY", 0.8 + 2 * math.pi), -m))

# The three non-angle state preparations.
print("basis  [1, 0] ->", basis_encode([1, 0]).amplitudes)
print("amplitude [3, 4] ->", amplitude_encode([3, 4]).amplitudes)
print("dense angle [0.25, 0.25] ->", dense_angle_encode([0.25, 0.25]).amplitudes)
