"""Building the generator, the trainable encoders and stacked discriminators."""
import numpy as np

from hqgan.circuits import (bind_and_run, build_ansatz_a, build_encoder_e1, build_generator, build_network,
                            circuit_to_json, compose, count_gates, count_trainable)

gen = build_generator()
print("generator:", count_gates(gen), "gates,", count_trainable(gen), "trainable")
for g in gen.gates[:5]:
    print("   ", g.kind.value, g.targets, g.binding)
print("    ...")

# A trainable encoder interleaves data rotations with trainable ones.
e1 = build_encoder_e1()
print("\nE1 stage:", count_gates(e1), "gates,", count_trainable(e1), "trainable")

# Stacking stages rebases trainable indices; data features are shared.
disc = compose([e1] * 5, name="net1")
print("five E1 stages:", count_gates(disc), "gates,", count_trainable(disc), "trainable")
print("GAN total:", count_gates(gen) + count_gates(disc), "gates,",
      count_trainable(gen) + count_trainable(disc), "trainable")

mixed = compose([e1, build_ansatz_a()])
print("E1 followed by ansatz A:", count_gates(mixed), "gates,", count_trainable(mixed), "trainable")

# Running a circuit binds features and parameters to angles.
rng = np.random.default_rng(0)
theta = rng.uniform(0, 2 * np.pi, disc.num_trainable)
state = bind_and_run(disc, [0.3, 0.7], theta)
print("\nnet1 state on x = (0.3, 0.7):", np.round(state.amplitudes, 3))

# Circuits round-trip through JSON; the same document is what `hqgan --dump-circuit` prints.
doc = circuit_to_json(build_network("net3"))
print("\nnet3 JSON starts:", doc[:120].replace("\n", " "), "...")
