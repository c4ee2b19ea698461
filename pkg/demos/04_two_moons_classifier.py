"""Train the five-stage E1 discriminator as a two-moon classifier.

Takes about half a minute. Pass a smaller epoch count as the first
argument for a quicker look.
"""
import sys

import numpy as np

from hqgan.circuits import build_network
from hqgan.data import make_rng, two_moons
from hqgan.gan import DiscriminatorModel, TrainConfig, discriminator_output, train_classifier

epochs = int(sys.argv[1]) if len(sys.argv) > 1 else 300
data = two_moons(200, noise_sd=0.1, rng=make_rng(0))
trace = train_classifier(build_network("net1"), data, TrainConfig(epochs=epochs), make_rng([0, 1]))

for e in sorted({0, 4, 9, 49, 99, epochs - 1}):
    if e < epochs:
        print(f"epoch {e + 1:4d}  loss {trace.loss[e]:.4f}  accuracy {trace.accuracy[e]:.3f}")
print("per-class accuracy:", trace.class_accuracy)

# A coarse view of the learned boundary: '#' where D > 1/2.
model = DiscriminatorModel(build_network("net1"), trace.theta)
axis = np.linspace(0, 1, 24)
for y in axis[::-1]:
    row = discriminator_output(model, np.column_stack([axis, np.full_like(axis, y)]))
    print("".join("#" if d > 0.5 else "." for d in row))
