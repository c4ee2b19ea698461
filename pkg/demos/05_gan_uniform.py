"""Train the hybrid GAN on samples drawn uniformly from [0.4, 0.6].

Each of the 300 epochs makes 10 minibatch steps, so a full run takes a minute
or two. The first argument overrides the epoch count, the second the seed.
"""
import sys

import numpy as np

from hqgan import metrics
from hqgan.data import make_rng, sample_uniform
from hqgan.gan import TrainConfig, train_gan

epochs = int(sys.argv[1]) if len(sys.argv) > 1 else 300
seed = int(sys.argv[2]) if len(sys.argv) > 2 else 0
rng = make_rng(seed)
real = sample_uniform(100, 0.4, 0.6, rng)
held_out = sample_uniform(1000, 0.4, 0.6, rng)
trace = train_gan(TrainConfig(epochs=epochs, seed=seed), real, rng, eval_real=held_out)


def bar(samples):
    h = metrics.histogram(samples[:, 0]).masses
    return "".join(" .:-=+*#%@"[min(9, int(m * 20))] for m in h)


print("generated x1 histogram, 20 bins over [0, 1]")
print("  before:", bar(trace.initial_samples))
print("  after: ", bar(trace.final_samples))
print("  target:", bar(held_out))
print("mass in [0.4, 0.6]: %.2f -> %.2f" % (metrics.mass_in_range(trace.initial_samples, 0.4, 0.6),
                                             metrics.mass_in_range(trace.final_samples, 0.4, 0.6)))
print("mean D on generated samples: %.3f" % trace.final_d_fake)
tail = slice(-min(50, epochs), None)
print("last-epochs loss std: D %.3f  G %.3f" % (np.std(trace.disc_loss[tail]), np.std(trace.gen_loss[tail])))
print("concentration %.2f (collapse flagged above 0.5)" % metrics.concentration(trace.final_samples))
