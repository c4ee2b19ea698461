"""The GAN on a truncated Gaussian target, scored with KL and JS divergences."""
import sys

from hqgan import metrics
from hqgan.data import make_rng, sample_nonuniform
from hqgan.gan import TrainConfig, train_gan

epochs = int(sys.argv[1]) if len(sys.argv) > 1 else 300
seed = int(sys.argv[2]) if len(sys.argv) > 2 else 0
rng = make_rng(seed)
real = sample_nonuniform(100, 0.5, 0.15, rng)
held_out = sample_nonuniform(1000, 0.5, 0.15, rng)
trace = train_gan(TrainConfig(epochs=epochs, seed=seed), real, rng, eval_real=held_out)



def bar(samples):
    h = metrics.histogram(samples[:, 0]).masses
    return "".join(" .:-=+*#%@"[min(9, int(m * 40))] for m in h)


print("x1 histograms, 20 bins over [0, 1]")
print("  generated before:", bar(trace.initial_samples))
print("  generated after: ", bar(trace.final_samples))
print("  real:            ", bar(held_out))
print(f"KL {trace.initial_kl:.3f} -> {trace.kl[-1]:.3f}")
print(f"JS {trace.initial_js:.3f} -> {trace.js[-1]:.3f}  (JS never exceeds log 2 = 0.693)")
for e in range(0, epochs, max(1, epochs // 10)):
    print(f"  epoch {e + 1:4d}  KL {trace.kl[e]:.3f}  JS {trace.js[e]:.3f}  "
          f"L_D {trace.disc_loss[e]:.3f}  L_G {trace.gen_loss[e]:.3f}")
print("concentration %.2f" % metrics.concentration(trace.final_samples))
