"""Histogram divergences and the mode-collapse indicator on synthetic samples."""
import numpy as np

from hqgan import metrics

rng = np.random.default_rng(3)
target = rng.uniform(0.4, 0.6, size=(1000, 2))
spread = rng.uniform(0.38, 0.62, size=(1000, 2))
collapsed = np.clip(rng.normal(0.47, 0.01, size=(1000, 2)), 0, 1)
noise = rng.uniform(size=(1000, 2))

for name, s in [("close fit", spread), ("collapsed near 0.47", collapsed), ("unit square", noise)]:
    kl, js = metrics.marginal_divergences(target, s)
    c = metrics.concentration(s)
    print(f"{name:22s} KL {kl:6.3f}  JS {js:.3f}  concentration {c:.2f}  collapsed {metrics.is_collapsed(s)}")

# KL is asymmetric, JS is not.
p, q = metrics.histogram(target[:, 0]), metrics.histogram(noise[:, 0])
print("KL(p||q) = %.3f, KL(q||p) = %.3f" % (metrics.kl_divergence(p, q), metrics.kl_divergence(q, p)))
print("JS(p, q) = %.3f = JS(q, p) = %.3f" % (metrics.js_divergence(p, q), metrics.js_divergence(q, p)))
