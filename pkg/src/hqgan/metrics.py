"""Histogram divergences, accuracy and a mode-collapse indicator."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

DEFAULT_BINS = 20
DEFAULT_EPS = 1e-8
COLLAPSE_THRESHOLD = 0.5


@dataclass(frozen=True)
class Histogram:
    """Smoothed bin masses over [0, 1]."""

    masses: np.ndarray
    eps: float = DEFAULT_EPS

    @property
    def bin_count(self) -> int:
        return len(self.masses)


def histogram(samples, bin_count: int = DEFAULT_BINS, eps: float = DEFAULT_EPS) -> Histogram:
    """Uniform bins on [0, 1]; out-of-range samples land in the edge bins.

    ``eps`` is added to every bin count before renormalising so that empty
    bins never give an infinite log ratio.
    """
    x = np.asarray(samples, dtype=float).reshape(-1)
    if x.size == 0:
        raise ValueError("histogram of an empty sample")
    if bin_count < 2:
        raise ValueError("bin_count must be >= 2")
    if not eps > 0:
        raise ValueError("eps must be > 0")
    idx = np.clip(np.floor(np.clip(x, 0.0, 1.0) * bin_count).astype(int), 0, bin_count - 1)
    counts = np.bincount(idx, minlength=bin_count) / x.size + eps
    return Histogram(counts / counts.sum(), eps)


def _check_pair(p: Histogram, q: Histogram) -> None:
    if p.bin_count != q.bin_count:
        raise ValueError(f"bin counts differ: {p.bin_count} vs {q.bin_count}")


def _kl(p: np.ndarray, q: np.ndarray) -> float:
    mask = p > 0
    return float(np.sum(p[mask] * np.log(p[mask] / q[mask])))


def kl_divergence(p: Histogram, q: Histogram) -> float:
    """KL(p || q) in nats."""
    _check_pair(p, q)
    return max(0.0, _kl(p.masses, q.masses))


def js_divergence(p: Histogram, q: Histogram) -> float:
    """Jensen-Shannon divergence in nats, bounded by log 2."""
    _check_pair(p, q)
    m = 0.5 * (p.masses + q.masses)
    js = 0.5 * _kl(p.masses, m) + 0.5 * _kl(q.masses, m)
    return min(max(js, 0.0), math.log(2))


def marginal_divergences(real, generated, bin_count: int = DEFAULT_BINS,
                         eps: float = DEFAULT_EPS) -> tuple[float, float]:
    """(KL(real || generated), JS) averaged over the columns of 2-D samples."""
    real = np.asarray(real, dtype=float).reshape(len(real), -1)
    generated = np.asarray(generated, dtype=float).reshape(len(generated), -1)
    kls, jss = [], []
    for col in range(real.shape[1]):
        p = histogram(real[:, col], bin_count, eps)
        q = histogram(generated[:, col], bin_count, eps)
        kls.append(kl_divergence(p, q))
        jss.append(js_divergence(p, q))
    return float(np.mean(kls)), float(np.mean(jss))


def accuracy(outputs, labels, threshold: float = 0.5) -> float:
    out = np.asarray(outputs, dtype=float).reshape(-1)
    lab = np.asarray(labels).reshape(-1)
    if out.shape != lab.shape:
        raise ValueError(f"{out.size} outputs vs {lab.size} labels")
    if out.size == 0:
        raise ValueError("accuracy of an empty set")
    return float(np.mean((out >= threshold).astype(int) == lab))


def per_class_accuracy(outputs, labels, threshold: float = 0.5) -> dict[int, float]:
    out = np.asarray(outputs, dtype=float).reshape(-1)
    lab = np.asarray(labels).reshape(-1)
    return {int(c): accuracy(out[lab == c], lab[lab == c], threshold) for c in np.unique(lab)}


def concentration(samples, bin_count: int = DEFAULT_BINS) -> float:
    """Largest single-bin mass of the raw (unsmoothed) histogram.

    For 2-D samples the maximum over columns is returned.
    """
    x = np.asarray(samples, dtype=float)
    if x.size == 0:
        raise ValueError("concentration of an empty sample")
    cols = x.reshape(len(x), -1) if x.ndim > 1 else x[:, None]
    best = 0.0
    for col in cols.T:
        idx = np.clip(np.floor(np.clip(col, 0.0, 1.0) * bin_count).astype(int), 0, bin_count - 1)
        best = max(best, np.bincount(idx, minlength=bin_count).max() / col.size)
    return float(best)


def is_collapsed(samples, bin_count: int = DEFAULT_BINS, threshold: float = COLLAPSE_THRESHOLD) -> bool:
    return concentration(samples, bin_count) > threshold


def mass_in_range(samples, lo: float, hi: float) -> float:
    """Fraction of sample coordinates inside ``[lo, hi]``."""
    x = np.asarray(samples, dtype=float)
    return float(np.mean((x >= lo) & (x <= hi)))
