"""Seeded datasets and noise for the classifier and GAN experiments.

All samplers take a :class:`numpy.random.Generator`; :func:`make_rng` builds
the PCG64 generator used throughout so runs are reproducible from a seed.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

RNG_ALGORITHM = "numpy.PCG64"


def make_rng(seed) -> np.random.Generator:
    """PCG64 generator; ``seed`` is an int or a sequence of ints (independent streams)."""
    return np.random.Generator(np.random.PCG64(seed))


@dataclass(frozen=True)
class LabeledDataset:
    points: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float).reshape(-1, 2)
        lab = np.asarray(self.labels, dtype=int).reshape(-1)
        if len(pts) != len(lab):
            raise ValueError(f"{len(pts)} points but {len(lab)} labels")
        if np.any((pts < 0) | (pts > 1)):
            raise ValueError("dataset coordinates must lie in [0, 1]")
        if not np.all(np.isin(lab, (0, 1))):
            raise ValueError("labels must be 0 or 1")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "labels", lab)

    def __len__(self):
        return len(self.labels)


def sample_uniform(n: int, lo: float, hi: float, rng: np.random.Generator) -> np.ndarray:
    if not 0.0 <= lo < hi <= 1.0:
        raise ValueError(f"need 0 <= lo < hi <= 1, got lo={lo}, hi={hi}")
    return rng.uniform(lo, hi, size=(int(n), 2))


def sample_nonuniform(n: int, mean: float, sd: float, rng: np.random.Generator) -> np.ndarray:
    """Gaussian per coordinate, truncated to [0, 1] by rejection."""
    if not 0.0 < mean < 1.0 or not sd > 0.0:
        raise ValueError(f"need mean in (0, 1) and sd > 0, got mean={mean}, sd={sd}")
    n = int(n)
    out = np.empty(2 * n)
    filled = 0
    while filled < out.size:
        draw = rng.normal(mean, sd, size=max(16, 2 * (out.size - filled)))
        draw = draw[(draw >= 0.0) & (draw <= 1.0)][: out.size - filled]
        out[filled:filled + draw.size] = draw
        filled += draw.size
    return out.reshape(n, 2)


def sample_noise(n: int, rng: np.random.Generator) -> np.ndarray:
    return rng.uniform(0.0, 1.0, size=(int(n), 2))


def two_moons(n: int, noise_sd: float = 0.1, rng: np.random.Generator | None = None,
              normalize: bool = True) -> LabeledDataset | tuple[np.ndarray, np.ndarray]:
    """Two interleaving half circles, ``n // 2`` points each, shuffled.

    With ``normalize=False`` the raw ``(points, labels)`` arrays are returned
    before min-max scaling (useful for checking the arc geometry).
    """
    if n % 2 or n < 2:
        raise ValueError(f"two_moons needs a positive even n, got {n}")
    if noise_sd < 0:
        raise ValueError("noise_sd must be >= 0")
    rng = rng if rng is not None else make_rng(0)
    half = n // 2
    t = np.linspace(0.0, np.pi, half)
    upper = np.column_stack([np.cos(t), np.sin(t)])
    lower = np.column_stack([1.0 - np.cos(t), 0.5 - np.sin(t)])
    points = np.vstack([upper, lower])
    labels = np.repeat([0, 1], half)
    if noise_sd > 0:
        points = points + rng.normal(0.0, noise_sd, size=points.shape)
    order = rng.permutation(n)
    points, labels = points[order], labels[order]
    if not normalize:
        return points, labels
    lo, hi = points.min(axis=0), points.max(axis=0)
    points = (points - lo) / (hi - lo)
    return LabeledDataset(np.clip(points, 0.0, 1.0), labels)


def save_csv(path, points, labels=None) -> None:
    points = np.asarray(points, dtype=float)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x1", "x2"] + (["label"] if labels is not None else []))
        for i, (a, b) in enumerate(points):
            row = [repr(float(a)), repr(float(b))]
            if labels is not None:
                row.append(int(labels[i]))
            w.writerow(row)


def load_csv(path: str | Path):
    """Read ``x1,x2[,label]``; returns a point array or a :class:`LabeledDataset`."""
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    points = np.array([[float(r["x1"]), float(r["x2"])] for r in rows]).reshape(-1, 2)
    if rows and "label" in rows[0]:
        return LabeledDataset(points, [int(r["label"]) for r in rows])
    return points
