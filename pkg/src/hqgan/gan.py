"""Losses, parameter-shift gradient chains and minibatch SGD training.

The discriminator output is ``D = (1 + <Z_0>) / 2`` and each generator output
is ``G_j = (1 + <Z_j>) / 2``.  Discriminator gradients use the shift rule on
theta_D directly; generator gradients chain ``dL/dD * dD/dG * dG/dtheta_G``
with the middle factor taken either exactly (shift rule over every gate that
reads the feature) or with the adjustable single-shift estimate
``k_G * (D(G + dG) - D(G - dG))``.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from . import data as data_mod
from . import metrics
from .circuits import Circuit, build_generator, stacked_encoder
from .gradients import expectations, feature_jacobian, theta_jacobian
from .telemetry import record_grad_norm

CLAMP = 1e-7
GRAD_MODES = ("exact", "paper")
INIT_SCHEMES = ("uniform",)


class TrainingDiverged(RuntimeError):
    """A loss or parameter became non-finite during training."""

    def __init__(self, epoch: int, what: str, snapshot: dict):
        self.epoch = epoch
        self.snapshot = snapshot
        super().__init__(f"non-finite {what} at epoch {epoch}; parameters: {snapshot}")


@dataclass
class GeneratorModel:
    circuit: Circuit
    theta: np.ndarray

    def __post_init__(self):
        self.theta = np.asarray(self.theta, dtype=float).reshape(-1)
        if self.theta.size != self.circuit.num_trainable:
            raise ValueError(f"generator needs {self.circuit.num_trainable} parameters, got {self.theta.size}")


@dataclass
class DiscriminatorModel:
    circuit: Circuit
    theta: np.ndarray
    readout: int = 0

    def __post_init__(self):
        self.theta = np.asarray(self.theta, dtype=float).reshape(-1)
        if self.theta.size != self.circuit.num_trainable:
            raise ValueError(f"discriminator needs {self.circuit.num_trainable} parameters, got {self.theta.size}")


@dataclass
class ChainParams:
    k_G: float = 0.5
    delta_G: float = math.pi / 2
    adapt: bool = False

    def __post_init__(self):
        if not 0.0 < self.delta_G <= math.pi:
            raise ValueError(f"delta_G must lie in (0, pi], got {self.delta_G}")


@dataclass(frozen=True)
class TrainConfig:
    alpha_D: float = 0.01
    alpha_G: float = 0.01
    batch_size: int = 10
    epochs: int = 300
    seed: int = 0
    grad_mode: str = "exact"
    init: str = "uniform"
    eval_samples: int = 1000
    bins: int = metrics.DEFAULT_BINS

    def __post_init__(self):
        if not (self.alpha_D >= 0 and self.alpha_G >= 0):
            raise ValueError("learning rates must be non-negative")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")
        if self.grad_mode not in GRAD_MODES:
            raise ValueError(f"grad_mode must be one of {GRAD_MODES}, got {self.grad_mode!r}")
        if self.init not in INIT_SCHEMES:
            # identity-block initialisation is recognised but not provided
            raise ValueError(f"init scheme {self.init!r} is not supported; use one of {INIT_SCHEMES}")
        if self.eval_samples < 1:
            raise ValueError("eval_samples must be >= 1")


# --- model evaluation -------------------------------------------------------

def _rows(x, width: int = 2) -> tuple[np.ndarray, bool]:
    arr = np.asarray(x, dtype=float)
    single = arr.ndim == 1
    arr = arr.reshape(-1, width)
    return arr, single


def discriminator_output(model: DiscriminatorModel, x):
    """Probability that ``x`` is real; accepts one pair or an ``(S, 2)`` batch."""
    rows, single = _rows(x, model.circuit.num_features)
    d = 0.5 * (1.0 + expectations(model.circuit, rows, model.theta, (model.readout,))[:, 0])
    return float(d[0]) if single else d


def generator_output(model: GeneratorModel, z):
    rows, single = _rows(z, model.circuit.num_features)
    g = 0.5 * (1.0 + expectations(model.circuit, rows, model.theta))
    return g[0] if single else g


def _log_clamped(d):
    return np.log(np.clip(d, CLAMP, 1.0 - CLAMP))


def disc_loss(model: DiscriminatorModel, real_batch, fake_batch) -> float:
    """``-mean log D(real) - mean log(1 - D(fake))``."""
    d_real = discriminator_output(model, _rows(real_batch)[0])
    d_fake = discriminator_output(model, _rows(fake_batch)[0])
    return float(-np.mean(_log_clamped(d_real)) - np.mean(_log_clamped(1.0 - d_fake)))


def gen_loss(gen: GeneratorModel, disc: DiscriminatorModel, noise_batch) -> float:
    fake = generator_output(gen, _rows(noise_batch)[0])
    return float(-np.mean(_log_clamped(discriminator_output(disc, fake))))


def bce_loss(model: DiscriminatorModel, points, labels) -> float:
    d = discriminator_output(model, _rows(points)[0])
    y = np.asarray(labels, dtype=float).reshape(-1)
    return float(-np.mean(y * _log_clamped(d) + (1.0 - y) * _log_clamped(1.0 - d)))


# --- gradients --------------------------------------------------------------

def _disc_value_and_grad(model: DiscriminatorModel, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """D(x) clamped, and dD/dtheta_D per sample (shape ``(S, T)``)."""
    d = np.clip(discriminator_output(model, x), CLAMP, 1.0 - CLAMP)
    # D(theta+) - D(theta-) over 2 equals half the shifted <Z> difference
    dd = 0.5 * theta_jacobian(model.circuit, x, model.theta, (model.readout,))[:, 0, :]
    return d, dd


def classifier_gradient(model: DiscriminatorModel, points, labels) -> np.ndarray:
    """Mean over the batch of the cross-entropy gradient in theta_D."""
    x = _rows(points)[0]
    y = np.asarray(labels, dtype=float).reshape(-1, 1)
    d, dd = _disc_value_and_grad(model, x)
    d = d[:, None]
    per_sample = -y * dd / d + (1.0 - y) * dd / (1.0 - d)
    return per_sample.mean(axis=0)


def disc_loss_gradient(disc: DiscriminatorModel, gen: GeneratorModel, real_batch, noise_batch) -> np.ndarray:
    real = _rows(real_batch)[0]
    fake = generator_output(gen, _rows(noise_batch)[0])
    d_real, dd_real = _disc_value_and_grad(disc, real)
    d_fake, dd_fake = _disc_value_and_grad(disc, fake)
    term_real = -(dd_real / d_real[:, None]).mean(axis=0)
    term_fake = (dd_fake / (1.0 - d_fake[:, None])).mean(axis=0)
    grad = term_real + term_fake
    record_grad_norm(np.linalg.norm(grad))
    return grad


def _disc_feature_grad(disc: DiscriminatorModel, x: np.ndarray, grad_mode: str, chain: ChainParams) -> np.ndarray:
    """dD/dx_j per sample, shape ``(S, F)``."""
    if grad_mode == "exact":
        return 0.5 * feature_jacobian(disc.circuit, x, disc.theta, (disc.readout,))[:, 0, :]
    # features enter gates as pi * x, so an angle shift delta_G is delta_G / pi in x
    shift = chain.delta_G / math.pi
    n, f = x.shape
    rows = np.repeat(x, 2 * f, axis=0).reshape(n, f, 2, f)
    for j in range(f):
        rows[:, j, 0, j] += shift
        rows[:, j, 1, j] -= shift
    d = discriminator_output(disc, rows.reshape(-1, f)).reshape(n, f, 2)
    return chain.k_G * (d[:, :, 0] - d[:, :, 1])


def gen_loss_gradient(gen: GeneratorModel, disc: DiscriminatorModel, noise_batch,
                      chain: ChainParams | None = None, grad_mode: str = "exact") -> np.ndarray:
    if grad_mode not in GRAD_MODES:
        raise ValueError(f"grad_mode must be one of {GRAD_MODES}")
    chain = chain or ChainParams()
    z = _rows(noise_batch)[0]
    fake = generator_output(gen, z)
    d = np.clip(discriminator_output(disc, fake), CLAMP, 1.0 - CLAMP)
    dl_dd = -1.0 / d  # (S,)
    dd_dg = _disc_feature_grad(disc, fake, grad_mode, chain)  # (S, F)
    dg_dtheta = 0.5 * theta_jacobian(gen.circuit, z, gen.theta)  # (S, F, T)
    per_sample = dl_dd[:, None] * np.einsum("sf,sft->st", dd_dg, dg_dtheta)
    grad = per_sample.mean(axis=0)
    record_grad_norm(np.linalg.norm(grad))
    return grad


def sgd_update(theta, grad_mean, alpha: float) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    grad_mean = np.asarray(grad_mean, dtype=float)
    if theta.shape != grad_mean.shape:
        raise ValueError(f"shape mismatch: theta {theta.shape} vs grad {grad_mean.shape}")
    with np.errstate(invalid="ignore", over="ignore"):  # non-finite results are caught by the caller
        return theta - alpha * grad_mean


# --- training ---------------------------------------------------------------

@dataclass
class TrainTrace:
    disc_loss: list[float] = field(default_factory=list)
    gen_loss: list[float] = field(default_factory=list)
    disc_grad_norm: list[float] = field(default_factory=list)
    gen_grad_norm: list[float] = field(default_factory=list)
    kl: list[float] = field(default_factory=list)
    js: list[float] = field(default_factory=list)
    initial_kl: float = float("nan")
    initial_js: float = float("nan")
    initial_samples: np.ndarray | None = None
    final_samples: np.ndarray | None = None
    eval_real: np.ndarray | None = None
    theta_G: np.ndarray | None = None
    theta_D: np.ndarray | None = None
    initial_theta_G: np.ndarray | None = None
    initial_theta_D: np.ndarray | None = None
    final_d_fake: float = float("nan")
    final_d_real: float = float("nan")
    chain: ChainParams | None = None

    CSV_COLUMNS = ("epoch", "disc_loss", "gen_loss", "disc_grad_norm", "gen_grad_norm", "kl", "js")

    @property
    def epochs(self) -> int:
        return len(self.disc_loss)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.CSV_COLUMNS)
        for e in range(self.epochs):
            w.writerow([e + 1] + [repr(float(getattr(self, c)[e])) for c in self.CSV_COLUMNS[1:]])
        return buf.getvalue()


def _init_theta(n: int, rng: np.random.Generator) -> np.ndarray:
    return rng.uniform(0.0, 2 * math.pi, size=n)


def _check_finite(epoch: int, what: str, value, snapshot) -> None:
    if not np.all(np.isfinite(value)):
        raise TrainingDiverged(epoch, what, snapshot())


def _adapt_chain(gen, disc, z, chain: ChainParams, alpha: float, step: float = 1e-3) -> ChainParams:
    """One finite-difference descent step on (k_G, delta_G).

    The objective is the generator loss after the parameter update each chain
    setting would produce on the same noise batch.
    """
    def post_update_loss(k, delta):
        c = ChainParams(k, delta)
        g = gen_loss_gradient(gen, disc, z, c, "paper")
        trial = GeneratorModel(gen.circuit, sgd_update(gen.theta, g, alpha))
        return gen_loss(trial, disc, z)

    k, delta = chain.k_G, chain.delta_G
    dk = (post_update_loss(k + step, delta) - post_update_loss(k - step, delta)) / (2 * step)
    lo, hi = max(delta - step, 1e-6), min(delta + step, math.pi)
    ddelta = (post_update_loss(k, hi) - post_update_loss(k, lo)) / (hi - lo)
    new_delta = float(np.clip(delta - alpha * ddelta, 1e-3, math.pi))
    return ChainParams(k - alpha * dk, new_delta, adapt=True)


def train_gan(config: TrainConfig, real_data, rng: np.random.Generator | None = None, *,
              generator: Circuit | None = None, discriminator: Circuit | None = None,
              chain: ChainParams | None = None, eval_real=None) -> TrainTrace:
    """Alternating minibatch SGD on discriminator then generator.

    One epoch walks a fresh permutation of ``real_data`` in minibatches of
    ``config.batch_size``.  Each step updates theta_D on ``m`` real and ``m``
    generated samples, then updates theta_G against the freshly updated
    discriminator on a new noise batch.  KL/JS between ``eval_real`` (default:
    ``real_data``) and the generator's outputs on a fixed noise set are
    recorded after every epoch.
    """
    real_data = np.asarray(real_data, dtype=float).reshape(-1, 2)
    m = config.batch_size
    if len(real_data) < m:
        raise ValueError(f"need at least batch_size={m} real samples, got {len(real_data)}")
    rng = rng if rng is not None else data_mod.make_rng(config.seed)
    chain = chain or ChainParams()
    g_circ = generator or build_generator()
    d_circ = discriminator or stacked_encoder(5, "E1")
    gen = GeneratorModel(g_circ, _init_theta(g_circ.num_trainable, rng))
    disc = DiscriminatorModel(d_circ, _init_theta(d_circ.num_trainable, rng))
    eval_noise = data_mod.sample_noise(config.eval_samples, rng)
    eval_real = real_data if eval_real is None else np.asarray(eval_real, dtype=float).reshape(-1, 2)

    trace = TrainTrace(eval_real=eval_real, initial_theta_G=gen.theta.copy(),
                       initial_theta_D=disc.theta.copy())
    trace.initial_samples = generator_output(gen, eval_noise)
    trace.initial_kl, trace.initial_js = metrics.marginal_divergences(eval_real, trace.initial_samples, config.bins)

    def snapshot():
        return {"theta_G": gen.theta.tolist(), "theta_D": disc.theta.tolist(),
                "k_G": chain.k_G, "delta_G": chain.delta_G}

    steps = len(real_data) // m
    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(len(real_data))
        d_losses, g_losses, d_norms, g_norms = [], [], [], []
        for s in range(steps):
            real = real_data[order[s * m:(s + 1) * m]]
            z = data_mod.sample_noise(m, rng)
            fake = generator_output(gen, z)
            d_losses.append(disc_loss(disc, real, fake))
            gd = disc_loss_gradient(disc, gen, real, z)
            _check_finite(epoch, "discriminator loss/gradient", [d_losses[-1], *gd], snapshot)
            disc.theta = sgd_update(disc.theta, gd, config.alpha_D)
            _check_finite(epoch, "discriminator parameters", disc.theta, snapshot)
            d_norms.append(float(np.linalg.norm(gd)))

            z = data_mod.sample_noise(m, rng)
            g_losses.append(gen_loss(gen, disc, z))
            gg = gen_loss_gradient(gen, disc, z, chain, config.grad_mode)
            _check_finite(epoch, "generator loss/gradient", [g_losses[-1], *gg], snapshot)
            if config.grad_mode == "paper" and chain.adapt:
                chain = _adapt_chain(gen, disc, z, chain, config.alpha_G)
            gen.theta = sgd_update(gen.theta, gg, config.alpha_G)
            _check_finite(epoch, "generator parameters", gen.theta, snapshot)
            g_norms.append(float(np.linalg.norm(gg)))
        trace.disc_loss.append(float(np.mean(d_losses)))
        trace.gen_loss.append(float(np.mean(g_losses)))
        trace.disc_grad_norm.append(float(np.mean(d_norms)))
        trace.gen_grad_norm.append(float(np.mean(g_norms)))
        kl, js = metrics.marginal_divergences(eval_real, generator_output(gen, eval_noise), config.bins)
        trace.kl.append(kl)
        trace.js.append(js)

    trace.final_samples = generator_output(gen, eval_noise)
    trace.theta_G, trace.theta_D = gen.theta.copy(), disc.theta.copy()
    trace.final_d_fake = float(np.mean(discriminator_output(disc, trace.final_samples)))
    trace.final_d_real = float(np.mean(discriminator_output(disc, eval_real)))
    trace.chain = chain
    return trace


@dataclass
class ClassifierTrace:
    loss: list[float] = field(default_factory=list)
    grad_norm: list[float] = field(default_factory=list)
    accuracy: list[float] = field(default_factory=list)
    theta: np.ndarray | None = None
    initial_theta: np.ndarray | None = None
    class_accuracy: dict | None = None

    CSV_COLUMNS = ("epoch", "loss", "grad_norm", "accuracy")

    @property
    def epochs(self) -> int:
        return len(self.loss)

    @property
    def final_loss(self) -> float:
        return self.loss[-1] if self.loss else float("nan")

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.CSV_COLUMNS)
        for e in range(self.epochs):
            w.writerow([e + 1, repr(self.loss[e]), repr(self.grad_norm[e]), repr(self.accuracy[e])])
        return buf.getvalue()


def train_classifier(network: Circuit, dataset: data_mod.LabeledDataset, config: TrainConfig,
                     rng: np.random.Generator | None = None) -> ClassifierTrace:
    """Minibatch SGD on binary cross-entropy with D read as P(label = 1).

    ``loss`` and ``accuracy`` are evaluated on the full dataset after each epoch.
    """
    rng = rng if rng is not None else data_mod.make_rng(config.seed)
    points, labels = dataset.points, dataset.labels
    m = config.batch_size
    model = DiscriminatorModel(network, _init_theta(network.num_trainable, rng))
    trace = ClassifierTrace(initial_theta=model.theta.copy())
    steps = max(1, len(labels) // m)
    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(len(labels))
        norms = []
        for s in range(steps):
            idx = order[s * m:(s + 1) * m]
            g = classifier_gradient(model, points[idx], labels[idx])
            if not np.all(np.isfinite(g)):
                raise TrainingDiverged(epoch, "classifier gradient", {"theta": model.theta.tolist()})
            model.theta = sgd_update(model.theta, g, config.alpha_D)
            if not np.all(np.isfinite(model.theta)):
                raise TrainingDiverged(epoch, "classifier parameters", {"theta": model.theta.tolist()})
            norms.append(float(np.linalg.norm(g)))
        out = discriminator_output(model, points)
        loss = bce_loss(model, points, labels)
        if not math.isfinite(loss):
            raise TrainingDiverged(epoch, "classifier loss", {"theta": model.theta.tolist()})
        trace.loss.append(loss)
        trace.grad_norm.append(float(np.mean(norms)))
        trace.accuracy.append(metrics.accuracy(out, labels))
    trace.theta = model.theta.copy()
    if len(labels):
        trace.class_accuracy = metrics.per_class_accuracy(discriminator_output(model, points), labels)
    return trace
