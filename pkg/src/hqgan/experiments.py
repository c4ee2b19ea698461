"""Run configurations and the experiment drivers behind the command line.

A run is described by one JSON document::

    {
      "experiment": "gan-uniform",
      "architecture": "net1",
      "seed": 7,
      "train": {"epochs": 300, "alpha_D": 0.01, "alpha_G": 0.01, "batch_size": 10},
      "dataset": {"n": 100, "lo": 0.4, "hi": 0.6},
      "output_dir": "runs/uniform"
    }

Unknown keys anywhere are rejected before any computation starts.
"""
from __future__ import annotations

import dataclasses
import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import data as data_mod
from . import gan, metrics
from .circuits import NETWORK_NAMES, build_generator, build_network, circuit_to_json, count_gates, count_trainable
from .gradients import feature_derivative, finite_difference, param_shift_gradient, feature_finite_difference

EXPERIMENTS = ("gan-uniform", "gan-nonuniform", "classifier-two-moon", "grad-check", "arch-sweep")
DISCRIMINATOR_NAMES = tuple(n for n in NETWORK_NAMES if n.startswith(("net", "stages")))

_DATASET_DEFAULTS = {
    "gan-uniform": {"n": 100, "lo": 0.4, "hi": 0.6},
    "gan-nonuniform": {"n": 100, "mean": 0.5, "sd": 0.15},
    "classifier-two-moon": {"n": 200, "noise_sd": 0.1},
    "arch-sweep": {"n": 200, "noise_sd": 0.1},
    "grad-check": {},
}
_DATASET_KEYS = {"n", "lo", "hi", "mean", "sd", "noise_sd", "eval_n"}
_TRAIN_KEYS = {f.name for f in dataclasses.fields(gan.TrainConfig)} - {"seed"}
_CHAIN_KEYS = {"k_G", "delta_G", "adapt"}
_GENERATOR_KEYS = {"final_layer", "noise_scale"}
_GRADCHECK_KEYS = {"draws", "epsilon", "feature_epsilon", "tolerance"}
_SWEEP_KEYS = {"networks"}
_TOP_KEYS = {"experiment", "architecture", "seed", "train", "chain", "dataset", "generator",
             "grad_check", "sweep", "output_dir"}


class ConfigError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


@dataclass
class RunConfig:
    experiment: str
    architecture: str = "net1"
    seed: int = 0
    train: gan.TrainConfig = field(default_factory=gan.TrainConfig)
    chain: gan.ChainParams = field(default_factory=gan.ChainParams)
    dataset: dict = field(default_factory=dict)
    generator: dict = field(default_factory=dict)
    grad_check: dict = field(default_factory=dict)
    sweep: dict = field(default_factory=dict)
    output_dir: str = "runs"
    raw: dict = field(default_factory=dict)

    def echo(self) -> dict:
        return {
            "experiment": self.experiment,
            "architecture": self.architecture,
            "seed": self.seed,
            "train": {k: v for k, v in dataclasses.asdict(self.train).items() if k != "seed"},
            "chain": dataclasses.asdict(self.chain),
            "dataset": self.dataset,
            "generator": self.generator,
            "grad_check": self.grad_check,
            "sweep": self.sweep,
            "output_dir": self.output_dir,
        }


def _line_of(text: str, key: str) -> int | None:
    needle = json.dumps(key)
    for i, line in enumerate(text.splitlines(), 1):
        if needle in line:
            return i
    return None


def _check_keys(section: dict, allowed: set, where: str, text: str) -> None:
    if not isinstance(section, dict):
        raise ConfigError(f"{where} must be an object", _line_of(text, where))
    for key in section:
        if key not in allowed:
            raise ConfigError(f"unknown key {key!r} in {where}; allowed: {sorted(allowed)}", _line_of(text, key))


def parse_config(text: str, seed_override: int | None = None, out_override: str | None = None) -> RunConfig:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc.msg}", exc.lineno) from None
    _check_keys(doc, _TOP_KEYS, "config", text)
    exp = doc.get("experiment")
    if exp not in EXPERIMENTS:
        raise ConfigError(f"experiment must be one of {EXPERIMENTS}, got {exp!r}", _line_of(text, "experiment"))
    arch = doc.get("architecture", "net1")
    if arch not in DISCRIMINATOR_NAMES:
        raise ConfigError(f"architecture must be one of {DISCRIMINATOR_NAMES}, got {arch!r}",
                          _line_of(text, "architecture"))
    seed = doc.get("seed", 0) if seed_override is None else seed_override
    if not isinstance(seed, int) or not 0 <= seed < 2 ** 64:
        raise ConfigError(f"seed must be an unsigned 64-bit integer, got {seed!r}", _line_of(text, "seed"))

    sections = {"train": _TRAIN_KEYS, "chain": _CHAIN_KEYS, "dataset": _DATASET_KEYS,
                "generator": _GENERATOR_KEYS, "grad_check": _GRADCHECK_KEYS, "sweep": _SWEEP_KEYS}
    for name, allowed in sections.items():
        _check_keys(doc.get(name, {}), allowed, name, text)
    try:
        train = gan.TrainConfig(seed=seed, **doc.get("train", {}))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"train: {exc}", _line_of(text, "train")) from None
    try:
        chain = gan.ChainParams(**doc.get("chain", {}))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"chain: {exc}", _line_of(text, "chain")) from None
    dataset = {**_DATASET_DEFAULTS[exp], **doc.get("dataset", {})}
    sweep = doc.get("sweep", {})
    for name in sweep.get("networks", []):
        if name not in DISCRIMINATOR_NAMES:
            raise ConfigError(f"unknown network {name!r} in sweep", _line_of(text, name))
    return RunConfig(
        experiment=exp, architecture=arch, seed=seed, train=train, chain=chain, dataset=dataset,
        generator=doc.get("generator", {}), grad_check=doc.get("grad_check", {}), sweep=sweep,
        output_dir=out_override or doc.get("output_dir", "runs"), raw=doc,
    )


def load_config(path, seed_override=None, out_override=None) -> RunConfig:
    return parse_config(Path(path).read_text(), seed_override, out_override)


# --- experiment drivers -------------------------------------------------------

@dataclass
class RunResult:
    """Files to write (name -> text) and the summary document."""

    files: dict[str, str]
    summary: dict
    ok: bool = True


def _gan_real_data(cfg: RunConfig, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    ds = cfg.dataset
    n, eval_n = int(ds["n"]), int(ds.get("eval_n", cfg.train.eval_samples))
    if cfg.experiment == "gan-uniform":
        sampler = lambda k: data_mod.sample_uniform(k, ds["lo"], ds["hi"], rng)  # noqa: E731
    else:
        sampler = lambda k: data_mod.sample_nonuniform(k, ds["mean"], ds["sd"], rng)  # noqa: E731
    return sampler(n), sampler(eval_n)


def run_gan(cfg: RunConfig) -> tuple[gan.TrainTrace, RunResult]:
    rng = data_mod.make_rng(cfg.seed)
    real, eval_real = _gan_real_data(cfg, rng)
    g_circ = build_generator(**cfg.generator)
    d_circ = build_network(cfg.architecture)
    trace = gan.train_gan(cfg.train, real, rng, generator=g_circ, discriminator=d_circ,
                          chain=dataclasses.replace(cfg.chain), eval_real=eval_real)
    lo, hi = cfg.dataset.get("lo", 0.4), cfg.dataset.get("hi", 0.6)
    final = {
        "kl": trace.kl[-1] if trace.kl else trace.initial_kl,
        "js": trace.js[-1] if trace.js else trace.initial_js,
        "initial_kl": trace.initial_kl,
        "initial_js": trace.initial_js,
        "mass_in_target_range": metrics.mass_in_range(trace.final_samples, lo, hi),
        "initial_mass_in_target_range": metrics.mass_in_range(trace.initial_samples, lo, hi),
        "concentration": metrics.concentration(trace.final_samples),
        "collapsed": metrics.is_collapsed(trace.final_samples),
        "mean_d_fake": trace.final_d_fake,
        "mean_d_real": trace.final_d_real,
    }
    summary = {
        "gate_count": count_gates(g_circ) + count_gates(d_circ),
        "trainable_count": count_trainable(g_circ) + count_trainable(d_circ),
        "final_losses": {"disc_loss": trace.disc_loss[-1] if trace.epochs else None,
                         "gen_loss": trace.gen_loss[-1] if trace.epochs else None},
        "final_metrics": final,
        "theta_G": trace.theta_G.tolist(),
        "theta_D": trace.theta_D.tolist(),
        "chain": dataclasses.asdict(trace.chain),
    }
    files = {
        "trace.csv": trace.to_csv(),
        "generated_samples.csv": _points_csv(trace.final_samples),
        "initial_samples.csv": _points_csv(trace.initial_samples),
        "real_samples.csv": _points_csv(eval_real),
        "circuits/generator.json": circuit_to_json(g_circ),
        "circuits/discriminator.json": circuit_to_json(d_circ),
    }
    return trace, RunResult(files, summary)


def _points_csv(points, labels=None) -> str:
    rows = ["x1,x2" + (",label" if labels is not None else "")]
    for i, (a, b) in enumerate(np.asarray(points)):
        rows.append(f"{a!r},{b!r}" + (f",{int(labels[i])}" if labels is not None else ""))
    return "\n".join(rows) + "\n"


def decision_grid(model: gan.DiscriminatorModel, size: int = 100) -> str:
    """D on a ``size x size`` lattice over [0, 1]^2 as ``x1,x2,d`` CSV."""
    axis = np.linspace(0.0, 1.0, size)
    xx, yy = np.meshgrid(axis, axis, indexing="ij")
    pts = np.column_stack([xx.ravel(), yy.ravel()])
    d = gan.discriminator_output(model, pts)
    rows = ["x1,x2,d"] + [f"{a!r},{b!r},{v!r}" for (a, b), v in zip(pts, d)]
    return "\n".join(rows) + "\n"


def _two_moon_data(cfg: RunConfig) -> data_mod.LabeledDataset:
    return data_mod.two_moons(int(cfg.dataset["n"]), float(cfg.dataset["noise_sd"]), data_mod.make_rng(cfg.seed))


def run_classifier(cfg: RunConfig, network: str | None = None) -> tuple[gan.ClassifierTrace, RunResult]:
    name = network or cfg.architecture
    ds = _two_moon_data(cfg)
    circ = build_network(name)
    # dataset and training draw from independent streams of the same seed
    trace = gan.train_classifier(circ, ds, cfg.train, data_mod.make_rng([cfg.seed, 1]))
    model = gan.DiscriminatorModel(circ, trace.theta)
    summary = {
        "network": name,
        "gate_count": count_gates(circ),
        "trainable_count": count_trainable(circ),
        "final_losses": {"loss": trace.final_loss},
        "final_metrics": {
            "final_loss": trace.final_loss,
            "accuracy": trace.accuracy[-1] if trace.accuracy else None,
            "class_accuracy": {str(k): v for k, v in (trace.class_accuracy or {}).items()},
        },
        "theta": trace.theta.tolist(),
    }
    files = {
        "trace.csv": trace.to_csv(),
        "dataset.csv": _points_csv(ds.points, ds.labels),
        "decision_grid.csv": decision_grid(model),
        "circuits/discriminator.json": circuit_to_json(circ),
    }
    return trace, RunResult(files, summary)


def run_arch_sweep(cfg: RunConfig) -> RunResult:
    names = cfg.sweep.get("networks") or ["net1", "net2", "net3", "net4", "net5"]
    files, rows = {}, []
    for name in names:
        trace, res = run_classifier(cfg, name)
        files[f"trace_{name}.csv"] = trace.to_csv()
        files[f"circuits/{name}.json"] = res.files["circuits/discriminator.json"]
        rows.append((trace.final_loss, name, res.summary))
    rows.sort(key=lambda r: (r[0], r[1]))
    lines = ["network,gate_count,trainable_count,final_loss,accuracy"]
    for loss, name, s in rows:
        lines.append(f"{name},{s['gate_count']},{s['trainable_count']},{loss!r},{s['final_metrics']['accuracy']!r}")
    files["comparison.csv"] = "\n".join(lines) + "\n"
    ranking = [name for _, name, _ in rows]
    summary = {
        "gate_count": {name: s["gate_count"] for _, name, s in rows},
        "trainable_count": {name: s["trainable_count"] for _, name, s in rows},
        "final_losses": {name: loss for loss, name, _ in rows},
        "final_metrics": {"ranking": ranking},
    }
    return RunResult(files, summary)


def run_grad_check(cfg: RunConfig) -> RunResult:
    """Shift-rule vs central differences on every named circuit."""
    draws = int(cfg.grad_check.get("draws", 100))
    eps = float(cfg.grad_check.get("epsilon", 1e-4))
    # features enter as pi * x and repeat across stages, so their third
    # derivative is large; a smaller step keeps the truncation error below tol
    feps = float(cfg.grad_check.get("feature_epsilon", 1e-5))
    tol = float(cfg.grad_check.get("tolerance", 1e-6))
    rng = data_mod.make_rng(cfg.seed)
    lines = ["circuit,draw,kind,index,shift_rule,finite_difference,abs_error"]
    worst = 0.0
    for name in NETWORK_NAMES:
        circ = build_network(name)
        for draw in range(draws):
            x = rng.uniform(0.0, 1.0, circ.num_features)
            th = rng.uniform(0.0, 2 * math.pi, circ.num_trainable)
            qubit = circ.readout_qubits[draw % len(circ.readout_qubits)]
            ps = param_shift_gradient(circ, x, th, qubit)
            for i in range(circ.num_trainable):
                fd = finite_difference(circ, x, th, i, qubit, eps)
                err = abs(ps[i] - fd)
                worst = max(worst, err)
                lines.append(f"{name},{draw},theta,{i},{ps[i]!r},{fd!r},{err!r}")
            for j in range(circ.num_features):
                ex = feature_derivative(circ, x, th, j, qubit)
                fd = feature_finite_difference(circ, x, th, j, qubit, feps)
                err = abs(ex - fd)
                worst = max(worst, err)
                lines.append(f"{name},{draw},feature,{j},{ex!r},{fd!r},{err!r}")
    ok = worst <= tol
    summary = {
        "gate_count": {n: count_gates(build_network(n)) for n in NETWORK_NAMES},
        "trainable_count": {n: count_trainable(build_network(n)) for n in NETWORK_NAMES},
        "final_losses": {},
        "final_metrics": {"max_abs_error": worst, "tolerance": tol, "passed": ok, "draws": draws},
    }
    return RunResult({"gradcheck.csv": "\n".join(lines) + "\n"}, summary, ok)


def execute(cfg: RunConfig) -> RunResult:
    """Run the configured experiment and write its artefacts to ``cfg.output_dir``."""
    start = time.perf_counter()
    if cfg.experiment in ("gan-uniform", "gan-nonuniform"):
        result = run_gan(cfg)[1]
    elif cfg.experiment == "classifier-two-moon":
        result = run_classifier(cfg)[1]
    elif cfg.experiment == "arch-sweep":
        result = run_arch_sweep(cfg)
    else:
        result = run_grad_check(cfg)
    summary = {
        "config": cfg.echo(),
        "seed": cfg.seed,
        "rng_algorithm": data_mod.RNG_ALGORITHM,
        **result.summary,
        "wall_time_seconds": time.perf_counter() - start,
    }
    result.summary = summary
    out = Path(cfg.output_dir)
    for name, text in result.files.items():
        path = out / name
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
    (out / "summary.json").write_text(json.dumps(summary, indent=2, default=_jsonable) + "\n")
    return result


def _jsonable(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serialisable: {type(obj).__name__}")
