"""Command line entry point: ``hqgan --config run.json`` or ``hqgan --dump-circuit net1``."""
from __future__ import annotations

import argparse
import logging
import sys

from .circuits import NETWORK_NAMES, build_network, circuit_to_json
from .experiments import ConfigError, execute, load_config
from .gan import TrainingDiverged

log = logging.getLogger("hqgan")

EXIT_OK, EXIT_FAILED, EXIT_CONFIG, EXIT_DIVERGED = 0, 1, 2, 3


def _u64(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hqgan", description=__doc__)
    p.add_argument("--config", help="JSON run configuration")
    p.add_argument("--seed", type=_u64, help="override the configured seed")
    p.add_argument("--out", help="override the output directory")
    p.add_argument("--dump-circuit", metavar="NAME",
                   help=f"print a circuit as JSON and exit; one of {', '.join(NETWORK_NAMES)}")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")

    if args.dump_circuit:
        try:
            circuit = build_network(args.dump_circuit)
        except KeyError as exc:
            print(f"error: {exc.args[0]}", file=sys.stderr)
            return EXIT_CONFIG
        print(circuit_to_json(circuit))
        return EXIT_OK

    if not args.config:
        print("error: one of --config or --dump-circuit is required", file=sys.stderr)
        return EXIT_CONFIG
    try:
        cfg = load_config(args.config, args.seed, args.out)
    except OSError as exc:
        print(f"error: cannot read {args.config}: {exc.strerror}", file=sys.stderr)
        return EXIT_CONFIG
    except ConfigError as exc:
        print(f"error: {args.config}: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    log.info("running %s (seed %d) -> %s", cfg.experiment, cfg.seed, cfg.output_dir)
    try:
        result = execute(cfg)
    except TrainingDiverged as exc:
        print(f"error: training aborted at epoch {exc.epoch}: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    log.info("done in %.1f s", result.summary["wall_time_seconds"])
    return EXIT_OK if result.ok else EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
