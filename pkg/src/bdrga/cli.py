"""Command-line entry point: ``bdrga <protocol> --data wdbc.csv [options]``."""

from __future__ import annotations

import argparse
import logging
import sys

from . import harness
from .bdr import BdrConfig
from .exceptions import BdrgaError
from .ga import GaConfig
from .nn import TrainConfig

COMMANDS = {
    "control": "control",
    "hidden-sweep": "hidden_sweep",
    "bdr-sweep": "group_b",
    "ga": "group_g",
    "band-sweep": "band_sweep",
    "figures": "figures",
}


def _floats(text):
    return [float(t) for t in text.split(",") if t.strip()]


def _ints(text):
    return [int(t) for t in text.split(",") if t.strip()]


def read_config(path):
    """Parse a flat ``key=value`` file; ``#`` starts a comment."""
    values = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value")
            key, value = (s.strip() for s in line.split("=", 1))
            values[key.lstrip("-").replace("-", "_")] = value
    return values


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--data", help="WDBC-layout CSV file")
    common.add_argument("--seed", type=int, default=0, help="base seed; run i uses seed + i")
    common.add_argument("--runs", type=int, default=30)
    common.add_argument("--out", default=".", help="output directory")
    common.add_argument("--config", help="key=value file; command-line flags take precedence")
    common.add_argument("--normalization", choices=["l2", "minmax", "zscore"], default="l2")
    common.add_argument("--fit-scope", choices=["all", "train"], default="all",
                        help="rows used to fit minmax/zscore statistics")
    common.add_argument("--train-ratio", type=float, default=0.2)
    common.add_argument("--epochs", type=int, default=400)
    common.add_argument("--lr", type=float, default=0.01)
    common.add_argument("--optimizer", choices=["adam", "sgd"], default="adam")
    common.add_argument("--momentum", type=float, default=0.9)
    common.add_argument("--hidden", type=_ints, default=None,
                        help="hidden units; a comma list for hidden-sweep")
    common.add_argument("--sigma", type=_floats, default=None,
                        help="BDR sigma distance; a comma list for bdr-sweep")
    common.add_argument("--variance-threshold", type=_floats, default=None,
                        help="BDR termination threshold; a comma list for bdr-sweep")
    common.add_argument("--termination", choices=["variance", "dip", "never"], default="variance")
    common.add_argument("--spread", choices=["std", "variance"], default="std",
                        help="statistic the variance rule compares with the threshold")
    common.add_argument("--interval", type=int, default=50, help="epochs between BDR passes")
    common.add_argument("--dip-alpha", type=float, default=0.05)
    common.add_argument("--bands", type=_ints, default=None, help="comma list of hidden-unit increments")
    common.add_argument("--population", type=int, default=20)
    common.add_argument("--generations", type=int, default=10)
    common.add_argument("--crossover-rate", type=float, default=0.2)
    common.add_argument("--mutations", type=int, default=2)
    common.add_argument("--jobs", type=int, default=1, help="worker processes")
    common.add_argument("--timing", action="store_true", help="add wall_time to report.csv")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="bdrga", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def _coerce(parser, command, config):
    """Apply config-file values as defaults of the chosen sub-parser."""
    subparser = parser._subparsers._group_actions[0].choices[command]
    actions = {a.dest: a for a in subparser._actions}
    defaults = {}
    for key, raw in config.items():
        if key not in actions:
            raise ValueError(f"unknown config key {key!r}")
        action = actions[key]
        if action.const is True and action.nargs == 0:
            defaults[key] = raw.lower() in ("1", "true", "yes", "on")
        elif action.type is not None:
            defaults[key] = action.type(raw)
        else:
            defaults[key] = raw
    subparser.set_defaults(**defaults)


def parse_args(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        _coerce(parser, args.command, read_config(args.config))
        args = parser.parse_args(argv)
    if not args.data:
        parser.error("--data is required (on the command line or in --config)")
    return args


def config_from_args(args) -> tuple[harness.ExperimentConfig, dict]:
    hidden = args.hidden or [40]
    sigmas = args.sigma or [1.0]
    thresholds = args.variance_threshold or [0.01]
    train = TrainConfig(epochs=args.epochs, learning_rate=args.lr, optimizer=args.optimizer,
                        momentum=args.momentum, hidden_units=hidden[0])
    bdr = BdrConfig(interval_epochs=args.interval, sigma_distance=sigmas[0],
                    variance_threshold=thresholds[0], termination=args.termination,
                    dip_alpha=args.dip_alpha, spread=args.spread)
    ga = GaConfig(population_size=args.population, generations=args.generations,
                  crossover_rate=args.crossover_rate, mutations_per_offspring=args.mutations)
    cfg = harness.ExperimentConfig(
        data=args.data, protocol=COMMANDS[args.command], runs=args.runs, seed=args.seed,
        train=train, bdr=bdr, ga=ga, normalization=args.normalization,
        fit_scope=args.fit_scope, train_ratio=args.train_ratio, out=args.out,
        jobs=args.jobs, timing=args.timing)
    grids = {"hidden_units": args.hidden, "sigmas": args.sigma,
             "thresholds": args.variance_threshold, "bands": args.bands}
    return cfg, grids


def main(argv=None):
    try:
        args = parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        cfg, grids = config_from_args(args)
        summary = harness.run_protocol(cfg, **grids)
    except (BdrgaError, OSError, ValueError) as exc:
        print(f"bdrga: error: {exc}", file=sys.stderr)
        return 1
    for key in ("test_accuracy", "regression"):
        if summary.get(key):
            print(f"{key}: {summary[key]}")
    print(f"wrote outputs to {cfg.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
