"""Command-line entry point: ``tts-emg {prepare,train,evaluate,features,compare,synth}``.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import logging
import sys

from . import pipeline
from .errors import DataFormatError, NumericError

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _int_list(text):
    return [int(v) for v in text.replace(",", " ").split()]


def build_parser():
    parser = _Parser(prog="tts-emg", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run config; flags override its values")
    common.add_argument("--db", dest="database_id", type=int, choices=(1, 2))
    common.add_argument("--arch", dest="architecture", choices=("tts", "baseline"))
    common.add_argument("--subjects", nargs="+", help="recording files (several per subject are concatenated)")
    common.add_argument("--splits", type=_int_list, help="1-based split numbers, e.g. '1,2,5'")
    common.add_argument("--epochs", type=int)
    common.add_argument("--seed", type=int)
    common.add_argument("--jobs", type=int)
    common.add_argument("--exclude-rep1", dest="exclude_rep1", action="store_true", default=None)
    common.add_argument("--precision", choices=("high", "fast"))
    common.add_argument("--out")
    common.add_argument("--batch-size", dest="batch_size", type=int)
    common.add_argument("--width-divisor", dest="width_divisor", type=int,
                        help="divide filter and hidden-unit counts (reduced networks)")
    common.add_argument("--classes", dest="n_classes", type=int, help="override the class count")
    common.add_argument("--name", dest="classifier", help="classifier id used in reports")
    common.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("prepare", parents=[common], help="segment recordings into window caches")
    sub.add_parser("train", parents=[common], help="train one network per subject and split")
    sub.add_parser("evaluate", parents=[common], help="score checkpoints and write the report")
    sub.add_parser("features", parents=[common], help="export mDWT/MAV/WL feature matrices")
    cmp_ = sub.add_parser("compare", parents=[common], help="Friedman and Holm tests across classifiers")
    cmp_.add_argument("--results", nargs="+", help="report.json files from 'evaluate'")
    cmp_.add_argument("--control", help="control classifier id (default: best mean macro)")
    cmp_.add_argument("--alpha", type=float)
    syn = sub.add_parser("synth", help="write the bundled synthetic dataset")
    syn.add_argument("--out", required=True)
    syn.add_argument("--n-subjects", type=int, default=3)
    syn.add_argument("--seed", type=int, default=0)
    syn.add_argument("--classes", dest="n_classes", type=int, default=5, help="including rest")
    syn.add_argument("--channels", dest="n_channels", type=int, default=4)
    syn.add_argument("--rate", dest="sample_rate_hz", type=float, default=100.0)
    syn.add_argument("--db", dest="database_id", type=int, choices=(1, 2), default=1)
    syn.add_argument("--movement-seconds", dest="movement_s", type=float, default=1.5)
    syn.add_argument("--rest-seconds", dest="rest_s", type=float, default=1.0)
    return parser


_NON_CONFIG = {"command", "config", "verbose", "n_subjects"}


def config_from_args(args):
    overrides = {k: v for k, v in vars(args).items() if k not in _NON_CONFIG and v is not None}
    if args.config:
        return pipeline.RunConfig.from_file(args.config, **overrides)
    return pipeline.RunConfig(**overrides)


COMMANDS = {
    "prepare": pipeline.cmd_prepare,
    "train": pipeline.cmd_train,
    "evaluate": pipeline.cmd_evaluate,
    "features": pipeline.cmd_features,
    "compare": pipeline.cmd_compare,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
                        format="%(levelname)s %(message)s")
    if args.command == "synth":
        from .synthetic import write_synthetic_dataset
        geometry = dict(n_classes=args.n_classes, n_channels=args.n_channels,
                        sample_rate_hz=args.sample_rate_hz, database_id=args.database_id,
                        movement_s=args.movement_s, rest_s=args.rest_s)
        for p in write_synthetic_dataset(args.out, args.n_subjects, args.seed, **geometry):
            print(p)
        return EXIT_OK
    try:
        cfg = config_from_args(args)
    except (TypeError, ValueError) as exc:
        print(f"tts-emg: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        result = COMMANDS[args.command](cfg)
    except NumericError as exc:
        print(f"tts-emg: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (DataFormatError, OSError, ValueError, KeyError) as exc:
        print(f"tts-emg: error: {exc}", file=sys.stderr)
        return EXIT_DATA
    if args.command in ("evaluate", "compare"):
        sys.stdout.write(result.to_text())
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
