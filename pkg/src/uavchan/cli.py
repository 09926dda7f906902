"""Command-line interface.

Subcommands: scene, collect, form, train, converge, evaluate, run, sweep.
Exit codes: 0 success, 2 infeasible formation, 1 any other error.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys

from . import pipeline
from .config import ExperimentConfig, load_config


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="uavchan",
        description="Cooperative mmWave channel-modeling simulator for UAV "
                    "networks: synthetic scenes, pilot datasets, ring "
                    "formation, distributed adversarial training and "
                    "rate/accuracy evaluation.")
    sub = parser.add_subparsers(dest="command", required=True)
    stage_names = ["scene", "collect", "form", "train", "converge",
                   "evaluate", "run", "sweep"]
    for name in stage_names:
        p = sub.add_parser(name)
        p.add_argument("--config", metavar="PATH",
                       help="YAML experiment config (defaults used if omitted)")
        p.add_argument("--seed", type=int, metavar="N",
                       help="override the config seed")
        p.add_argument("--out", metavar="DIR", default="out",
                       help="artifact directory (default: ./out)")
        p.add_argument("--threads", type=int, metavar="N", default=1,
                       help="worker count; outputs are identical for any value")
        if name == "sweep":
            p.add_argument("--axis", choices=["eta", "size"], required=True)
            p.add_argument("--values", required=True,
                           help="comma-separated axis values")
    return parser


def _load(args):
    config = load_config(args.config) if args.config else ExperimentConfig()
    if args.seed is not None:
        config = dataclasses.replace(config, seed=args.seed)
    return config


def main(argv=None):
    args = _build_parser().parse_args(argv)
    try:
        config = _load(args)
        import os
        os.makedirs(args.out, exist_ok=True)
        if args.command == "scene":
            pipeline.stage_scene(config, args.out)
        elif args.command == "collect":
            pipeline.stage_collect(config, args.out)
        elif args.command == "form":
            result = pipeline.stage_form(config, args.out)
            if result.status != "formed":
                print(f"infeasible: {result.reason}", file=sys.stderr)
                return 2
        elif args.command == "converge":
            pipeline.stage_converge(config, args.out)
        elif args.command == "train":
            pipeline.stage_train(config, args.out)
        elif args.command == "evaluate":
            pipeline.stage_evaluate(config, args.out)
        elif args.command == "run":
            status = pipeline.run_pipeline(config, args.out,
                                           threads=args.threads)
            if status == "infeasible":
                print("infeasible formation; pipeline stopped before training",
                      file=sys.stderr)
                return 2
        elif args.command == "sweep":
            values = [float(v) for v in args.values.split(",")]
            pipeline.sweep(config, args.axis, values, args.out)
        return 0
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
