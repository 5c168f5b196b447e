"""Command-line entry point.

    cmab run --preset fig2 --out results/fig2
    cmab run --config scenario.json --out results/custom --seed 11
    cmab list-presets
"""

from __future__ import annotations

import argparse
import json
import sys

from .env import ConfigurationError
from .harness import (
    PRESET_NAMES,
    ExperimentConfig,
    emit_results,
    preset,
    run_experiment,
    with_overrides,
)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cmab", description="Competitive bandit game simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one experiment")
    source = run.add_mutually_exclusive_group(required=True)
    source.add_argument("--config", help="path to a JSON experiment config")
    source.add_argument("--preset", choices=PRESET_NAMES, help="built-in scenario name")
    run.add_argument("--out", required=True, help="output directory")
    run.add_argument("--seed", type=int, help="override base_seed")
    run.add_argument("--replications", type=int, help="override replication count")
    run.add_argument("--policy", help="override policy (selfish|social|hiding|cisp)")
    run.add_argument("--n-players", type=int, help="override player count")
    run.add_argument("--horizon", type=int, help="override horizon")

    sub.add_parser("list-presets", help="list built-in scenario names")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "list-presets":
        for name in PRESET_NAMES:
            print(name)
        return 0

    try:
        if args.preset:
            config = preset(args.preset)
        else:
            with open(args.config, "r", encoding="utf-8") as fh:
                config = ExperimentConfig.from_dict(json.load(fh))
        config = with_overrides(
            config,
            seed=args.seed,
            replications=args.replications,
            policy=args.policy,
            n_players=args.n_players,
            horizon=args.horizon,
        )
        bundle = run_experiment(config)
        paths = emit_results(bundle, args.out)
    except (ConfigurationError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for kind, path in sorted(paths.items()):
        print(f"{kind}: {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
