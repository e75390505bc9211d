"""Command line entry point: ``radarbandits run|validate|list-scenarios``."""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time

from .core import ConfigurationError
from .harness import bundled_scenarios, load_config, run_experiment, write_series

OUT_ENV = "RADARBANDITS_OUT"


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="radarbandits", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a scenario and write CSVs")
    run.add_argument("config", help="config file path or bundled scenario name")
    run.add_argument("--out", default=os.environ.get(OUT_ENV), help=f"output directory (default ${OUT_ENV})")
    run.add_argument("--trials", type=int)
    run.add_argument("--seed", type=int)
    run.add_argument("--parallel", action="store_true", help="run trials in worker processes")
    run.add_argument("--workers", type=int)

    val = sub.add_parser("validate", help="validate a scenario and print the resolved config")
    val.add_argument("config")

    sub.add_parser("list-scenarios", help="list bundled scenarios")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if args.command == "list-scenarios":
            for name in bundled_scenarios():
                print(name)
            return 0
        config = load_config(args.config)
        if args.command == "validate":
            print(json.dumps(config.to_dict(), indent=2))
            return 0
        if not args.out:
            raise ConfigurationError(f"no output directory: pass --out or set ${OUT_ENV}")
        config = config.with_overrides(trials=args.trials, seed=args.seed)
        t0 = time.perf_counter()
        result = run_experiment(config, parallel=args.parallel, workers=args.workers)
        for path in write_series(result, args.out):
            print(path)
        logging.info("done in %.1fs", time.perf_counter() - t0)
        return 0
    except ConfigurationError as exc:
        print(f"radarbandits: invalid configuration: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"radarbandits: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
