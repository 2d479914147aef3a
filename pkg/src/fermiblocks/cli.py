"""``fermi-blocks`` command line entry point."""

from __future__ import annotations

import argparse
import json
import logging
import sys

from .experiments import EXPERIMENTS, ConfigError, ExperimentConfig, run_experiment

log = logging.getLogger("fermiblocks")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="fermi-blocks",
        description="Sweep block geometries and compare exact free-fermion numerics "
                    "with the multi-block asymptotic formulas.")
    p.add_argument("experiment", choices=EXPERIMENTS)
    p.add_argument("--config", help="JSON config; omitted keys use the built-in defaults")
    p.add_argument("--out", help="CSV output path (default: <experiment>.csv)")
    p.add_argument("--threads", type=int, default=None,
                   help="worker threads for sweep points (default: CPU count)")
    p.add_argument("--dim-cap", type=int, default=None,
                   help="largest matrix dimension allowed (default 6000)")
    p.add_argument("--tolerance-scale", type=float, default=1.0,
                   help="multiply every acceptance threshold by this factor")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        cfg = ExperimentConfig.load(args.experiment, args.config, dim_cap=args.dim_cap,
                                    tolerance_scale=args.tolerance_scale)
    except (ConfigError, OSError, json.JSONDecodeError) as exc:
        print(json.dumps({"experiment": args.experiment, "passed": False, "error": str(exc)}))
        return 2
    out = args.out or f"{args.experiment}.csv"
    log.info("running %s -> %s", args.experiment, out)
    with open(out, "w", newline="") as fh:
        result = run_experiment(cfg, fh, args.threads)
    summary = result.summary()
    summary["csv"] = out
    print(json.dumps(summary, indent=2))
    return 0 if result.passed else 1


if __name__ == "__main__":
    sys.exit(main())
