"""Command-line harness: run, validate, describe and list experiments.

Exit codes: 0 on success, 1 for configuration errors, 2 when any chain
aborted with a runtime sampling error.
"""

import argparse
import sys
import time
from pathlib import Path

from . import harness
from .errors import ConfigError


def _add_config_argument(parser):
    parser.add_argument(
        "--config",
        required=True,
        help="path to a YAML experiment config, or the name of a bundled one",
    )


def build_parser():
    parser = argparse.ArgumentParser(
        prog="spheremc", description="Spherical MCMC experiment harness"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment and persist chains + summary")
    _add_config_argument(run)
    run.add_argument("--seed", type=int, default=None, help="override the master seed")
    run.add_argument("--workers", type=int, default=1, help="concurrent chain processes")
    run.add_argument("--out", default=None, help="output directory (default: ./out/<name>)")
    run.add_argument(
        "--paper-scale",
        action="store_true",
        help="use the config's paper_scale overrides (long runs)",
    )

    validate = sub.add_parser("validate", help="check a config without running it")
    _add_config_argument(validate)

    describe = sub.add_parser("describe", help="print a config with all defaults resolved")
    _add_config_argument(describe)
    describe.add_argument("--paper-scale", action="store_true")

    sub.add_parser("list", help="list bundled experiment configs")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)

    if args.command == "list":
        for path in harness.bundled_config_paths():
            print(path.stem)
        return 0

    try:
        raw = harness.load_config(args.config)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 1

    if args.command == "validate":
        try:
            harness.resolve_config(raw)
        except ConfigError as err:
            print(f"config error: {err}", file=sys.stderr)
            return 1
        print("ok")
        return 0

    if args.command == "describe":
        try:
            print(harness.describe_config(raw, paper_scale=args.paper_scale))
        except ConfigError as err:
            print(f"config error: {err}", file=sys.stderr)
            return 1
        return 0

    # run
    try:
        resolved = harness.resolve_config(
            raw, paper_scale=args.paper_scale, seed_override=args.seed
        )
        out_dir = Path(args.out) if args.out else Path("out") / resolved["name"]
        log_lines = []

        def log(message):
            log_lines.append(f"[{time.strftime('%Y-%m-%dT%H:%M:%S')}] {message}")

        start = time.time()
        summary, n_failures = harness.run_experiment(
            raw,
            out_dir,
            workers=args.workers,
            paper_scale=args.paper_scale,
            seed_override=args.seed,
            log=log,
        )
        log(f"finished in {time.time() - start:.1f}s with {n_failures} failed chain(s)")
        with open(out_dir / "run.log", "w") as fh:
            fh.write("\n".join(log_lines) + "\n")
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 1

    for label, block in summary["samplers"].items():
        agg = block["aggregates"]
        if agg:
            print(
                f"{label}: rel_ess={agg['median_relative_ess']:.4f}"
                f" hopping={agg['mean_hopping']:.4f}"
                f" rej/step={agg['mean_rejections_per_step']:.2f}"
            )
        else:
            print(f"{label}: all chains failed")
    print(f"wrote {out_dir}/summary.json")
    if n_failures:
        print(f"{n_failures} chain(s) failed; see summary.json", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
