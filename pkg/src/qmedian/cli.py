"""Command-line entry point ``qmedian``.

Each subcommand builds a one-cell (or small-grid) experiment, runs it through
the harness and prints CSV (JSON for ``degree``) to stdout unless ``--out``
names a file stem. The exit status is 0 only when every predicate checked by
the subcommand holds.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import degree, harness


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--out", help="file stem; writes <out>.csv and <out>.json")
    p.add_argument("--workers", type=int, default=1)
    return p


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="qmedian", description="Approximate selection and counting with simulated quantum queries.")
    ap.add_argument("--config", help="JSON experiment file (same as the 'run' subcommand)")
    sub = ap.add_subparsers(dest="command")

    p = sub.add_parser("degree", parents=[_common()], help="minimal approximating degree")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--l", type=int, required=True)
    p.add_argument("--lprime", type=int, required=True)
    p.add_argument("--c", dest="error", type=float, default=degree.DEFAULT_C)
    p.add_argument("--max-degree", type=int)

    p = sub.add_parser("sweep", parents=[_common()], help="degree scaling over a family")
    p.add_argument("--family", choices=sorted(degree.FAMILIES), required=True)
    p.add_argument("--sizes", type=int, nargs="+", required=True)
    p.add_argument("--c", dest="error", type=float, default=degree.DEFAULT_C)

    p = sub.add_parser("count-primitive", parents=[_common()], help="single counting estimates")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--t", dest="ones", type=int, required=True)
    p.add_argument("--p", dest="queries", type=int, required=True)

    p = sub.add_parser("distinguish", parents=[_common()], help="threshold distinguisher")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--l", type=int, required=True)
    p.add_argument("--lprime", type=int, required=True)
    p.add_argument("--t-true", type=int, required=True)
    p.add_argument("--c", dest="scale", type=float)
    p.add_argument("--reps", type=int, default=1)

    for name, help_ in (("select", "approximate k-th smallest"), ("median", "approximate median")):
        p = sub.add_parser(name, parents=[_common()], help=help_)
        src = p.add_mutually_exclusive_group(required=True)
        src.add_argument("--input", help="one value per line")
        src.add_argument("--gen", help="generator recipe, e.g. permutation:n=101")
        if name == "select":
            p.add_argument("--k", type=int, required=True)
            p.add_argument("--delta", type=float, required=True)
        else:
            p.add_argument("--epsilon", type=float, required=True)
        p.add_argument("--model", choices=("value", "comparison"), default="value")

    p = sub.add_parser("count", parents=[_common()], help="two-phase approximate counting")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--t", dest="ones", type=int)
    src.add_argument("--input", help="one bit per line")
    p.add_argument("--n", type=int)
    p.add_argument("--delta", type=float, required=True)

    p = sub.add_parser("calibrate", parents=[_common()], help="recompute the tuned constants")
    p.set_defaults(trials=2000)

    p = sub.add_parser("run", parents=[_common()], help="run a JSON experiment file")
    p.add_argument("--config", dest="run_config", required=True)
    p.set_defaults(seed=None, trials=None)  # keep the file's values unless given

    p = sub.add_parser("accept", help="run the acceptance checks")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--only", type=int, nargs="+", help="criterion numbers")
    p.add_argument("--out", help="JSON report path")
    return ap


def _config(args) -> harness.ExperimentConfig:
    cmd = args.command
    if cmd == "degree":
        grid = {"n": args.n, "l": args.l, "lprime": args.lprime, "c": args.error,
                "max_degree": args.max_degree}
    elif cmd == "sweep":
        grid = {"family": args.family, "n": list(args.sizes), "c": args.error}
    elif cmd == "count-primitive":
        grid = {"n": args.n, "t": args.ones, "p": args.queries}
    elif cmd == "distinguish":
        grid = {"n": args.n, "l": args.l, "lprime": args.lprime, "t_true": args.t_true,
                "reps": args.reps}
        if args.scale is not None:
            grid["scale"] = args.scale
    elif cmd in ("select", "median"):
        grid = {"input": args.input, "gen": args.gen, "model": args.model}
        if cmd == "select":
            grid.update(k=args.k, delta=args.delta)
        else:
            grid["epsilon"] = args.epsilon
    elif cmd == "count":
        if args.input is None and args.n is None:
            raise SystemExit("count: --t needs --n")
        grid = {"n": args.n, "t": args.ones, "input": args.input, "delta": args.delta}
    elif cmd == "calibrate":
        grid = {}
    else:
        raise SystemExit(f"unknown command {cmd!r}")
    grid = {k: v for k, v in grid.items() if v is not None}
    return harness.ExperimentConfig(cmd, grid, args.trials, args.seed, args.out, args.workers)


def predicates_hold(summary: dict) -> bool:
    """No per-row errors, certified degrees and the 2/3 rule on Monte-Carlo cells."""
    for cell in summary.get("cells", []):
        if cell.get("errors"):
            return False
        if cell.get("status", "certified") != "certified":
            return False
        if cell.get("meets_two_thirds") is False:
            return False
    return True


def _emit(config: harness.ExperimentConfig, summary: dict) -> None:
    if config.out:
        return
    if config.kind == "degree":
        cert = degree.minimal_degree(
            degree.PartialFunction(config.grid["n"][0], config.grid["l"][0], config.grid["lprime"][0],
                                   config.grid.get("c", [degree.DEFAULT_C])[0]),
            config.grid.get("max_degree", [None])[0])
        print(json.dumps(cert.to_dict(), indent=2, sort_keys=True))
    elif config.kind == "calibrate":
        print(json.dumps(summary["calibration"]["values"], indent=2, sort_keys=True))
    else:
        sys.stdout.write(harness.csv_text(summary["rows"]))
        if summary.get("fit"):
            print(json.dumps({"fit": summary["fit"]}, sort_keys=True), file=sys.stderr)


def _accept(args) -> int:
    from .acceptance import run_criteria

    results = run_criteria(args.only, args.seed)
    for r in results:
        print(r.line(), flush=True)
    if args.out:
        Path(args.out).write_text(json.dumps(
            [{"number": r.number, "name": r.name, "passed": r.passed, "seconds": r.seconds,
              "detail": r.detail} for r in results], indent=2, default=str) + "\n")
    return 0 if all(r.passed for r in results) else 1


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    if args.command is None and args.config is None:
        _parser().print_help()
        return 2
    if args.command == "accept":
        return _accept(args)
    if args.command is None or args.command == "run":
        path = args.config if args.command is None else args.run_config
        config = harness.ExperimentConfig.from_json(path)
        if args.command == "run":
            if args.seed is not None:
                config.seed = args.seed
            if args.trials is not None:
                config.trials = args.trials
            config.out = args.out or config.out
            config.workers = max(config.workers, args.workers)
    else:
        config = _config(args)
    try:
        summary = harness.run(config)
    except OSError as exc:
        print(f"qmedian: {exc}", file=sys.stderr)
        return 2
    _emit(config, summary)
    return 0 if predicates_hold(summary) else 1


if __name__ == "__main__":
    sys.exit(main())
