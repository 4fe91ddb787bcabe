"""``truncsparse`` command line: run, verify, sweep, simulate-circuit, estimators-test.

Exit codes: 0 success, 1 acceptance/contract failure, 2 usage or parse error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import replace
from pathlib import Path
from typing import Optional, Sequence

from .config import OUT_ENV, ConfigError, RunConfig, output_dir, write_run

log = logging.getLogger("truncsparse")


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="truncsparse", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="execute one JSON run config")
    r.add_argument("--config", required=True, type=Path)
    r.add_argument("--seed", type=int, help="override the config seed")
    r.add_argument("--out", help=f"output directory (default: config out_dir, ${OUT_ENV}, ./truncsparse_out)")

    v = sub.add_parser("verify", help="run the acceptance suite")
    v.add_argument("--quick", action="store_true", help="reduced rounds and seeds")
    v.add_argument("--only", type=_int_list, default=(), help="criterion numbers, e.g. 1,4,7")
    v.add_argument("--workers", type=int, default=1)
    v.add_argument("--json", type=Path, help="also write results as JSON")

    s = sub.add_parser("sweep", help="regret scaling over a grid of rounds")
    s.add_argument("--kind", required=True, choices=["logistic", "hinge", "squared"])
    s.add_argument("--mode", default="quantum", choices=["quantum", "classical"])
    s.add_argument("--rounds", type=_int_list, default=[64, 256, 1024, 4096])
    s.add_argument("--seeds", type=int, default=50, help="number of seeds per grid point")
    s.add_argument("--seed", type=int, default=0, help="first seed; task i uses seed + i")
    s.add_argument("--dimension", type=int, default=5)
    s.add_argument("--gravity", type=float, default=0.01)
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--out", help="output directory for sweep.json and sweep.csv")

    c = sub.add_parser("simulate-circuit", help="run the reversible truncation circuit")
    c.add_argument("--k", type=int, default=12, help="word width in bits")
    c.add_argument("--f", type=int, default=8, help="fractional bits")
    c.add_argument("--alpha", type=float, required=True)
    c.add_argument("--theta", type=float, required=True)
    g = c.add_mutually_exclusive_group(required=True)
    g.add_argument("--x", type=float)
    g.add_argument("--exhaustive", action="store_true")

    e = sub.add_parser("estimators-test", help="Monte-Carlo checks of the estimator contracts")
    e.add_argument("--quick", action="store_true")
    return p


def _cmd_run(args) -> int:
    config = RunConfig.load(args.config)
    if args.seed is not None:
        config = replace(config, seed=args.seed)
    out = output_dir(config, args.out)
    paths = write_run(config, out)
    print(json.dumps({k: str(v) for k, v in paths.items()}, indent=2))
    return 0


def _cmd_verify(args) -> int:
    from .acceptance import run_suite

    results = run_suite(quick=args.quick, only=tuple(args.only), workers=args.workers)
    if args.json:
        args.json.write_text(json.dumps([r.as_dict() for r in results], indent=2, default=str) + "\n")
    failed = [r.number for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} criteria passed")
    return 1 if failed else 0


def _cmd_sweep(args) -> int:
    from .regret import ExperimentSetup, scaling_experiment

    setup = ExperimentSetup(kind=args.kind, dimension=args.dimension, gravity=args.gravity,
                            informative_fraction=0.3, noise=0.5, weight_scale=1.0, mode=args.mode)
    seeds = range(args.seed, args.seed + args.seeds)
    res = scaling_experiment(setup, args.rounds, seeds, args.workers)
    out = Path(args.out or os.environ.get(OUT_ENV) or "truncsparse_out")
    out.mkdir(parents=True, exist_ok=True)
    (out / "sweep.json").write_text(json.dumps(res.as_dict(), indent=2) + "\n")
    (out / "sweep.csv").write_text(res.to_csv())
    print(json.dumps({"slope": res.slope, "medians": res.medians, "degenerate": res.degenerate}))
    return 0


def _cmd_circuit(args) -> int:
    from .circuits import FixedPointFormat, exhaustive_truncation, truncate_fixed

    fmt = FixedPointFormat(k=args.k, f=args.f)
    if args.exhaustive:
        results = exhaustive_truncation(fmt, args.alpha, args.theta)
        report = {"k": fmt.k, "f": fmt.f, "alpha": args.alpha, "theta": args.theta,
                  "inputs": [fmt.decode(r) for r in fmt.all_raw()],
                  "outputs": [r.output for r in results],
                  "stats": results[0].stats.as_dict(),
                  "ancilla_clean": all(r.ancilla_clean for r in results),
                  "params_preserved": all(r.params_preserved for r in results),
                  "overflow": any(r.overflow for r in results)}
    else:
        r = truncate_fixed(args.x, args.alpha, args.theta, fmt)
        report = {"k": fmt.k, "f": fmt.f, "alpha": args.alpha, "theta": args.theta,
                  "x": args.x, "output": r.output, "output_bits": format(r.output_raw, f"0{fmt.k}b"),
                  "stats": r.stats.as_dict(), "ancilla_clean": r.ancilla_clean,
                  "params_preserved": r.params_preserved, "overflow": r.overflow}
    print(json.dumps(report))
    return 0


def _cmd_estimators(args) -> int:
    from .acceptance import estimator_contracts

    res = estimator_contracts(quick=args.quick)
    print(res.line())
    print(json.dumps(res.detail, indent=2))
    return 0 if res.passed else 1


COMMANDS = {"run": _cmd_run, "verify": _cmd_verify, "sweep": _cmd_sweep,
            "simulate-circuit": _cmd_circuit, "estimators-test": _cmd_estimators}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, FileNotFoundError, ValueError) as exc:
        print(f"truncsparse: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
