"""``twistlock`` command line: run experiments, self-verify, predict.

Exit codes: 0 every cell matches its prediction, 1 mismatches present,
2 configuration or runtime error.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import time

from .. import analyze
from ..graph import delay_to_lag, make_alpha_decay, make_distance_delay, make_distance_lag, make_k_ring
from ..stability import NoStableStateError, predicted_wave_q
from .config import ConfigError, parse_config
from .experiments import run_experiment
from .output import to_jsonable, write_outputs

EXIT_OK, EXIT_MISMATCH, EXIT_ERROR = 0, 1, 2


def _err(msg: str) -> int:
    print(f"twistlock: error: {msg}", file=sys.stderr)
    return EXIT_ERROR


def cmd_run(args) -> int:
    try:
        cfg = parse_config(args.config, full_scale=args.full_scale)
    except ConfigError as exc:
        return _err(str(exc))
    if args.jobs < 1:
        return _err("--jobs must be >= 1")
    out_dir = args.out or cfg.out_dir or os.path.join("twistlock-out", cfg.experiment)
    t0 = time.perf_counter()
    try:
        result = run_experiment(cfg, jobs=args.jobs)
        files = write_outputs(result, out_dir)
    except (ValueError, OSError, RuntimeError) as exc:
        return _err(f"{type(exc).__name__}: {exc}")
    summary = result["summary"]
    counts = ", ".join(f"{k}={v}" for k, v in summary["verdicts"].items()) or "no simulated cells"
    print(f"{cfg.experiment}: {summary['cells']} cells ({counts}) in {time.perf_counter() - t0:.1f}s")
    print(f"wrote {len(files)} files to {out_dir}")
    return EXIT_OK if summary["ok"] else EXIT_MISMATCH


def cmd_verify(args) -> int:
    from ..verify import run_suite

    if args.n_max < 3:
        return _err("--n-max must be >= 3")
    t0 = time.perf_counter()
    checks = run_suite(args.n_max, seed=args.seed, progress=lambda c: print(c.line(), flush=True))
    failed = [c for c in checks if not c.passed]
    print(f"{len(checks) - len(failed)}/{len(checks)} checks passed in {time.perf_counter() - t0:.1f}s")
    return EXIT_MISMATCH if failed else EXIT_OK


def cmd_predict(args) -> int:
    try:
        if (args.k is None) == (args.alpha is None):
            raise ValueError("give exactly one of --k or --alpha")
        if args.lag == "dist" and args.nu is not None:
            raise ValueError("--lag dist and --nu are mutually exclusive")
        if args.k is not None:
            net = make_k_ring(args.n, args.k, args.epsilon)
            desc = {"type": "k-ring", "k": args.k}
        else:
            net = make_alpha_decay(args.n, args.alpha, args.epsilon)
            desc = {"type": "alpha-decay", "alpha": args.alpha}
        lags = None
        if args.lag == "dist":
            if args.k is None:
                raise ValueError("--lag dist needs a k-ring (--k)")
            lags = make_distance_lag(net)
            desc["lag"] = "pi * d / k"
        elif args.nu is not None:
            lags = delay_to_lag(make_distance_delay(args.n, args.nu), args.omega)
            desc.update(nu=args.nu, omega=args.omega, lag="omega * d / nu")
    except ValueError as exc:
        return _err(str(exc))
    report = analyze(net, lags)
    try:
        wave = predicted_wave_q(report)
    except NoStableStateError:
        wave = None
    half = report.n // 2
    out = {
        "n": args.n,
        "epsilon": args.epsilon,
        "network": desc,
        "stable_set": report.stable_signed(),
        "marginal": sorted(q - report.n if q > half else q for q in report.marginal),
        "predicted_q": wave,
        "basin_rank": [q - report.n if q > half else q for q in report.basin_rank],
        "tol": report.tol,
    }
    json.dump(to_jsonable(out), sys.stdout, sort_keys=True)
    sys.stdout.write("\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="twistlock", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run an experiment described by a config file")
    r.add_argument("config")
    r.add_argument("--out", help="output directory (default: [output] dir or twistlock-out/<experiment>)")
    r.add_argument("--jobs", type=int, default=1, help="worker processes for independent cells")
    r.add_argument("--full-scale", action="store_true", help="use full-scale trial counts and sweeps")
    r.set_defaults(func=cmd_run)

    v = sub.add_parser("verify", help="run the invariant and oracle self-check suite")
    v.add_argument("--n-max", type=int, default=32, help="largest n for the dense-spectrum oracle")
    v.add_argument("--seed", type=int, default=0)
    v.set_defaults(func=cmd_verify)

    q = sub.add_parser("predict", help="print stable set and predicted |q| as JSON")
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--k", type=int)
    q.add_argument("--alpha", type=float)
    q.add_argument("--epsilon", type=float, default=1.0)
    q.add_argument("--lag", choices=["none", "dist"], default="none")
    q.add_argument("--nu", type=float)
    q.add_argument("--omega", type=float, default=1.0)
    q.set_defaults(func=cmd_predict)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_ERROR if exc.code else EXIT_OK
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
