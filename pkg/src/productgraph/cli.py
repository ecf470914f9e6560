"""Command line interface.

Exit codes: 0 success, 2 bad input, 3 no convergence, 4 disconnected graph,
5 I/O failure, 6 numerical divergence.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .exceptions import (
    ConnectivityFailure,
    DisconnectedGraph,
    InvalidInput,
    NonFiniteObjective,
    ProductGraphError,
    StepTooLarge,
)
from .experiment import Experiment, generate_files, run_benchmark
from .graph import load_graph
from .metrics import factor_errors, pr_auc
from .missing import load_mask, mwgl_missing_solve
from .model import center_modes, load_signals, save_signals
from .schemas import check_file, validate_json
from .solver import SolverConfig, mwgl_solve

EXIT_OK = 0
EXIT_BAD_INPUT = 2
EXIT_NOT_CONVERGED = 3
EXIT_DISCONNECTED = 4
EXIT_IO = 5
EXIT_DIVERGED = 6

def _alpha_grid(text: str) -> list[float]:
    try:
        values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad alpha list {text!r}") from exc
    if not values or any(v < 0 for v in values):
        raise argparse.ArgumentTypeError("alpha values must be nonnegative")
    return values


def _truth(args):
    if bool(args.truth_g1) != bool(args.truth_g2):
        raise InvalidInput("--truth-g1 and --truth-g2 go together")
    if not args.truth_g1:
        return None
    return load_graph(args.truth_g1)[0], load_graph(args.truth_g2)[0]


def _evaluate(w1, w2, truth, p1, p2) -> dict:
    t1, t2 = truth
    errs = factor_errors(w1, w2, t1, t2, p1, p2)
    return {
        "rel_err_product": errs["product"],
        "rel_err_f1": errs["factor1"],
        "rel_err_f2": errs["factor2"],
        "pr_auc": pr_auc(np.r_[w1, w2], np.r_[t1, t2]),
    }


def cmd_generate(args) -> int:
    exp = Experiment.load(args.manifest)
    files = generate_files(exp, args.out)
    print(f"wrote {len(files)} files under {args.out or exp.output_dir}")
    return EXIT_OK


def cmd_learn(args) -> int:
    X, manifest = load_signals(args.signals, args.manifest)
    p1, p2 = X.shape[1:]
    mask = load_mask(args.mask, p1, p2) if args.mask else None
    if mask is not None:
        X = np.where(mask, X, np.nan)
    if args.center_modes:
        X = center_modes(X)
    truth = _truth(args)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)

    report, all_converged = [], True
    for k, alpha in enumerate(args.alpha):
        cfg = SolverConfig(
            alpha=alpha, alpha1=args.alpha1, alpha2=args.alpha2, eta=args.eta,
            tol=args.tol, max_iter=args.max_iter, backtracking=args.backtracking,
        )
        if mask is None:
            res = mwgl_solve(X, cfg)
        else:
            res = mwgl_missing_solve(X, mask, cfg, beta=args.beta)
        data = res.to_dict()
        if truth is not None:
            data["metrics"] = _evaluate(res.w1, res.w2, truth, p1, p2)
        path = out if len(args.alpha) == 1 else out.with_name(f"{out.stem}_alpha{k}{out.suffix}")
        path.write_text(json.dumps(data))
        if res.imputed is not None and args.imputed_out:
            ipath = Path(args.imputed_out)
            if len(args.alpha) > 1:
                ipath = ipath.with_name(f"{ipath.stem}_alpha{k}{ipath.suffix}")
            save_signals(ipath, res.imputed, seed=manifest.get("seed"))
        all_converged &= res.converged
        entry = {"alpha": alpha, "path": str(path), "converged": res.converged,
                 "iterations": res.iterations}
        entry.update(data.get("metrics", {}))
        report.append(entry)
        print(f"alpha={alpha:g} iterations={res.iterations} converged={res.converged} -> {path}")

    if len(args.alpha) > 1:
        summary = {"runs": report}
        if truth is not None:
            best = min(report, key=lambda r: r["rel_err_product"])
            summary["best"] = best
            print(f"best alpha={best['alpha']:g} rel_err_product={best['rel_err_product']:.6g}")
        out.with_name(f"{out.stem}_grid.json").write_text(json.dumps(summary, indent=2))
    return EXIT_OK if all_converged else EXIT_NOT_CONVERGED


def cmd_eval(args) -> int:
    data = json.loads(Path(args.result).read_text())
    validate_json(data, "result")
    truth = _truth(args)
    if truth is None:
        raise InvalidInput("eval needs --truth-g1 and --truth-g2")
    p1 = data["config"].get("p1")
    p2 = data["config"].get("p2")
    metrics = _evaluate(np.asarray(data["w1"]), np.asarray(data["w2"]), truth, p1, p2)
    text = json.dumps(metrics, indent=2)
    if args.out:
        Path(args.out).write_text(text)
    print(text)
    return EXIT_OK


def cmd_benchmark(args) -> int:
    exp = Experiment.load(args.manifest)
    report = run_benchmark(exp, jobs=args.jobs, out_dir=args.out)
    for name, s in report["graphs"].items():
        print(f"{name}: c={s['c']} r2={s['r_squared']} slope={s['slope_log_n']} alpha={s['alpha']}")
    if report["failures"]:
        print(f"{len(report['failures'])} trial(s) failed", file=sys.stderr)
    return EXIT_OK


def cmd_schema_check(args) -> int:
    status = EXIT_OK
    for path in args.files:
        try:
            kind = check_file(path, args.kind)
            print(f"ok {path} ({kind})")
        except (InvalidInput, json.JSONDecodeError, ValueError) as exc:
            print(f"FAIL {path}: {exc}")
            status = EXIT_BAD_INPUT
    return status


def _solver_flags(p):
    p.add_argument("--alpha", type=_alpha_grid, default=[0.0],
                   help="sparsity weight or comma-separated grid, e.g. 0,0.001,0.01")
    p.add_argument("--alpha1", type=float, default=None)
    p.add_argument("--alpha2", type=float, default=None)
    p.add_argument("--eta", type=float, default=1e-3)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--max-iter", type=int, default=20000)
    p.add_argument("--backtracking", action="store_true",
                   help="halve the step whenever the objective increases")
    p.add_argument("--beta", type=float, default=1.0, help="imputation smoothing strength")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="productgraph", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write synthetic graphs and signals")
    p.add_argument("manifest")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("learn", help="learn factor graphs from a signal file")
    p.add_argument("signals")
    p.add_argument("--manifest", default=None, help="signal manifest (default: <signals>.json)")
    p.add_argument("--mask", default=None, help="CSV of missing (i1,i2) pairs")
    p.add_argument("--out", required=True)
    p.add_argument("--imputed-out", default=None)
    p.add_argument("--center-modes", action="store_true", help="remove row and column means first")
    p.add_argument("--truth-g1", default=None)
    p.add_argument("--truth-g2", default=None)
    _solver_flags(p)
    p.set_defaults(func=cmd_learn)

    p = sub.add_parser("eval", help="score a result file against true factor graphs")
    p.add_argument("result")
    p.add_argument("--truth-g1", required=True)
    p.add_argument("--truth-g2", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("benchmark", help="run a seeded sweep and fit the error rate")
    p.add_argument("manifest")
    p.add_argument("--out", default=None)
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_benchmark)

    p = sub.add_parser("schema-check", help="validate output files")
    p.add_argument("files", nargs="+")
    p.add_argument("--kind", default=None,
                   choices=["graph", "signal-manifest", "result", "experiment", "rate-fit",
                            "grid-report", "mask", "edges", "metrics", "signals"])
    p.set_defaults(func=cmd_schema_check)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (DisconnectedGraph, ConnectivityFailure) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DISCONNECTED
    except (StepTooLarge, NonFiniteObjective) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    except (InvalidInput, ProductGraphError, json.JSONDecodeError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
