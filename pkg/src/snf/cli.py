"""Command-line interface.

Exit codes: 0 success, 2 invalid input, 3 pipeline failure, 4 capacity
exceeded. Every artifact records the package version, the seed and a hash
of the run configuration.
"""
import argparse
import json
import os
import sys
from math import factorial

import numpy as np

from snf import __version__
from snf import family as fs
from snf import io as sio
from snf import isoperimetry as iso
from snf import projection as pj
from snf import recovery as rc
from snf.errors import CapacityError, PipelineError, ValidationError
from snf.restrictions import stream

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_PIPELINE = 3
EXIT_CAPACITY = 4


def _threads(args):
    if args.threads is not None:
        t = args.threads
    else:
        env = os.environ.get("SNF_THREADS")
        try:
            t = int(env) if env else (os.cpu_count() or 1)
        except ValueError:
            raise ValidationError("SNF_THREADS must be an integer") from None
    if t < 1:
        raise ValidationError("thread count must be positive")
    return t


def _config(args, inputs=()):
    cfg = {k: v for k, v in vars(args).items()
           if k not in ("func", "output", "threads", "witness_dir", "family", "spec")}
    cfg["inputs"] = {os.path.basename(p): sio.file_digest(p) for p in inputs}
    return cfg


def _emit(text, args):
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_analyze(args):
    F = sio.read_family(args.family)
    M = pj.coefficient_matrix(F, samples=args.samples, rng=stream(args.seed))
    tau = pj.tau_matrix(F)
    meta = sio.meta(args.seed, _config(args, [args.family]))
    if args.format == "csv":
        cols = ["row"] + [f"c{j + 1}" for j in range(F.n)]
        _emit(sio.csv_text(cols, sio.matrix_rows(M.a), meta), args)
        return
    report = {
        "meta": meta, "n": F.n, "size": F.size, "c": M.c,
        "epsilon": M.epsilon, "epsilon_kind": M.epsilon_kind, "epsilon_stderr": M.epsilon_stderr,
        "a": M.a, "tau": tau.tau,
    }
    if M.epsilon_kind == pj.EXACT:
        rep = pj.verify_identities(M)
        report["identities"] = {
            "row_sum": rep.row_sum, "column_sum": rep.column_sum, "l2": rep.l2,
            "max_abs_entry": rep.max_abs_entry, "abs_bound_violations": rep.abs_bound_violations,
        }
    _emit(sio.dumps(report), args)


def _recover_kwargs(args):
    return {
        "tau_threshold": args.tau_threshold,
        "large_threshold": args.large_threshold,
        "finite_n": not args.asymptotic_targets,
        "samples": args.samples,
    }


def cmd_recover(args):
    F = sio.read_family(args.family)
    res = rc.recover(F, rng=stream(args.seed), **_recover_kwargs(args))
    out = {"meta": sio.meta(args.seed, _config(args, [args.family])), **res.to_dict()}
    _emit(sio.dumps(out), args)


def cmd_iso(args):
    F = sio.read_family(args.family)
    meta = sio.meta(args.seed, _config(args, [args.family]))
    out = {"meta": meta, **iso.diaconis_check(F).to_dict()}
    if args.stability:
        rep = iso.iso_stability(F, rng=stream(args.seed))
        out["stability"] = rep.to_dict()
    _emit(sio.dumps(out), args)


SCAN_COLUMNS = ("k", "lex_boundary", "best_boundary", "improved", "witness_file")


def cmd_conjecture(args):
    sizes = None
    if args.sizes:
        try:
            sizes = [int(s) for s in args.sizes.split(",")]
        except ValueError:
            raise ValidationError("--sizes must be a comma-separated list of integers") from None
    rows = iso.conjecture_scan(args.n, sizes=sizes, mode=args.mode, restarts=args.restarts,
                               seed=args.seed)
    table = []
    for r in rows:
        wfile = ""
        if r.improved and args.witness_dir:
            os.makedirs(args.witness_dir, exist_ok=True)
            wfile = os.path.join(args.witness_dir, f"witness_n{args.n}_k{r.k}.json")
            member = np.zeros(factorial(args.n), dtype=bool)
            member[list(r.witness)] = True
            with open(wfile, "w", encoding="utf-8") as fh:
                fh.write(sio.dumps(sio.family_to_dict(fs.BooleanFamily.explicit(member))))
        table.append({"k": r.k, "lex_boundary": r.lex_boundary, "best_boundary": r.best_boundary,
                      "improved": r.improved, "witness_file": wfile})
    meta = sio.meta(args.seed, _config(args))
    if args.format == "json":
        verdict = "improvement found" if any(t["improved"] for t in table) else "no improvement found"
        _emit(sio.dumps({"meta": meta, "rows": table, "verdict": verdict}), args)
    else:
        _emit(sio.csv_text(SCAN_COLUMNS, table, meta), args)


def _sweep_spec(d):
    if not isinstance(d, dict):
        raise ValidationError("sweep file must hold a JSON object")
    base = sio.family_from_dict({k: v for k, v in d.items() if k not in ("deltas", "trials")})
    if base.is_explicit or base.added or base.removed:
        raise ValidationError("sweep base must be an unperturbed 'row' or 'column' family")
    deltas = d.get("deltas")
    if not isinstance(deltas, list) or not deltas or not all(
            isinstance(x, (int, float)) and not isinstance(x, bool) for x in deltas):
        raise ValidationError("field 'deltas' must be a non-empty list of numbers")
    trials = d.get("trials", 1)
    if not isinstance(trials, int) or isinstance(trials, bool) or trials < 1:
        raise ValidationError("field 'trials' must be a positive integer")
    return base, [float(x) for x in deltas], trials


def cmd_sweep(args):
    base, deltas, trials = _sweep_spec(sio.read_json(args.spec))
    rows = []
    for k, delta in enumerate(deltas):
        spec = rc.NoiseSpec(base.n, base.line, base.index, tuple(sorted(base.cosets)), delta,
                            seed=args.seed + k)
        rows.extend(rc.stability_experiment(spec, trials, **_recover_kwargs(args)))
    meta = sio.meta(args.seed, _config(args, [args.spec]))
    if args.format == "json":
        _emit(sio.dumps({"meta": meta, "rows": rows}), args)
    else:
        _emit(sio.csv_text(rc.STABILITY_COLUMNS, rows, meta), args)


def cmd_generate(args):
    rng = stream(args.seed)
    if args.kind == "random":
        if args.size is None:
            raise ValidationError("--size is required for random families")
        F = fs.random_family(args.n, args.size, rng)
    else:
        if args.cosets is None:
            raise ValidationError("--cosets is required for dictatorships")
        try:
            cosets = [int(x) - 1 for x in args.cosets.split(",") if x]
        except ValueError:
            raise ValidationError("--cosets must be a comma-separated list of integers") from None
        line = fs.COLUMN if args.column else fs.ROW
        spec = rc.NoiseSpec(args.n, line, args.line_index - 1, tuple(cosets), args.delta, args.seed)
        F = spec.base if args.delta == 0 and args.kind == "dictatorship" else \
            rc.noisy_dictatorship(spec, rng)
    _emit(sio.dumps(sio.family_to_dict(F)), args)


def _common(p, fmt_default="json"):
    p.add_argument("--seed", type=int, default=0, help="base RNG seed (default 0)")
    p.add_argument("--samples", type=int, default=10**6,
                   help="Monte Carlo samples where exact computation is out of reach")
    p.add_argument("--threads", type=int, default=None,
                   help="worker threads (default: SNF_THREADS or all cores)")
    p.add_argument("--format", choices=("json", "csv"), default=fmt_default)
    p.add_argument("--output", "-o", default=None, help="write here instead of stdout")


def _thresholds(p):
    p.add_argument("--tau-threshold", type=float, default=None,
                   help="accept cosets with tau >= 1 - T on the strong line")
    p.add_argument("--large-threshold", type=float, default=None,
                   help="distance to the targets within which an entry is large")
    p.add_argument("--asymptotic-targets", action="store_true",
                   help="classify against {2c, 2(1-c)} instead of the finite-n values")


def build_parser():
    parser = argparse.ArgumentParser(prog="snf", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"snf {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="coefficient matrix, tau and distance to U_1")
    p.add_argument("family")
    _common(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("recover", help="nearest single-line coset union")
    p.add_argument("family")
    _common(p)
    _thresholds(p)
    p.set_defaults(func=cmd_recover)

    p = sub.add_parser("iso", help="edge boundary against the isoperimetric bound")
    p.add_argument("family")
    p.add_argument("--stability", action="store_true", help="also run the stability chain")
    _common(p)
    p.set_defaults(func=cmd_iso)

    p = sub.add_parser("conjecture", help="lex-segment boundary scan")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--mode", choices=(iso.EXHAUSTIVE, iso.LOCAL_SEARCH), default=iso.EXHAUSTIVE)
    p.add_argument("--sizes", default=None, help="comma-separated sizes (default: all)")
    p.add_argument("--restarts", type=int, default=64)
    p.add_argument("--witness-dir", default=None, help="directory for improving witnesses")
    _common(p, fmt_default="csv")
    p.set_defaults(func=cmd_conjecture)

    p = sub.add_parser("sweep", help="noise sweep of the recovery pipeline")
    p.add_argument("spec")
    _common(p, fmt_default="csv")
    _thresholds(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("generate", help="write a family file")
    p.add_argument("kind", choices=("dictatorship", "noisy", "random"))
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--line-index", type=int, default=1)
    p.add_argument("--column", action="store_true", help="use a column instead of a row")
    p.add_argument("--cosets", default=None, help="comma-separated one-based coset indices")
    p.add_argument("--delta", type=float, default=0.0)
    p.add_argument("--size", type=int, default=None)
    _common(p)
    p.set_defaults(func=cmd_generate)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _threads(args)
        args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except CapacityError as exc:
        print(f"capacity exceeded: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except PipelineError as exc:
        print(f"pipeline failure: {exc}", file=sys.stderr)
        print(json.dumps(sio._clean(exc.diagnostics), sort_keys=True), file=sys.stderr)
        return EXIT_PIPELINE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
