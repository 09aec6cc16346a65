"""Command-line entry point: one subcommand per experiment, seeded reports.

Reports embed the config echo, the seed, and the package version, and are
bit-stable for identical inputs (sorted JSON keys, rationals as "p/q"
strings, trailing newline).  Exit status is 0 only when every asserted
expectation holds; 1 flags a failed check; 2 is a usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import random
import sys

from . import __version__
from .exact_linalg import det, rank, rat_from_str
from .matrix_builders import (
    build_Pbreve,
    build_Ptilde,
    footnote1_columns,
    random_alpha_draws,
)
from .model_core import ModelSpec
from .moment_space import (
    CSV_COLUMNS,
    covariate_pattern_experiment,
    default_budget,
    default_c,
    default_init,
    dimension_report,
    moment_basis,
    span_rank,
    stacked_x_rank,
    standard_grid,
    validate_basis,
)
from .gmm_mc import (
    MC_CSV_COLUMNS,
    SearchConfig,
    SimConfig,
    estimate_gmm,
    monte_carlo,
    simulate_panel,
)
from .polynomialization import coeff_matrix, column_poly, max_degree

OUTPUT_DIR_ENV = "PANEL_LOGIT_MOMENTS_OUT"

USAGE_ERROR = 2
CHECK_FAILED = 1


def _parse_T_range(text: str) -> list[int]:
    """Parse "a..b" (inclusive) or a single integer."""
    if ".." in text:
        lo, hi = text.split("..", 1)
        return list(range(int(lo), int(hi) + 1))
    return [int(text)]


def _parse_init(text: str | None, p: int) -> tuple[int, ...]:
    if text is None:
        return default_init(p)
    init = tuple(int(ch) for ch in text)
    if len(init) != p:
        raise SystemExit(USAGE_ERROR)
    return init


def _float17(x):
    """Round-trip float at up to 17 significant digits."""
    return float(f"{x:.17g}")


def _normalize(obj):
    if isinstance(obj, float):
        return _float17(obj)
    if isinstance(obj, dict):
        return {k: _normalize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_normalize(v) for v in obj]
    return obj


def write_report(results: dict, fmt: str, path: str | None) -> None:
    """Serialize a report deterministically to path (or stdout)."""
    if fmt == "json":
        text = json.dumps(_normalize(results), sort_keys=True, indent=2) + "\n"
    elif fmt == "csv":
        rows = results.get("rows", [])
        columns = results.get("csv_columns") or (list(rows[0]) if rows else [])
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: row.get(k, "") for k in columns})
        text = buf.getvalue()
    else:
        raise ValueError(f"unknown report format {fmt!r}")
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def read_report(path: str) -> dict:
    with open(path) as fh:
        return json.load(fh)


def _report_skeleton(args, command: str) -> dict:
    return {
        "command": command,
        "version": __version__,
        "seed": args.seed,
        "config": {k: v for k, v in sorted(vars(args).items())
                   if k not in ("func", "out", "format") and v is not None},
    }


def _resolve_out(args) -> str | None:
    if args.out is None:
        return None
    base = os.environ.get(OUTPUT_DIR_ENV)
    if base and not os.path.isabs(args.out):
        return os.path.join(base, args.out)
    return args.out


def _finish(args, report: dict, passed: bool) -> int:
    report["pass"] = bool(passed)
    write_report(report, args.format, _resolve_out(args))
    return 0 if passed else CHECK_FAILED


def _c_values(args, p: int, rng: random.Random) -> tuple:
    if args.c:
        return tuple(rat_from_str(x) for x in args.c)
    return default_c(p, rng)


def cmd_rank(args) -> int:
    report = _report_skeleton(args, "rank")
    rows = []
    ok = True
    for T in _parse_T_range(args.T):
        spec = ModelSpec(args.p, T, _parse_init(args.init, args.p))
        rng = random.Random(args.seed + T)
        c = _c_values(args, args.p, rng)
        b = None if args.beta0 else tuple(rat_from_str(x) for x in args.b) if args.b else None
        cert = span_rank(spec, c, b, default_budget(args.p, T, b is None, args.seed),
                         force_sampled=args.force_sampled)
        row = cert.to_json() | {"T": T, "p": args.p}
        rows.append(row)
        ok = ok and cert.stable_across_trials
    report["rows"] = rows
    return _finish(args, report, ok)


def cmd_basis(args) -> int:
    report = _report_skeleton(args, "basis")
    T = int(args.T)
    spec = ModelSpec(args.p, T, _parse_init(args.init, args.p))
    rng = random.Random(args.seed)
    c = _c_values(args, args.p, rng)
    b = None if args.beta0 else (tuple(rat_from_str(x) for x in args.b) if args.b else None)
    basis = moment_basis(spec, c, b, default_budget(args.p, T, b is None, args.seed))
    validation = validate_basis(basis, args.fresh, args.seed + 1)
    report["basis"] = basis.to_json()
    report["validation"] = validation.to_json()
    return _finish(args, report, validation.valid)


def cmd_dims(args) -> int:
    report = _report_skeleton(args, "dims")
    if args.p is None:
        cells = standard_grid()
    else:
        pattern = "beta0" if args.beta0 else "generic"
        init = _parse_init(args.init, args.p)
        cells = [(args.p, T, init, pattern) for T in _parse_T_range(args.T)]
    result = dimension_report(cells, args.seed)
    report["rows"] = result.to_json()
    report["csv_columns"] = list(CSV_COLUMNS)
    return _finish(args, report, result.all_match)


def cmd_patterns(args) -> int:
    report = _report_skeleton(args, "patterns")
    rows = []
    ok = True
    for T in _parse_T_range(args.T):
        pr = covariate_pattern_experiment(T, seed=args.seed)
        rows.append(pr.to_json())
        ok = ok and pr.meets_bound
    report["rows"] = rows
    return _finish(args, report, ok)


def cmd_stacked(args) -> int:
    report = _report_skeleton(args, "stacked")
    rows = []
    ok = True
    for T in _parse_T_range(args.T):
        sx = stacked_x_rank(T, args.x_draws, seed=args.seed)
        rows.append(sx.to_json())
        ok = ok and all(r == 2 * T for r in sx.per_b_ranks) and sx.exceeds_2T
    report["rows"] = rows
    return _finish(args, report, ok)


def cmd_lemma1(args) -> int:
    report = _report_skeleton(args, "lemma1")
    rows = []
    ok = True
    for T in _parse_T_range(args.T):
        rng = random.Random(args.seed + T)
        nonzero = 0
        for trial in range(args.trials):
            c = default_c(1, rng)[0]
            draws = random_alpha_draws(2 * T, args.seed * 10007 + T * 101 + trial)
            if det(build_Ptilde(T, draws, c).matrix) != 0:
                nonzero += 1
        selections_full_rank = 0
        for trial in range(args.selections):
            c = default_c(1, rng)[0]
            columns = footnote1_columns(T, rng)
            draws = random_alpha_draws(2 * T + 2, args.seed * 20011 + T * 103 + trial)
            spec = ModelSpec(1, T, (0,))
            sub = build_Pbreve(spec, draws, (c,)).matrix.select_columns(
                [h - 1 for h in columns]
            )
            if rank(sub) == 2 * T:
                selections_full_rank += 1
        rows.append({
            "T": T,
            "trials": args.trials,
            "nonzero_determinants": nonzero,
            "selections": args.selections,
            "selections_full_rank": selections_full_rank,
        })
        ok = ok and nonzero == args.trials and selections_full_rank == args.selections
    report["rows"] = rows
    return _finish(args, report, ok)


def cmd_poly(args) -> int:
    report = _report_skeleton(args, "poly")
    rows = []
    ok = True
    for T in _parse_T_range(args.T):
        spec = ModelSpec(args.p, T, _parse_init(args.init, args.p))
        rng = random.Random(args.seed + T)
        c = _c_values(args, args.p, rng)
        cm = coeff_matrix(spec, c)
        degrees = [column_poly(spec, h, c).degree for h in range(1, 2**T + 1)]
        bound = max_degree(spec)
        expected = 2 * T if args.p == 1 else 3 * T - 2
        r = rank(cm)
        rows.append({
            "T": T,
            "p": args.p,
            "rank": r,
            "expected_rank": expected,
            "max_degree": max(degrees),
            "degree_bound": bound,
        })
        ok = ok and r == expected and max(degrees) <= bound
    report["rows"] = rows
    return _finish(args, report, ok)


def cmd_simulate(args) -> int:
    report = _report_skeleton(args, "simulate")
    spec = ModelSpec(args.p, int(args.T), _parse_init(args.init, args.p))
    cfg = SimConfig(N=args.N, spec=spec, true_gamma=tuple(args.gamma),
                    alpha_dist=("normal", 0.0, args.alpha_sd), seed=args.seed)
    data = simulate_panel(cfg)
    report["mean_outcome"] = float(data.y.mean())
    report["outcomes"] = ["".join(str(v) for v in row) for row in data.y.tolist()]
    return _finish(args, report, True)


def cmd_estimate(args) -> int:
    report = _report_skeleton(args, "estimate")
    spec = ModelSpec(args.p, int(args.T), _parse_init(args.init, args.p))
    cfg = SimConfig(N=args.N, spec=spec, true_gamma=tuple(args.gamma),
                    alpha_dist=("normal", 0.0, args.alpha_sd), seed=args.seed)
    result = estimate_gmm(simulate_panel(cfg), spec, SearchConfig())
    report["gamma_hat"] = list(result.gamma_hat)
    report["objective_value"] = result.objective_value
    report["evaluations"] = result.evaluations
    return _finish(args, report, result.converged)


def cmd_mc(args) -> int:
    report = _report_skeleton(args, "mc")
    spec = ModelSpec(args.p, int(args.T), _parse_init(args.init, args.p))
    cfg = SimConfig(N=1, spec=spec, true_gamma=tuple(args.gamma),
                    alpha_dist=("normal", 0.0, args.alpha_sd), seed=args.seed)
    summaries = monte_carlo(cfg, args.reps, SearchConfig(),
                            n_values=tuple(args.N))
    report["rows"] = [s.to_json() for s in summaries]
    report["csv_columns"] = list(MC_CSV_COLUMNS)
    ok = all(s.failures == 0 for s in summaries)
    return _finish(args, report, ok)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plm",
        description="Exact moment-space certification and GMM demo for panel logit AR(p).",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_T=True):
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", default=None, help="report path (default: stdout)")
        p.add_argument("--format", choices=("json", "csv"), default="json")
        if needs_T:
            p.add_argument("--T", required=True, help="horizon or inclusive range a..b")

    p = sub.add_parser("rank", help="certify span ranks")
    common(p)
    p.add_argument("--p", type=int, default=1)
    p.add_argument("--init", default=None)
    p.add_argument("--beta0", action="store_true")
    p.add_argument("--c", nargs="*", default=None, help="c values as p/q strings")
    p.add_argument("--b", nargs="*", default=None, help="b values as p/q strings")
    p.add_argument("--force-sampled", dest="force_sampled", action="store_true")
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("basis", help="derive and validate a moment basis")
    common(p)
    p.add_argument("--p", type=int, default=1)
    p.add_argument("--init", default=None)
    p.add_argument("--beta0", action="store_true")
    p.add_argument("--c", nargs="*", default=None)
    p.add_argument("--b", nargs="*", default=None)
    p.add_argument("--fresh", type=int, default=50)
    p.set_defaults(func=cmd_basis)

    p = sub.add_parser("dims", help="dimension grid vs expected formulas")
    common(p, needs_T=False)
    p.add_argument("--T", default=None, help="horizon range (with --p)")
    p.add_argument("--p", type=int, default=None, help="omit to run the standard grid")
    p.add_argument("--init", default=None)
    p.add_argument("--beta0", action="store_true")
    p.set_defaults(func=cmd_dims)

    p = sub.add_parser("patterns", help="special covariate pattern surplus (p=2)")
    common(p)
    p.set_defaults(func=cmd_patterns)

    p = sub.add_parser("stacked", help="rank stacked across covariate paths (p=1)")
    common(p)
    p.add_argument("--x-draws", dest="x_draws", type=int, default=2)
    p.set_defaults(func=cmd_stacked)

    p = sub.add_parser("lemma1", help="determinant/rank checks of the 2T-column selection")
    common(p)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--selections", type=int, default=20)
    p.set_defaults(func=cmd_lemma1)

    p = sub.add_parser("poly", help="polynomial-route rank and degree bounds")
    common(p)
    p.add_argument("--p", type=int, default=1)
    p.add_argument("--init", default=None)
    p.add_argument("--c", nargs="*", default=None)
    p.set_defaults(func=cmd_poly)

    for name, fn in (("simulate", cmd_simulate), ("estimate", cmd_estimate)):
        p = sub.add_parser(name)
        common(p)
        p.add_argument("--p", type=int, default=1)
        p.add_argument("--init", default=None)
        p.add_argument("--N", type=int, default=1000)
        p.add_argument("--gamma", type=float, nargs="+", default=[0.5])
        p.add_argument("--alpha-sd", dest="alpha_sd", type=float, default=1.0)
        p.set_defaults(func=fn)

    p = sub.add_parser("mc", help="Monte Carlo bias/RMSE table")
    common(p)
    p.add_argument("--p", type=int, default=1)
    p.add_argument("--init", default=None)
    p.add_argument("--N", type=int, nargs="+", default=[500, 2000])
    p.add_argument("--gamma", type=float, nargs="+", default=[0.5])
    p.add_argument("--alpha-sd", dest="alpha_sd", type=float, default=1.0)
    p.add_argument("--reps", type=int, default=200)
    p.set_defaults(func=cmd_mc)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
