"""Command-line interface: ``depthstat {depth,two-sample,fofr,power,gen}``.

Every option can also come from a YAML or JSON file passed with
``--config``; explicit flags override the file, and the file overrides the
built-in defaults.  Option names in the file are the long flag names with
dashes or underscores (``B``, ``reps``, ``u``, ``grid``, ...).
"""

import argparse
import csv
import io
import sys

import numpy as np
import yaml

from .depth import DEPTH_KINDS, KERNELS, DepthSpec, evaluate_depths
from .errors import DepthStatError, UsageError
from .fofr import FOFR_METHODS, FoFRData, fofr_bootstrap, fofr_tests
from .funcspace import FunctionalSample, check_same_grid, make_grid
from .inference import REFERENCES
from .io import dump_report, emit_csv, format_real, ingest_csv, report_document
from .power import PowerConfig, default_workers, power_table_csv, run_power
from .rng import stream
from .simgen import SCORE_KINDS, SHAPES, make_fofr_scenario, two_sample_scenario
from .svg import ensemble_overlay_svg, rate_curves_svg
from .twosample import (
    TWO_SAMPLE_METHODS,
    TwoSampleData,
    default_depth_spec,
    residual_bootstrap_two,
    two_sample_statistic,
    two_sample_tests,
)

__all__ = ["main", "build_parser", "parse_methods", "parse_u", "load_config"]

# options that never influence results and are therefore not echoed into reports
_NOT_ECHOED = {"command", "config", "out", "svg", "workers", "func"}


def parse_methods(text, allowed):
    methods = [m.strip().upper() for m in str(text).split(",") if m.strip()]
    if not methods:
        raise UsageError("no methods given")
    for m in methods:
        if m not in allowed:
            raise UsageError(f"unknown method {m!r}; expected some of {','.join(allowed)}")
    return methods


def parse_u(text):
    """``"0.05"`` (every quantile-tuned depth) or ``"KD=0.01,RHD=0.1"`` -> dict or float."""
    if text is None:
        return None
    text = str(text).strip()
    if "=" not in text:
        return float(text)
    out = {}
    for part in text.split(","):
        k, _, v = part.partition("=")
        k = k.strip().upper()
        if k not in ("KD", "RHD"):
            raise UsageError(f"--u key must be KD or RHD, got {k!r}")
        out[k] = float(v)
    return out


def _u_for(u, kind):
    if u is None:
        return None
    if isinstance(u, dict):
        return u.get(kind)
    return u


def _depth_specs(args, methods, problem):
    u = parse_u(args.u)
    specs = {}
    for m in methods:
        if m not in DEPTH_KINDS:
            continue
        base = default_depth_spec(m, problem)
        uu = _u_for(u, m)
        specs[m] = DepthSpec(
            m,
            quantile_u=base.quantile_u if uu is None else uu,
            kernel=args.kernel,
            projections_M=args.projections,
        )
    return specs


def load_config(path):
    """Read a YAML/JSON mapping of option names to values."""
    with open(path, encoding="utf-8") as fh:
        data = yaml.safe_load(fh)
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise UsageError(f"config file {path} must hold a mapping")
    return {str(k).replace("-", "_"): v for k, v in data.items()}


def _echo(args):
    return {k: v for k, v in sorted(vars(args).items()) if k not in _NOT_ECHOED}


def _write(text, path):
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _common(p, B=True):
    p.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    if B:
        p.add_argument("--B", type=int, default=1000, help="bootstrap replicates (default 1000)")
    p.add_argument("--u", default=None,
                   help="depth quantile level: one value, or KD=..,RHD=.. (default: problem-specific)")
    p.add_argument("--kernel", default="gaussian", choices=sorted(KERNELS))
    p.add_argument("--projections", type=int, default=500, help="RHD random directions (default 500)")
    p.add_argument("--out", default=None, help="output path (default stdout)")
    p.add_argument("--workers", type=int, default=None,
                   help="worker processes (default from DEPTHSTAT_WORKERS, else 1)")
    p.add_argument("--config", default=None, help="YAML/JSON file with option defaults")


def build_parser():
    parser = argparse.ArgumentParser(prog="depthstat", description="Depth-based bootstrap tests for functional data.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("depth", help="depths of curves w.r.t. a reference sample")
    p.add_argument("data", help="CSV of query curves")
    p.add_argument("--reference", dest="ensemble", default=None, help="CSV of reference curves (default: data)")
    p.add_argument("--method", default="KD", help=f"one of {','.join(DEPTH_KINDS)}")
    _common(p, B=False)
    p.set_defaults(func=cmd_depth)

    p = sub.add_parser("two-sample", help="two-sample mean test on a labelled CSV")
    p.add_argument("data", help="CSV with a leading 'group' column holding two labels")
    p.add_argument("--method", default=",".join(TWO_SAMPLE_METHODS))
    p.add_argument("--reference", choices=REFERENCES, default="leave-one-out",
                   help="scoring of bootstrap statistics for depth p-values")
    p.add_argument("--smoothed", action="store_true", help="use (count+1)/(B+1) p-values")
    p.add_argument("--svg", default=None, help="write an observed-vs-bootstrap overlay plot")
    _common(p)
    p.set_defaults(func=cmd_two_sample)

    p = sub.add_parser("fofr", help="mean-response test in function-on-function regression")
    p.add_argument("x", help="CSV of regressor curves")
    p.add_argument("y", help="CSV of response curves")
    p.add_argument("x0", help="CSV holding the new regressor curve (one row)")
    p.add_argument("--method", default=",".join(FOFR_METHODS))
    p.add_argument("--folds", type=int, default=5, help="cross-validation folds (default 5)")
    p.add_argument("--rho", type=float, default=0.85, help="FVE threshold (default 0.85)")
    p.add_argument("--max-J", type=int, default=20, help="largest candidate truncation (default 20)")
    p.add_argument("--reference", choices=REFERENCES, default="leave-one-out")
    p.add_argument("--smoothed", action="store_true")
    p.add_argument("--svg", default=None)
    _common(p)
    p.set_defaults(func=cmd_fofr)

    p = sub.add_parser("power", help="Monte Carlo size/power study")
    p.add_argument("--problem", choices=("two-sample", "fofr"), default="two-sample")
    p.add_argument("--method", default=None, help="methods (default: all for the problem)")
    p.add_argument("--reps", type=int, default=1000, help="Monte Carlo replicates (default 1000)")
    p.add_argument("--c", default="0,0.2,0.4,0.6,0.8,1", help="comma-separated alternative scales")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--grid", type=int, default=50, help="equispaced grid size (default 50)")
    p.add_argument("--n", type=int, default=50, help="total sample size (default 50)")
    p.add_argument("--scores", choices=SCORE_KINDS, default="NN")
    p.add_argument("--shape", choices=SHAPES, default="Cub")
    p.add_argument("--eigenvalues", choices=("equal", "unequal"), default="equal")
    p.add_argument("--eigenfunctions", choices=("equal", "unequal"), default="equal")
    p.add_argument("--aX", type=float, default=2.5)
    p.add_argument("--aE", type=float, default=2.5)
    p.add_argument("--b", type=float, default=1.5)
    p.add_argument("--reference", choices=REFERENCES, default="leave-one-out")
    p.add_argument("--svg", default=None, help="write rejection-rate curves")
    _common(p)
    p.set_defaults(func=cmd_power)

    p = sub.add_parser("gen", help="emit simulated scenario data as CSV")
    p.add_argument("--problem", choices=("two-sample", "fofr"), default="two-sample")
    p.add_argument("--grid", type=int, default=50)
    p.add_argument("--n", type=int, default=50)
    p.add_argument("--c", type=float, default=0.0)
    p.add_argument("--scores", choices=SCORE_KINDS, default="NN")
    p.add_argument("--shape", choices=SHAPES, default="Cub")
    p.add_argument("--eigenvalues", choices=("equal", "unequal"), default="equal")
    p.add_argument("--eigenfunctions", choices=("equal", "unequal"), default="equal")
    p.add_argument("--aX", type=float, default=2.5)
    p.add_argument("--aE", type=float, default=2.5)
    p.add_argument("--b", type=float, default=1.5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None,
                   help="output path; for fofr a prefix for PREFIX_X.csv, PREFIX_Y.csv, PREFIX_x0.csv")
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--config", default=None)
    p.set_defaults(func=cmd_gen)
    return parser


def cmd_depth(args):
    kind = parse_methods(args.method, DEPTH_KINDS)
    if len(kind) != 1:
        raise UsageError("depth takes exactly one method")
    kind = kind[0]
    data = ingest_csv(args.data)
    ens = data if args.ensemble is None else ingest_csv(args.ensemble)
    check_same_grid(data.grid, ens.grid)
    spec = _depth_specs(args, [kind], "two-sample")[kind]
    values, keys = evaluate_depths(data.values, ens, spec, rng=stream(args.seed, "dirs"))
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["curve", "depth", "tiebreak_key"])
    for i, v in enumerate(values):
        w.writerow([i + 1, format_real(v), "" if keys is None else format_real(keys[i])])
    _write(out.getvalue(), args.out)
    return 0


def _two_sample_data(sample):
    if sample.labels is None:
        raise UsageError("two-sample input needs a leading 'group' column")
    return TwoSampleData.from_labeled(sample)


def cmd_two_sample(args):
    methods = parse_methods(args.method, TWO_SAMPLE_METHODS)
    d = _two_sample_data(ingest_csv(args.data))
    specs = _depth_specs(args, methods, "two-sample")
    reports = two_sample_tests(
        d, methods, args.B, specs, rng=args.seed, smoothed=args.smoothed, reference=args.reference
    )
    _write(dump_report(report_document("two-sample", reports, _echo(args))), args.out)
    if args.svg:
        ens = residual_bootstrap_two(d, args.B, args.seed).statistics.values
        obs = two_sample_statistic(d).values
        _write(ensemble_overlay_svg(d.grid.points, ens, obs, "two-sample statistic vs bootstrap"), args.svg)
    return 0


def cmd_fofr(args):
    methods = parse_methods(args.method, FOFR_METHODS)
    X, Y, x0 = ingest_csv(args.x), ingest_csv(args.y), ingest_csv(args.x0)
    try:
        check_same_grid(X.grid, Y.grid)
        check_same_grid(X.grid, x0.grid)
    except DepthStatError as exc:
        raise UsageError(f"input grids differ: {exc}") from None
    if len(x0) != 1:
        raise UsageError(f"x0 file must hold exactly one curve, found {len(x0)}")
    d = FoFRData(X, Y, x0[0])
    specs = _depth_specs(args, methods, "fofr")
    reports, fit = fofr_tests(
        d, methods, args.B, specs, rng=args.seed, candidates=range(1, args.max_J + 1), G=args.folds,
        rho=args.rho, smoothed=args.smoothed, reference=args.reference,
    )
    _write(dump_report(report_document("fofr", reports, _echo(args))), args.out)
    if args.svg:
        from .fofr import fofr_statistic

        ens = fofr_bootstrap(d, fit, args.B, stream(args.seed, "boot")).statistics.values
        obs = fofr_statistic(d, fit).values
        _write(ensemble_overlay_svg(d.grid.points, ens, obs, "FoFR statistic vs bootstrap"), args.svg)
    return 0


def cmd_power(args):
    methods = TWO_SAMPLE_METHODS if args.problem == "two-sample" else FOFR_METHODS
    if args.method is not None:
        methods = parse_methods(args.method, methods)
    u = parse_u(args.u)
    cfg = PowerConfig(
        problem=args.problem, methods=tuple(methods),
        c_values=tuple(float(c) for c in str(args.c).split(",") if c.strip()),
        reps=args.reps, B=args.B, alpha=args.alpha, seed=args.seed, grid_size=args.grid, n=args.n,
        scores=args.scores, shape=args.shape, eigenvalues=args.eigenvalues,
        eigenfunctions=args.eigenfunctions, aX=args.aX, aE=args.aE, b=args.b,
        u_kd=_u_for(u, "KD"), u_rhd=_u_for(u, "RHD"), kernel=args.kernel,
        projections_M=args.projections, reference=args.reference,
    )
    workers = default_workers() if args.workers is None else args.workers
    result = run_power(cfg, workers=workers)
    _write(power_table_csv(result), args.out)
    if args.svg:
        series = {m: [result.rate(c, m) for c in cfg.c_values] for m in cfg.methods}
        _write(rate_curves_svg(list(cfg.c_values), series, cfg.scenario, alpha=cfg.alpha), args.svg)
    return 0


def cmd_gen(args):
    grid = make_grid(args.grid)
    rng = stream(args.seed, "data", 0)
    if args.problem == "two-sample":
        d = two_sample_scenario(grid, args.n, args.shape, args.c, args.scores, args.eigenvalues,
                                args.eigenfunctions, rng=rng)
        labels = ("1",) * d.n1 + ("2",) * d.n2
        sample = FunctionalSample(grid, np.vstack([d.group1.values, d.group2.values]), labels)
        _write(emit_csv(sample), args.out)
        return 0
    if args.out is None:
        raise UsageError("fofr generation needs --out PREFIX")
    sc = make_fofr_scenario(grid, args.aX, args.aE, args.b, args.c, args.n, args.scores, rng=rng)
    emit_csv(sc.data.X, f"{args.out}_X.csv")
    emit_csv(sc.data.Y, f"{args.out}_Y.csv")
    emit_csv(FunctionalSample(grid, sc.data.x0.values[None, :]), f"{args.out}_x0.csv")
    return 0


def main(argv=None):
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    args = parser.parse_args(argv)
    if args.config:
        try:
            conf = load_config(args.config)
        except (OSError, yaml.YAMLError, DepthStatError) as exc:
            parser.exit(2, f"depthstat: error: cannot read config: {exc}\n")
        sub = parser._subparsers._group_actions[0].choices[args.command]
        known = {a.dest for a in sub._actions}
        unknown = sorted(set(conf) - known)
        if unknown:
            parser.exit(2, f"depthstat: error: unknown config keys: {', '.join(unknown)}\n")
        sub.set_defaults(**conf)
        args = parser.parse_args(argv)
    if getattr(args, "workers", None) is not None and args.workers < 1:
        parser.exit(2, "depthstat: error: --workers must be positive\n")
    try:
        return args.func(args)
    except DepthStatError as exc:
        sys.stderr.write(f"depthstat: error: {exc}\n")
        return 1
    except OSError as exc:
        sys.stderr.write(f"depthstat: error: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
