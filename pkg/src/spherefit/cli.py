"""Command-line entry point: fit, cv, simulate, diagnose, quadrature.

Numerical outputs go to files; stdout carries a short human-readable
summary. Exit codes: 0 success, 1 usage error, 2 runtime error. A JSON
config file can prefill any flag (CLI values win).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import experiments
from .estimator import LabeledData, fit_ki, fit_wsf, save_model
from .filters import FilterSpec, landweber
from .geometry import PointSet, load_points, load_tdesign, rotated_design, sample_random
from .kernels import get_kernel, kernel_matrix, target_function
from .model_selection import ParameterGrid, default_grid, select_parameter, split_data
from .numerics import sym_eig
from .quadrature import (
    compute_weights,
    design_rule,
    load_rule,
    max_feasible_degree,
    save_rule,
)


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _add_sampler_flags(p):
    p.add_argument("--points", help="point file (x y z [value] rows)")
    p.add_argument("--latlon", help="lat/lon CSV for real data")
    p.add_argument("--value-col", default="value", help="value column in --latlon")
    p.add_argument("--sampler", choices=["random", "tdesign", "rotation"])
    p.add_argument("--n", type=int, help="point count for --sampler random")
    p.add_argument("--t", type=int, help="design strength for --sampler tdesign")
    p.add_argument("--k", type=int, help="rotation count for --sampler rotation")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--noise-delta", type=float, default=0.0,
                   help="synthetic noise level for sampled targets")


def _add_quad_flags(p):
    p.add_argument("--quad-degree", default="auto",
                   help="quadrature degree, or 'auto' for the mesh-norm hint")
    p.add_argument("--quad-cache", help="reuse/write a quadrature rule CSV")


def build_parser():
    parser = _Parser(prog="spherefit", description=__doc__.splitlines()[0])
    parser.add_argument("--config", help="JSON file prefilling flags per subcommand")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="fit one model and predict")
    _add_sampler_flags(p)
    _add_quad_flags(p)
    p.add_argument("--kernel", default="wendland_4_1")
    p.add_argument("--method", choices=["ki", "wsf"], default=None)
    p.add_argument("--filter", choices=["tikhonov", "landweber", "cutoff"])
    p.add_argument("--param", type=float, help="filter parameter")
    p.add_argument("--param-l", type=int, help="landweber iteration count")
    p.add_argument("--eval-points", help="points to predict at (x y z rows)")
    p.add_argument("--clamp-nonnegative", action="store_true",
                   help="truncate negative predictions at zero")
    p.add_argument("--model-out", help="write the fitted model CSV here")
    p.add_argument("--out", default="predictions.csv")

    p = sub.add_parser("cv", help="cross-validate the filter parameter")
    _add_sampler_flags(p)
    _add_quad_flags(p)
    p.add_argument("--kernel", default="wendland_4_1")
    p.add_argument("--filter", required=True,
                   choices=["tikhonov", "landweber", "cutoff"])
    p.add_argument("--grid", default="auto", help="'auto' or comma-separated values")
    p.add_argument("--val-points", help="explicit validation point file")
    p.add_argument("--val-t", type=int, help="validation design strength")
    p.add_argument("--split", type=float, help="random train fraction instead")
    p.add_argument("--folds", type=int, help="plain k-fold CV (real data)")
    p.add_argument("--model-out")
    p.add_argument("--out", default="cv_scores.csv")

    p = sub.add_parser("simulate", help="run one experiment scenario")
    p.add_argument("--scenario", required=True, choices=list(experiments.SCENARIOS))
    p.add_argument("--sampler", action="append",
                   choices=["random", "tdesign", "rotation"],
                   help="override scenario samplers (repeatable)")
    p.add_argument("--delta", type=float, action="append",
                   help="noise level (repeatable)")
    p.add_argument("--sizes", help="comma-separated t values / sizes / copies")
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--timing", action="store_true",
                   help="record wall times (breaks byte-identical reruns)")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--dump-dir", help="prediction dump directory (sim6)")
    p.add_argument("--out", default="results.csv")

    p = sub.add_parser("diagnose", help="conditioning report for a point set")
    _add_sampler_flags(p)
    p.add_argument("--kernel", default="wendland_4_1")
    p.add_argument("--out", help="optional CSV for the spectrum")

    p = sub.add_parser("quadrature", help="compute positive quadrature weights")
    _add_sampler_flags(p)
    p.add_argument("--degree", default="auto")
    p.add_argument("--out", default="rule.csv")
    return parser


def _apply_config(args, argv):
    if not args.config:
        return args
    table = json.loads(Path(args.config).read_text())
    section = table.get(args.command, table)
    explicit = {a.split("=")[0].lstrip("-").replace("-", "_")
                for a in argv if a.startswith("--")}
    for key, value in section.items():
        attr = key.replace("-", "_")
        if attr in explicit or not hasattr(args, attr):
            continue
        setattr(args, attr, value)
    return args


def _load_labeled(args):
    """Labeled training data from whichever input flags were given."""
    if args.latlon:
        return experiments.ingest_latlon_csv(args.latlon, args.value_col)
    if args.points:
        raw = np.loadtxt(args.points, comments="#", ndmin=2)
        if raw.shape[1] == 4:
            return LabeledData(points=PointSet(raw[:, :3]), values=raw[:, 3])
        if raw.shape[1] != 3:
            raise ValueError(f"{args.points}: expected 3 or 4 columns")
        points = PointSet(raw)
    elif args.sampler == "random":
        if not args.n:
            raise _UsageError("--sampler random needs --n")
        points = sample_random(args.n, args.seed)
    elif args.sampler == "tdesign":
        if not args.t:
            raise _UsageError("--sampler tdesign needs --t")
        points = load_tdesign(experiments.design_path(args.t), args.t)
    elif args.sampler == "rotation":
        if args.k is None:
            raise _UsageError("--sampler rotation needs --k")
        base = experiments.load_design(15, drop_poles=True)
        points = rotated_design(base, args.k)
    else:
        raise _UsageError("need --points, --latlon, or --sampler")
    clean = target_function(points)
    noise = experiments.gen_noise(
        experiments.NoiseSpec(std_dev=args.noise_delta, seed=args.seed), len(points)
    )
    return LabeledData(points=points, values=clean + noise, clean_values=clean)


def _rule_for(args, data):
    if getattr(args, "quad_cache", None) and Path(args.quad_cache).exists():
        rule = load_rule(args.quad_cache)
        if not np.array_equal(rule.points.coords, data.points.coords):
            raise ValueError("cached rule was built on different points")
        return rule
    if args.sampler == "tdesign" and args.t and str(args.quad_degree) == "auto":
        rule = design_rule(data.points, args.t)
    else:
        degree = (max_feasible_degree(data.points)
                  if str(args.quad_degree) == "auto" else int(args.quad_degree))
        rule = compute_weights(data.points, degree)
    if getattr(args, "quad_cache", None):
        save_rule(rule, args.quad_cache)
    return rule


def _filter_spec(args):
    if args.param_l is not None:
        return landweber(args.param_l)
    if not args.filter or args.param is None:
        raise _UsageError("wsf fitting needs --filter and --param (or --param-l)")
    return FilterSpec(args.filter, args.param)


def _cmd_fit(args):
    data = _load_labeled(args)
    kernel = get_kernel(args.kernel)
    if args.method == "ki" or (args.method is None and not args.filter
                               and args.param_l is None):
        model = fit_ki(data, kernel)
    else:
        rule = _rule_for(args, data)
        model = fit_wsf(data, kernel, rule, _filter_spec(args))
    if args.model_out:
        save_model(model, args.model_out)
    summary = f"fitted {model.method_tag} on {len(data)} points"
    if model.diagnostics.cnkm is not None:
        summary += f" (cnkm {model.diagnostics.cnkm:.3e})"
    print(summary)
    if args.eval_points:
        queries = load_points(args.eval_points)
        pred = model.predict(queries)
        if args.clamp_nonnegative:
            pred = experiments.clamp_nonnegative(pred)
        with Path(args.out).open("w") as fh:
            fh.write("x,y,z,prediction\n")
            for (x, y, z), p in zip(queries.coords, pred):
                fh.write(f"{x:.12g},{y:.12g},{z:.12g},{p:.12g}\n")
        print(f"wrote {len(pred)} predictions to {args.out}")
    return 0


def _parse_grid(args, n, family):
    if args.grid == "auto":
        return default_grid(n, family)
    values = sorted((float(v) for v in args.grid.split(",")), reverse=True)
    return ParameterGrid(tuple(values), family)


def _cmd_cv(args):
    data = _load_labeled(args)
    kernel = get_kernel(args.kernel)
    family = args.filter
    if args.folds:
        grid = _parse_grid(args, len(data), family)
        lam, scores = experiments.kfold_select_parameter(
            data, kernel, family, grid=grid, folds=args.folds, seed=args.seed
        )
        chosen = {"lambda": lam}
        score_rows = zip(grid.candidates, scores)
        print(f"{family}: {args.folds}-fold choice lambda={lam:g}")
    else:
        if args.val_points:
            val_pts = load_points(args.val_points)
            val_clean = target_function(val_pts)
            noise = experiments.gen_noise(
                experiments.NoiseSpec(std_dev=args.noise_delta,
                                      seed=args.seed + 1),
                len(val_pts),
            )
            val = LabeledData(points=val_pts, values=val_clean + noise)
            train = data
        elif args.val_t:
            val_pts = experiments.load_design(args.val_t)
            val_clean = target_function(val_pts)
            noise = experiments.gen_noise(
                experiments.NoiseSpec(std_dev=args.noise_delta,
                                      seed=args.seed + 1),
                len(val_pts),
            )
            val = LabeledData(points=val_pts, values=val_clean + noise)
            train = data
        else:
            fraction = args.split if args.split is not None else 0.5
            train, val = split_data(data, fraction, args.seed)
        val_rule = compute_weights(val.points, max_feasible_degree(val.points))
        train_rule = _rule_for(args, train)
        grid = _parse_grid(args, len(train), family)
        result = select_parameter(
            train, val, val_rule, kernel, family, grid=grid,
            train_rule=train_rule,
        )
        chosen = {"lambda": result.chosen_lambda}
        score_rows = zip(grid.candidates, result.weighted_scores)
        print(
            f"{family}: chose lambda={result.chosen_lambda:g} over "
            f"{len(grid)} candidates (train {result.train_size}, "
            f"val {result.val_size})"
        )
        if args.model_out and result.chosen_model is not None:
            save_model(result.chosen_model, args.model_out)
    with Path(args.out).open("w") as fh:
        fh.write("lambda,score,chosen\n")
        for lam, score in score_rows:
            fh.write(f"{lam:.12g},{score:.12g},{int(lam == chosen['lambda'])}\n")
    return 0


def _cmd_simulate(args):
    overrides = {"timing": args.timing, "threads": args.threads}
    if args.sampler:
        overrides["samplers"] = tuple(args.sampler)
    if args.delta:
        overrides["deltas"] = tuple(args.delta)
    if args.trials is not None:
        overrides["trials"] = args.trials
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.dump_dir:
        overrides["dump_dir"] = args.dump_dir
    if args.sizes:
        sizes = tuple(int(v) for v in args.sizes.split(","))
        samplers = overrides.get(
            "samplers", experiments.default_config(args.scenario).samplers
        )
        if "tdesign" in samplers:
            overrides["tdesign_ts"] = sizes
        if "random" in samplers:
            overrides["random_sizes"] = sizes
        if "rotation" in samplers:
            overrides["rotation_copies"] = sizes
    config = experiments.default_config(args.scenario, **overrides)
    records = experiments.run_scenario(args.scenario, config)
    experiments.write_records(records, args.out)
    n_avg = sum(1 for r in records if r.trial == -1)
    print(f"{args.scenario}: wrote {len(records)} records "
          f"({n_avg} averaged rows) to {args.out}")
    return 0


def _cmd_diagnose(args):
    data = _load_labeled(args)
    kernel = get_kernel(args.kernel)
    phi = kernel_matrix(kernel, data.points)
    eig = sym_eig(phi)
    vals = eig.eigenvalues
    floor = np.finfo(float).eps * max(float(vals[0]), 0.0)
    cnkm = float(vals[0] / max(vals[-1], floor)) if vals[0] > 0 else float("inf")
    print(f"n={len(data)} sigma_max={vals[0]:.6e} sigma_min={vals[-1]:.6e} "
          f"cnkm={cnkm:.6e}")
    stats = data.points.stats()
    print(f"mesh_norm={stats.mesh_norm:.4f} separation={stats.separation_radius:.4f} "
          f"mesh_ratio={stats.mesh_ratio:.2f}")
    if args.out:
        with Path(args.out).open("w") as fh:
            fh.write("index,eigenvalue\n")
            for i, v in enumerate(vals):
                fh.write(f"{i},{v:.12g}\n")
        print(f"wrote spectrum to {args.out}")
    return 0


def _cmd_quadrature(args):
    data = _load_labeled(args)
    if args.sampler == "tdesign" and args.t and str(args.degree) == "auto":
        rule = design_rule(data.points, args.t)
    elif str(args.degree) == "auto":
        rule = compute_weights(data.points, max_feasible_degree(data.points))
    else:
        rule = compute_weights(data.points, int(args.degree))
    save_rule(rule, args.out)
    print(f"degree {rule.degree} rule on {len(rule.points)} points -> {args.out} "
          f"(clamped {rule.clamped_count})")
    return 0


_COMMANDS = {
    "fit": _cmd_fit,
    "cv": _cmd_cv,
    "simulate": _cmd_simulate,
    "diagnose": _cmd_diagnose,
    "quadrature": _cmd_quadrature,
}


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        args = _apply_config(args, argv)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return 1
    except SystemExit as exc:  # --help and friends
        code = exc.code if exc.code is not None else 0
        return 0 if code == 0 else 1
    try:
        return _COMMANDS[args.command](args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
