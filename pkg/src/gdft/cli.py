"""Command-line front end.

    gdft <command> --config PATH --out PATH [--seed N] [--multistarts N]
                   [--eps-list a,b,c] [--figures]

Exit codes: 0 success, 1 configuration error, 2 numerical failure,
3 infeasible request.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
import warnings
from pathlib import Path

import numpy as np

from .errors import ConfigParseError, GdftError, NotAbelian
from .search import SearchOptions, options_from_env

COMMANDS = ("domain", "functional-grid", "gradfield", "boundary-force", "kirwan", "verify")
LIE_KINDS = ("lie", "dimer")
EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_INFEASIBLE = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    """Usage errors are configuration errors (exit 1)."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="gdft", description="Generalized density functional toolkit.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", help="theory config (JSON)")
    p.add_argument("--out", help="output path (JSON or CSV depending on the command)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--multistarts", type=int, default=None)
    p.add_argument("--eps-list", default=None, help="comma-separated eps values for boundary-force")
    p.add_argument("--figures", action="store_true", help="also render a PNG next to --out (needs matplotlib)")
    p.add_argument("--criteria", default=None, help="verify only: comma-separated criterion numbers")
    return p


# ---------------------------------------------------------------- manifest


def load_manifest(path: str) -> tuple[dict, dict]:
    """Read a config file; returns (theory config, params).

    The file is either a bare theory config with an optional "params"
    object, or {"theory": {...}, "params": {...}}.
    """
    p = Path(path)
    if not p.is_file():
        raise ConfigParseError(f"config file {path!r} does not exist")
    try:
        data = json.loads(p.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigParseError(f"{path}: invalid JSON ({exc})") from exc
    if not isinstance(data, dict):
        raise ConfigParseError(f"{path}: top level must be an object")
    if "theory" in data:
        theory, params = data["theory"], data.get("params", {})
    else:
        theory = {k: v for k, v in data.items() if k != "params"}
        params = data.get("params", {})
    if not isinstance(theory, dict) or not isinstance(params, dict):
        raise ConfigParseError("theory and params must be objects")
    return theory, params


def parse_eps_list(text: str) -> list[float]:
    try:
        eps = [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise ConfigParseError(f"bad --eps-list {text!r}") from exc
    if not eps or min(eps) <= 0:
        raise ConfigParseError("--eps-list needs positive values")
    return sorted(eps)


def search_options(args, params: dict) -> SearchOptions:
    overrides = {"seed": args.seed}
    if args.multistarts is not None:
        overrides["multistarts"] = args.multistarts
    for key in ("near_facet_multistarts", "max_iters", "constraint_tol", "value_tol", "early_stop"):
        if key in params:
            overrides[key] = type(getattr(SearchOptions, key))(params[key])
    try:
        return options_from_env(**overrides)
    except (TypeError, ValueError) as exc:
        raise ConfigParseError(f"invalid search options: {exc}") from exc


# ---------------------------------------------------------------- output


def fmt(x: float) -> str:
    """Full-precision scientific notation (17 significant digits)."""
    return f"{float(x):.16e}"


def atomic_write(path: str | Path, text: str):
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    return obj


def write_json(path, obj):
    atomic_write(path, json.dumps(_jsonable(obj), indent=2) + "\n")


def write_csv(path, header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(x) if isinstance(x, (float, np.floating)) else x for x in row])
    atomic_write(path, buf.getvalue())


# ---------------------------------------------------------------- domains


def _lie_setup(theory_cfg: dict):
    from .core import build_theory
    from .liegroup import algebra_from_config

    return algebra_from_config(theory_cfg), build_theory(theory_cfg)


def _domain(theory_cfg: dict, seed: int):
    """(theory, polytope, weights, embed) where embed maps polytope points to densities."""
    from .abelian import representable_polytope, weight_decomposition
    from .core import build_theory

    if theory_cfg.get("kind") in LIE_KINDS:
        from .liegroup import kirwan_polytope, rep_weights

        alg, theory = _lie_setup(theory_cfg)
        kir = kirwan_polytope(alg, seed=seed)
        n_full = theory.n_params

        def embed(p):
            return np.concatenate([np.asarray(p, dtype=float), np.zeros(n_full - alg.rank)])

        return theory, kir.polytope, rep_weights(alg).weights, embed
    theory = build_theory(theory_cfg)
    try:
        wd = weight_decomposition(theory)
    except NotAbelian as exc:
        raise ConfigParseError("domain, grid and gradfield commands need an abelian or Lie theory") from exc
    return theory, representable_polytope(wd), wd.weights, lambda p: np.asarray(p, dtype=float)


def cmd_domain(args, theory_cfg, params):
    from .abelian import weight_decomposition

    theory, poly, weights, _ = _domain(theory_cfg, args.seed)
    out = poly.to_dict()
    out["dim"] = poly.dim
    out["ambient_dim"] = poly.ambient_dim
    for ineq, f in zip(out["inequalities"], poly.inequalities):
        if f.lattice is not None:
            ineq["lattice"] = {"n": list(f.lattice[0]), "nu": f.lattice[1]}
    if theory_cfg.get("kind") not in LIE_KINDS:
        wd = weight_decomposition(theory)
        out["weights"] = [{"omega": list(w), "multiplicity": int(m)} for w, m in zip(wd.weights, wd.multiplicities)]
    if theory_cfg.get("kind") == "bosonic":
        from .bosonic import enumerate_permanents

        out["permanents"] = [list(m) for m in enumerate_permanents(
            int(theory_cfg["d"]), int(theory_cfg["N"]), int(theory_cfg.get("P", 0)))]
    write_json(args.out, out)
    if args.figures:
        from .report import figure_path, plot_domain

        plot_domain(poly, weights, figure_path(args.out), title=_title(theory_cfg))
    return EXIT_OK


def _title(cfg: dict) -> str:
    return ", ".join(f"{k}={v}" for k, v in cfg.items() if not isinstance(v, (dict, list)))


# ---------------------------------------------------------------- grids


def _grid_points(poly, params: dict, margin: float):
    from .grid import polytope_grid

    if "points" in params:
        pts = np.array(params["points"], dtype=float)
        if pts.ndim != 2 or pts.shape[1] != poly.ambient_dim:
            raise ConfigParseError(f"params.points must be a list of {poly.ambient_dim}-component densities")
        return pts
    return polytope_grid(poly, int(params.get("steps", 8)), margin)


def _evaluate_point(task):
    """Worker entry point: (theory, density, functional, opts) -> (value, residual, converged, error, code)."""
    theory, rho, functional, opts = task
    from .search import ensemble_functional, pure_functional

    fn = ensemble_functional if functional == "ensemble" else pure_functional
    try:
        res = fn(theory, rho, opts)
    except GdftError as exc:
        return math.nan, math.nan, 0, f"{type(exc).__name__}: {exc}", exc.exit_code
    return res.value, res.constraint_residual, res.starts_converged, "", EXIT_OK


def _fan_out(tasks, workers: int):
    """Evaluate in a process pool; results keep the task order."""
    if workers <= 1 or len(tasks) < 2:
        return [_evaluate_point(t) for t in tasks]
    from concurrent.futures import ProcessPoolExecutor

    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_evaluate_point, tasks))


def _inner(opts: SearchOptions) -> SearchOptions:
    from dataclasses import replace

    return replace(opts, workers=1)


def _report_failures(results, points) -> int:
    """Log failed points; the exit code is numeric if any failure is numeric, else infeasible."""
    codes = set()
    for p, r in zip(points, results):
        if r[3]:
            print(f"gdft: point {np.round(p, 6).tolist()} failed: {r[3]}", file=sys.stderr)
            codes.add(r[4])
    if not codes:
        return EXIT_OK
    return EXIT_NUMERIC if EXIT_NUMERIC in codes or EXIT_CONFIG in codes else EXIT_INFEASIBLE


def cmd_functional_grid(args, theory_cfg, params):
    theory, poly, _, embed = _domain(theory_cfg, args.seed)
    opts = search_options(args, params)
    functional = params.get("functional", "pure")
    if functional not in ("pure", "ensemble"):
        raise ConfigParseError("params.functional must be 'pure' or 'ensemble'")
    points = _grid_points(poly, params, float(params.get("margin", 0.0)))
    tasks = [(theory, embed(p), functional, _inner(opts)) for p in points]
    results = _fan_out(tasks, opts.workers)
    header = [f"rho{i}" for i in range(poly.ambient_dim)] + ["value", "residual", "starts_converged"]
    rows = [list(map(float, p)) + [float(r[0]), float(r[1]), int(r[2])] for p, r in zip(points, results)]
    write_csv(args.out, header, rows)
    if args.figures:
        from .report import figure_path, plot_grid

        ok = [i for i, r in enumerate(results) if not r[3]]
        plot_grid(poly, points[ok], [results[i][0] for i in ok], figure_path(args.out),
                  f"F_{'e' if functional == 'ensemble' else 'p'}", _title(theory_cfg))
    return _report_failures(results, points)


def cmd_gradfield(args, theory_cfg, params):
    """F_p on an interior grid with |dF| from central differences along the domain."""
    theory, poly, _, embed = _domain(theory_cfg, args.seed)
    if poly.dim == 0:
        raise ConfigParseError("gradfield needs a domain of positive dimension")
    opts = search_options(args, params)
    extent = float(np.max(np.ptp(np.asarray(poly.vertices, dtype=float), axis=0)))
    h = float(params.get("h", 1e-3 * extent))
    if h <= 0:
        raise ConfigParseError("params.h must be positive")
    points = _grid_points(poly, params, max(float(params.get("margin", 0.0)), 1.5 * h))
    if len(points) == 0:
        raise ConfigParseError("no grid point is farther than 1.5 h from the boundary; lower steps or h")
    tangent = poly.tangent
    stencil = []
    for p in points:
        stencil.append(p)
        for k in range(poly.dim):
            stencil += [p + h * tangent[:, k], p - h * tangent[:, k]]
    tasks = [(theory, embed(p), "pure", _inner(opts)) for p in stencil]
    results = _fan_out(tasks, opts.workers)
    per = 1 + 2 * poly.dim
    rows = []
    failed = _report_failures(results, stencil)
    for i, p in enumerate(points):
        block = results[i * per:(i + 1) * per]
        grad = [(block[1 + 2 * k][0] - block[2 + 2 * k][0]) / (2 * h) for k in range(poly.dim)]
        rows.append(list(map(float, p)) + [float(block[0][0]), float(np.linalg.norm(grad))])
    header = [f"rho{i}" for i in range(poly.ambient_dim)] + ["F", "dF_abs"]
    write_csv(args.out, header, rows)
    if args.figures:
        from .report import figure_path, plot_grid

        vals = np.array([r[-1] for r in rows])
        ok = np.isfinite(vals)
        plot_grid(poly, points[ok], vals[ok], figure_path(args.out), "|dF_p|", _title(theory_cfg))
    return failed


# ---------------------------------------------------------------- boundary force


def _vector(params, key, default=None):
    if key not in params:
        if default is None:
            raise ConfigParseError(f"params.{key} is required")
        return np.asarray(default, dtype=float)
    return np.atleast_1d(np.asarray(params[key], dtype=float))


def _abelian_force(theory_cfg, params, opts):
    from .abelian import FacetInequality, representable_polytope, weight_decomposition
    from .boundary import abelian_boundary_force, make_query
    from .core import build_theory

    theory = build_theory(theory_cfg)
    wd = weight_decomposition(theory)
    poly = representable_polytope(wd)
    rho_star = _vector(params, "rho_star")
    if "S" in params:
        facet = FacetInequality(_vector(params, "S"), float(params["nu"]), normalized=False)
    elif "facet" in params:
        facet = poly.inequalities[int(params["facet"])]
    else:
        tight = poly.tight(rho_star, 1e-9)
        if len(tight) != 1:
            raise ConfigParseError(f"rho_star is on {len(tight)} facets; choose one with params.facet")
        facet = poly.inequalities[tight[0]]
    eta = _vector(params, "eta", facet.S)
    gamma = _vector(params, "gamma") if "gamma" in params else None
    query = make_query(facet, rho_star, eta, gamma)
    with warnings.catch_warnings(record=True):
        warnings.simplefilter("always", RuntimeWarning)
        result = abelian_boundary_force(theory, wd, query, opts=opts)
    return theory, query, result


def _lie_force(theory_cfg, params, opts):
    from .boundary import nonabelian_boundary_force, nonabelian_query

    alg, theory = _lie_setup(theory_cfg)
    if theory_cfg.get("kind") == "dimer":
        n = int(theory_cfg["N"])
        defaults = {"sigma": [-1.0], "c": -n, "rho_star": [float(n)], "eta": [-1.0]}
        params = {**defaults, **params}
    if "c" not in params:
        raise ConfigParseError("params.c is required")
    query = nonabelian_query(alg, _vector(params, "sigma"), float(params["c"]),
                             _vector(params, "rho_star"), _vector(params, "eta"))
    return theory, query, nonabelian_boundary_force(alg, theory, query, opts=opts)


def cmd_boundary_force(args, theory_cfg, params):
    from .boundary import DEFAULT_EPS, finite_difference_force

    opts = search_options(args, params)
    if args.eps_list:
        eps = parse_eps_list(args.eps_list)
    else:
        eps = sorted(float(e) for e in params.get("eps_list", DEFAULT_EPS))
    model = params.get("fit_model", "sqrt+linear")
    if theory_cfg.get("kind") in LIE_KINDS:
        theory, query, result = _lie_force(theory_cfg, params, opts)
    else:
        theory, query, result = _abelian_force(theory_cfg, params, opts)
    fit = finite_difference_force(theory, query, eps, opts, seed_from=result, model=model)
    out = {
        "G_formula": result.G,
        "G_fit": fit.G_fit,
        "contributions": result.to_dict()["contributions"],
        "eps_points": fit.to_dict()["eps_points"],
        "G_fit_sqrt": fit.G_fit_sqrt,
        "fit_model": fit.model,
        "intercept": fit.intercept,
        "linear": fit.linear,
        "rms": fit.rms,
        "G_candidates": list(result.G_candidates),
        "notes": list(result.notes),
        "facet": {"S": list(query.facet.S), "nu": query.facet.nu},
        "rho_star": list(query.rho_star),
        "eta": list(query.eta),
    }
    if result.optimal_v is not None:
        out["optimal_v"] = list(np.atleast_1d(result.optimal_v))
    write_json(args.out, out)
    if args.figures:
        from .report import figure_path, plot_force

        plot_force(fit, result.G, figure_path(args.out), _title(theory_cfg))
    return EXIT_OK


# ---------------------------------------------------------------- kirwan and verify


def cmd_kirwan(args, theory_cfg, params):
    from .liegroup import algebra_from_config, classify_facets, kirwan_polytope, rep_weights

    if theory_cfg.get("kind") not in LIE_KINDS:
        raise ConfigParseError("kirwan needs a theory of kind 'lie' or 'dimer'")
    alg = algebra_from_config(theory_cfg)
    kir = kirwan_polytope(alg, k=int(params.get("k", 8)), seed=args.seed)
    out = kir.to_dict()
    out["facets"] = [f.to_dict() for f in classify_facets(kir, rep_weights(alg))]
    write_json(args.out, out)
    if args.figures:
        from .report import figure_path, plot_kirwan

        plot_kirwan(kir.polytope, kir.reported_inequalities, figure_path(args.out), _title(theory_cfg))
    return EXIT_OK


def cmd_verify(args, theory_cfg, params):
    from .acceptance import run

    numbers = None
    if args.criteria:
        try:
            numbers = {int(x) for x in args.criteria.split(",")}
        except ValueError as exc:
            raise ConfigParseError(f"bad --criteria {args.criteria!r}") from exc
        from .acceptance import CRITERIA

        unknown = numbers - {item[0] for item in CRITERIA}
        if unknown:
            raise ConfigParseError(f"unknown criteria {sorted(unknown)}")
    print(f"{'criterion':<52} {'result':<6} {'seconds':>8}")

    def echo(r):
        print(f"{r.number}. {r.title:<49} {'PASS' if r.passed else 'FAIL':<6} {r.seconds:8.1f}", flush=True)
        for d in r.details:
            print(f"     {d}")

    results = run(numbers, echo=echo)
    passed = sum(r.passed for r in results)
    print(f"{passed}/{len(results)} criteria passed")
    if args.out:
        write_json(args.out, {"criteria": [r.to_dict() for r in results], "passed": passed, "total": len(results)})
    return EXIT_OK if passed == len(results) else EXIT_NUMERIC


HANDLERS = {
    "domain": cmd_domain,
    "functional-grid": cmd_functional_grid,
    "gradfield": cmd_gradfield,
    "boundary-force": cmd_boundary_force,
    "kirwan": cmd_kirwan,
    "verify": cmd_verify,
}


def _check_out(path):
    if not path:
        raise ConfigParseError("--out is required")
    parent = Path(path).resolve().parent
    if not parent.is_dir():
        raise ConfigParseError(f"output directory {str(parent)!r} does not exist")


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "verify":
            if args.out:
                _check_out(args.out)
            return cmd_verify(args, {}, {})
        if not args.config:
            raise ConfigParseError("--config is required")
        _check_out(args.out)
        theory_cfg, params = load_manifest(args.config)
        return HANDLERS[args.command](args, theory_cfg, params)
    except GdftError as exc:
        print(f"gdft: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        print(f"gdft: invalid parameters: {exc}", file=sys.stderr)
        return EXIT_CONFIG


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
