"""Command-line entry point.

Exit codes: 0 success (all gates pass), 1 gate failure, 2 usage error.
Config precedence: CLI flags override config-file values override defaults.
Config files may be TOML or JSON, auto-detected by extension.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .capacity import CapacityProblem, solve_capacity
from .errors import FracmaxError, UsageError
from .experiments import EXPERIMENTS, Report
from .geometry import build_cantor, build_gap_set, porosity_check
from .grid import (
    DomainMask,
    NodeSet,
    RadiusField,
    ScalarField,
    field_from_json,
    field_to_json,
    interval_grid,
    load_json,
    nodeset_from_json,
    nodeset_to_json,
)
from .maxop import local_maximal, local_maximal_fast
from .profiles import radius_from_spec
from .reporting import emit_report
from .seminorm import SeminormParams, lp_norm, sobolev_norm, weighted_seminorm
from .weights import weight_from_spec

try:  # tomllib ships with 3.11+; tomli backfills 3.10
    import tomllib
except ImportError:  # pragma: no cover
    import tomli as tomllib


def _load_config(path: str) -> dict:
    p = Path(path)
    if p.suffix.lower() == ".toml":
        with open(p, "rb") as fh:
            return tomllib.load(fh)
    if p.suffix.lower() == ".json":
        return load_json(p)
    raise UsageError(f"config files must be .toml or .json, got {p.suffix!r}")


def _grid_from_spec(spec: str):
    try:
        lo, hi, h = (float(v) for v in spec.split(","))
    except ValueError as exc:
        raise UsageError(f"grid spec must be 'lo,hi,h', got {spec!r}") from exc
    return interval_grid(lo, hi, h)


def _field_loader(path: str) -> ScalarField:
    return field_from_json(load_json(path))


def _nodeset_points_loader(path: str):
    return nodeset_from_json(load_json(path)).coords()


def _write_json(doc: dict, path: Path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def _cmd_maxop(args) -> int:
    f = _field_loader(args.f)
    R = radius_from_spec(args.radius, f.mask, loader=_field_loader)
    op = local_maximal if args.reference else local_maximal_fast
    res = op(f, R)
    doc = field_to_json(res.field)
    doc["argmax_radius"] = [float(v) for v in np.asarray(res.argmax_radius).ravel()]
    _write_json(doc, Path(args.out))
    return 0


def _cmd_seminorm(args) -> int:
    f = _field_loader(args.f)
    w = weight_from_spec(args.weight, dim=f.grid.dim, loader=_nodeset_points_loader)
    radius = radius_from_spec(args.radius, f.mask, loader=_field_loader) if args.radius else None
    params = SeminormParams(args.s, args.p, w, radius=radius)
    doc = {
        "seminorm": weighted_seminorm(f, params),
        "lp_norm": lp_norm(f, args.p),
        "sobolev_norm": sobolev_norm(f, params),
    }
    _write_json(doc, Path(args.out))
    return 0


def _cmd_capacity(args) -> int:
    doc = load_json(args.problem)
    from .grid import Grid

    grid = Grid.from_json(doc["grid"])
    inside = np.asarray(doc["inside"], dtype=bool).reshape(grid.shape)
    mask = DomainMask(grid, inside, represents_whole_space=bool(doc.get("represents_whole_space", False)))
    E = NodeSet(grid, np.asarray(doc["E"], dtype=bool).reshape(grid.shape))
    H = None
    if doc.get("H") is not None:
        H = NodeSet(grid, np.asarray(doc["H"], dtype=bool).reshape(grid.shape))
    R = None
    if doc.get("R") is not None:
        R = RadiusField(mask, np.asarray(doc["R"], dtype=float).reshape(grid.shape))
    w = weight_from_spec(doc["weight"], dim=grid.dim, loader=_nodeset_points_loader)
    prob = CapacityProblem(
        G=mask,
        E=E,
        H=H,
        R=R,
        s=float(doc["s"]),
        p=float(doc["p"]),
        weight=w,
        include_lp_term=bool(doc.get("include_lp_term", False)),
    )
    sol = solve_capacity(prob)
    out = Path(args.out) if args.out else Path("capacity_out.json")
    minimizer_file = out.with_name(out.stem + "_minimizer.json")
    _write_json(field_to_json(sol.minimizer), minimizer_file)
    _write_json(
        {
            "value": sol.value,
            "converged": sol.converged,
            "iterations": sol.iterations,
            "minimizer_file": str(minimizer_file),
        },
        out,
    )
    return 0


def _cmd_geometry(args) -> int:
    if args.geometry_command == "build":
        grid = _grid_from_spec(args.grid)
        kind, _, rest = args.kind.partition(":")
        kv = {}
        for part in rest.split(","):
            if part:
                k, _, v = part.partition("=")
                kv[k.strip()] = v.strip()
        if kind == "gapset":
            gap = build_gap_set(int(kv["M"]), int(kv["N"]), grid)
            _write_json(nodeset_to_json(gap.nodes), Path(args.out))
        elif kind == "cantor":
            a = float(kv.get("a", 0.0))
            b = float(kv.get("b", 1.0))
            ns = build_cantor(int(kv["level"]), grid, (a, b))
            _write_json(nodeset_to_json(ns), Path(args.out))
        else:
            raise UsageError(f"unknown geometry kind {kind!r}")
        return 0
    if args.geometry_command == "porosity":
        ns = nodeset_from_json(load_json(args.set))
        scales = [float(v) for v in args.scales.split(",")] if args.scales else None
        if scales is None:
            coords = ns.coords()
            diam = float(np.linalg.norm(coords.max(axis=0) - coords.min(axis=0)))
            scales = [diam / 2**k for k in range(1, 5)]
        rep = porosity_check(ns, args.kappa, scales)
        _write_json(
            {
                "kappa_estimate": rep.kappa_estimate,
                "requested_kappa": rep.requested_kappa,
                "passed": rep.passed,
                "n_failures": len(rep.witness_failures),
                "scales": list(rep.scales_tested),
            },
            Path(args.out),
        )
        return 0 if rep.passed else 1
    raise UsageError("unknown geometry subcommand")


_FLAG_ALIASES = {"N": "N_list", "t": "t_list", "L": "L_list", "lambda": "lambda_list"}


def _parse_config_value(val: str):
    if "," in val:
        return [_parse_config_value(v) for v in val.split(",") if v]
    try:
        parsed = json.loads(val)
    except json.JSONDecodeError:
        return val
    if isinstance(parsed, float) and parsed.is_integer() and "." not in val and "e" not in val.lower():
        return int(parsed)
    return parsed


def _cmd_experiments(args) -> int:
    if args.name not in EXPERIMENTS:
        raise UsageError(f"unknown experiment {args.name!r}; choose from {sorted(EXPERIMENTS)}")
    config = {}
    if args.config:
        config.update(_load_config(args.config))
    # free-form long flags: --M 2 --s 0.9 --N 1,2,3
    extras = list(args.extras or [])
    while extras:
        flag = extras.pop(0)
        if not flag.startswith("--") or not extras:
            raise UsageError(f"unexpected argument {flag!r}")
        key = flag[2:]
        config[_FLAG_ALIASES.get(key, key)] = _parse_config_value(extras.pop(0))
    for item in args.set or []:
        key, _, val = item.partition("=")
        config[_FLAG_ALIASES.get(key, key)] = _parse_config_value(val)
    if args.seed is not None:
        config["seed"] = args.seed
    t0 = time.perf_counter()
    fn = EXPERIMENTS[args.name]
    import inspect

    params = inspect.signature(fn).parameters
    if not any(p.kind is inspect.Parameter.VAR_KEYWORD for p in params.values()):
        unknown = set(config) - set(params)
        if unknown:
            raise UsageError(f"experiment {args.name!r} does not accept {sorted(unknown)}")
    report: Report = fn(**config)
    wall = time.perf_counter() - t0
    emit_report(report, args.out, wall_time_s=wall)
    return 0 if report.passed else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fracmax", description=__doc__, allow_abbrev=False)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_max = sub.add_parser("maxop", help="maximal operator evaluation")
    max_sub = p_max.add_subparsers(dest="maxop_command", required=True)
    p_run = max_sub.add_parser("run")
    p_run.add_argument("--f", required=True)
    p_run.add_argument("--radius", required=True)
    group = p_run.add_mutually_exclusive_group()
    group.add_argument("--fast", action="store_true", default=True)
    group.add_argument("--reference", action="store_true")
    p_run.add_argument("--out", required=True)
    p_run.set_defaults(fn=_cmd_maxop)

    p_semi = sub.add_parser("seminorm", help="seminorm evaluation")
    semi_sub = p_semi.add_subparsers(dest="seminorm_command", required=True)
    p_eval = semi_sub.add_parser("eval")
    p_eval.add_argument("--f", required=True)
    p_eval.add_argument("--s", type=float, required=True)
    p_eval.add_argument("--p", type=float, required=True)
    p_eval.add_argument("--weight", required=True)
    p_eval.add_argument("--radius")
    p_eval.add_argument("--out", required=True)
    p_eval.set_defaults(fn=_cmd_seminorm)

    p_cap = sub.add_parser("capacity", help="capacity minimization")
    cap_sub = p_cap.add_subparsers(dest="capacity_command", required=True)
    p_solve = cap_sub.add_parser("solve")
    p_solve.add_argument("--problem", required=True)
    p_solve.add_argument("--out")
    p_solve.set_defaults(fn=_cmd_capacity)

    p_geo = sub.add_parser("geometry", help="set construction and porosity")
    geo_sub = p_geo.add_subparsers(dest="geometry_command", required=True)
    p_build = geo_sub.add_parser("build")
    p_build.add_argument("--kind", required=True)
    p_build.add_argument("--grid", required=True)
    p_build.add_argument("--out", required=True)
    p_build.set_defaults(fn=_cmd_geometry)
    p_por = geo_sub.add_parser("porosity")
    p_por.add_argument("--set", required=True)
    p_por.add_argument("--kappa", type=float, required=True)
    p_por.add_argument("--scales")
    p_por.add_argument("--out", default="porosity.json")
    p_por.set_defaults(fn=_cmd_geometry)

    p_exp = sub.add_parser("experiments", help="run an experiment harness")
    exp_sub = p_exp.add_subparsers(dest="experiments_command", required=True)
    p_runx = exp_sub.add_parser("run", allow_abbrev=False)
    p_runx.add_argument("name")
    p_runx.add_argument("--config")
    p_runx.add_argument("--out", required=True)
    p_runx.add_argument("--seed", type=int)
    p_runx.add_argument("--set", action="append", metavar="KEY=VALUE")
    p_runx.set_defaults(fn=_cmd_experiments)
    return parser


def parse_and_dispatch(argv) -> int:
    parser = build_parser()
    try:
        argv = list(argv)
        if argv[:2] == ["experiments", "run"]:
            args, extras = parser.parse_known_args(argv)
            args.extras = extras
        else:
            args = parser.parse_args(argv)
            args.extras = []
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        return args.fn(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except FracmaxError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(parse_and_dispatch(sys.argv[1:]))
