"""Command-line interface.

Subcommands: zoo-list, analyze, generator, certify, render, propcheck.
Exit codes: 0 success, 1 manifest mismatch, 2 configuration error,
3 numerical instability.  Reports are JSON, grids/curves CSV, figures SVG;
all outputs are deterministic for a fixed configuration and every figure
embeds the configuration digest.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
from pathlib import Path

import numpy as np

from ._compat import using_numba
from ._grid import GridSpec, Rect
from .analysis import analyze
from .bubbles import bubble_set, grid_for, openness_check, plainness_report, pushup_check
from .certify import NotFound, TimelikeCertificate, certify_membership
from .cone import Point
from .propcheck import evaluate_manifest
from .reach import (DEFAULT_EPS, GridTooCoarseError, NumericalInstabilityError,
                    integrate_generator)
from .render import render_svg
from .zoo import ZOO, catalog, load_custom

EXIT_OK = 0
EXIT_MISMATCH = 1
EXIT_CONFIG = 2
EXIT_NUMERIC = 3


class ConfigError(ValueError):
    pass


def _parse_pair(text: str, name: str) -> tuple[float, float]:
    parts = text.split(",")
    if len(parts) != 2:
        raise ConfigError(f"{name} must be 't,x', got {text!r}")
    try:
        return float(parts[0]), float(parts[1])
    except ValueError as exc:
        raise ConfigError(f"bad {name}: {exc}") from exc


def build_config(args) -> dict:
    """Normalize CLI arguments (plus optional --config JSON) into a RunConfig
    mapping; flag values override file entries."""
    cfg: dict = {}
    if getattr(args, "config", None):
        with open(args.config) as fh:
            cfg.update(json.load(fh))
    if getattr(args, "spacetime", None):
        cfg["spacetime"] = args.spacetime
    for key in ("alpha", "lam", "rho", "theta0", "budget"):
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    if getattr(args, "theta", None):
        cfg["theta"] = args.theta
    if getattr(args, "grid", None):
        parts = args.grid.split(",")
        if len(parts) != 2:
            raise ConfigError("--grid must be 'n_t,n_x'")
        cfg["grid"] = [int(parts[0]), int(parts[1])]
    if getattr(args, "eps", None):
        cfg["eps"] = [float(v) for v in args.eps.split(",")]
    if getattr(args, "window", None):
        vals = [float(v) for v in args.window.split(",")]
        if len(vals) != 4:
            raise ConfigError("--window must be 't0,t1,x0,x1'")
        cfg["window"] = vals
    if getattr(args, "point", None):
        cfg["point"] = list(_parse_pair(args.point, "--point"))
    if getattr(args, "target", None):
        cfg["target"] = list(_parse_pair(args.target, "--target"))
    if getattr(args, "out", None):
        cfg["out"] = args.out
    if getattr(args, "format", None):
        cfg["format"] = sorted(set(args.format.split(",")))
    cfg.setdefault("grid", [2001, 2001])
    cfg.setdefault("eps", list(DEFAULT_EPS))
    cfg.setdefault("format", ["json", "csv"])
    cfg.setdefault("budget", 256)
    cfg["deterministic"] = bool(getattr(args, "deterministic", False)) or True
    _validate_config(cfg)
    return cfg


def _validate_config(cfg: dict):
    if "spacetime" not in cfg:
        raise ConfigError("a spacetime must be selected (--spacetime)")
    name = cfg["spacetime"]
    if name != "custom" and name not in ZOO:
        raise ConfigError(f"unknown spacetime {name!r}; see zoo-list")
    if name == "custom" and "theta" not in cfg:
        raise ConfigError("custom spacetime requires --theta EXPR (and omega)")
    n_t, n_x = cfg["grid"]
    if n_t < 64 or n_x < 64:
        raise ConfigError("grid must be at least 64x64")
    eps = cfg["eps"]
    if len(eps) < 3 or not all(a > b > 0 for a, b in zip(eps, eps[1:])):
        raise ConfigError("eps must be >= 3 strictly decreasing positive values")
    for fmt in cfg["format"]:
        if fmt not in ("json", "csv", "svg"):
            raise ConfigError(f"unknown format {fmt!r}")
    if not isinstance(cfg["budget"], int) or cfg["budget"] <= 0:
        raise ConfigError("budget must be a positive integer")


def make_spec(cfg: dict):
    name = cfg["spacetime"]
    if name == "custom":
        custom = {"theta": cfg["theta"],
                  "omega": cfg.get("omega", cfg.get("window"))}
        if custom["omega"] is None:
            raise ConfigError("custom spacetime needs omega or --window")
        for key in ("window", "point", "name", "holder", "manifest"):
            if key in cfg:
                custom[key] = cfg[key]
        try:
            return load_custom(custom)
        except ValueError as exc:
            raise ConfigError(f"invalid custom spacetime: {exc}") from exc
    ctor = ZOO[name]
    kwargs = {}
    import inspect

    sig = inspect.signature(ctor)
    for key in ("alpha", "lam", "rho", "theta0"):
        if key in cfg and key in sig.parameters:
            kwargs[key] = cfg[key]
    try:
        return ctor(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid spacetime parameters: {exc}") from exc


def config_digest(cfg: dict) -> str:
    canon = json.dumps(cfg, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()[:16]


def _grid_from_cfg(spec, cfg) -> GridSpec:
    n_t, n_x = cfg["grid"]
    window = Rect(*cfg["window"]) if "window" in cfg else None
    base = Point(*cfg["point"]) if "point" in cfg else None
    return grid_for(spec, n_t, n_x, window=window, base=base)


def _base_point(spec, cfg) -> Point:
    return Point(*cfg.get("point", spec.base_point))


def _outdir(cfg) -> Path:
    out = Path(cfg.get("out", "out"))
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write(path: Path, text: str):
    path.write_text(text)
    print(f"wrote {path}")


def _fmt_float(v) -> str:
    if v is None or (isinstance(v, float) and not math.isfinite(v)):
        return ""
    return f"{v:.9g}"


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_zoo_list(args) -> int:
    for entry in catalog():
        flags = ",".join(f"{k}={v}" for k, v in entry["manifest"].items()
                         if v != "unknown")
        print(f"{entry['key']:20s} window={entry['window']} "
              f"base={entry['base_point']} {flags}")
    return EXIT_OK


def cmd_analyze(args) -> int:
    cfg = build_config(args)
    spec = make_spec(cfg)
    p = _base_point(spec, cfg)
    grid = _grid_from_cfg(spec, cfg)
    bundle = analyze(spec, p, grid, cfg["eps"])
    out = _outdir(cfg)
    digest = config_digest(cfg)
    _write(out / "run_config.json", json.dumps({"config": cfg, "digest": digest},
                                               indent=2, sort_keys=True) + "\n")

    if "csv" in cfg["format"]:
        lines = ["x,f_minus,f_plus"]
        for j, x in enumerate(grid.xs):
            lines.append(f"{x:.9g},{_fmt_float(bundle.f_minus.f[j])},"
                         f"{_fmt_float(bundle.f_plus.f[j])}")
        _write(out / "boundaries.csv", "\n".join(lines) + "\n")
        lines = ["t,intervals"]
        fg = bundle.front_exact
        for r in range(grid.n_t):
            ivs = "|".join(f"{a:.9g}:{b:.9g}" for a, b in fg.intervals(r))
            if ivs:
                lines.append(f"{grid.ts[r]:.9g},{ivs}")
        _write(out / "front_exact.csv", "\n".join(lines) + "\n")

    report = bubble_set(spec, p, grid, cfg["eps"])
    verdicts = {
        "pushup": pushup_check(spec, p, grid, cfg["eps"],
                               certify_budget=cfg["budget"]),
        "i_open": openness_check(spec, p, grid, cfg["eps"],
                                 certify_budget=cfg["budget"]),
        "causally_plain": plainness_report(spec, [(p.t, p.x)], grid, cfg["eps"]),
    }
    if "json" in cfg["format"]:
        payload = {
            "digest": digest,
            "spacetime": spec.name,
            "base_point": [p.t, p.x],
            "bubble": {"area": report.area, "cells": report.cell_count,
                       "column_span": list(report.column_span),
                       "numerically_zero": report.is_numerically_zero},
            "verdicts": {k: {"value": v.value, "detail": v.detail,
                             "witness": _witness_json(v.witness)}
                         for k, v in verdicts.items()},
        }
        _write(out / "report.json", json.dumps(payload, indent=2, sort_keys=True) + "\n")
    if "svg" in cfg["format"]:
        svg = render_svg(spec, grid, p, bundle.f_minus, bundle.f_plus,
                         bundle.fplus_extended(), (), digest,
                         title=f"{spec.name} from ({p.t:g}, {p.x:g})")
        _write(out / "analysis.svg", svg)
    return EXIT_OK


def _witness_json(w):
    if not w:
        return None
    out = {}
    for k, v in w.items():
        if isinstance(v, (int, float, str, bool, tuple, list)):
            out[k] = list(v) if isinstance(v, tuple) else v
    return out


def cmd_generator(args) -> int:
    cfg = build_config(args)
    spec = make_spec(cfg)
    grid = _grid_from_cfg(spec, cfg)
    start = Point(*cfg.get("point", spec.base_point))
    step = args.step or min(grid.h_t, grid.h_x)
    curve = integrate_generator(spec, start, args.branch, args.selector, step,
                                grid.window)
    out = _outdir(cfg)
    lines = ["s,t,x"]
    for s, t, x in zip(curve.params, curve.ts, curve.xs):
        lines.append(f"{s:.9g},{t:.9g},{x:.9g}")
    _write(out / f"generator_{args.branch}_{args.selector}.csv",
           "\n".join(lines) + "\n")
    return EXIT_OK


def cmd_certify(args) -> int:
    cfg = build_config(args)
    if "target" not in cfg:
        raise ConfigError("certify requires --target t,x")
    spec = make_spec(cfg)
    p = _base_point(spec, cfg)
    grid = _grid_from_cfg(spec, cfg)
    q = Point(*cfg["target"])
    result = certify_membership(spec, p, q, grid, cfg["budget"])
    out = _outdir(cfg)
    if isinstance(result, TimelikeCertificate):
        curve = result.curve.resampled(600)
        lines = [f"# construction={result.construction}",
                 f"# source={p.t:.9g},{p.x:.9g} target={q.t:.9g},{q.x:.9g}",
                 f"# verdict={result.report.verdict} "
                 f"violations={len(result.report.violation_params)}",
                 "s,t,x"]
        for s, t, x in zip(curve.params, curve.ts, curve.xs):
            lines.append(f"{s:.9g},{t:.9g},{x:.9g}")
        _write(out / "certificate.csv", "\n".join(lines) + "\n")
        print(f"certified via {result.construction}")
    else:
        payload = {"found": False, "budget": result.budget,
                   "candidates_tried": result.candidates_tried,
                   "reason": result.reason,
                   "source": [p.t, p.x], "target": [q.t, q.x]}
        _write(out / "notfound.json", json.dumps(payload, indent=2) + "\n")
        print("no certificate found within budget")
    return EXIT_OK


def cmd_render(args) -> int:
    cfg = build_config(args)
    cfg["format"] = ["svg"]
    spec = make_spec(cfg)
    p = _base_point(spec, cfg)
    grid = _grid_from_cfg(spec, cfg)
    bundle = analyze(spec, p, grid, cfg["eps"])
    curves = []
    if "target" in cfg:
        result = certify_membership(spec, p, Point(*cfg["target"]), grid,
                                    cfg["budget"])
        if isinstance(result, TimelikeCertificate):
            curves.append(result.curve)
    svg = render_svg(spec, grid, p, bundle.f_minus, bundle.f_plus,
                     bundle.fplus_extended(), curves, config_digest(cfg),
                     title=f"{spec.name} from ({p.t:g}, {p.x:g})")
    out = _outdir(cfg)
    _write(out / "render.svg", svg)
    return EXIT_OK


def cmd_propcheck(args) -> int:
    cfg = build_config(args)
    names = list(ZOO) if cfg["spacetime"] == "all" else [cfg["spacetime"]]
    any_mismatch = False
    for name in names:
        sub = dict(cfg)
        sub["spacetime"] = name
        spec = make_spec(sub)
        results = evaluate_manifest(spec, n_grid=cfg["grid"][0],
                                    budget=cfg["budget"], eps=tuple(cfg["eps"]))
        for res in results:
            status = "MISMATCH" if res.mismatch else "ok"
            if res.mismatch:
                any_mismatch = True
            print(f"{name:18s} {res.flag:18s} expected={res.expected:8s} "
                  f"computed={res.computed:8s} {status}  {res.detail}")
    return EXIT_MISMATCH if any_mismatch else EXIT_OK


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="conefront",
        description="Causal reachability analysis for continuous 2-D cone fields")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--spacetime", help="zoo name, 'custom', or 'all' (propcheck)")
        sp.add_argument("--alpha", type=float)
        sp.add_argument("--lam", "--lambda", dest="lam", type=float)
        sp.add_argument("--rho", type=float)
        sp.add_argument("--theta0", type=float)
        sp.add_argument("--theta", help="custom angle expression in t, x")
        sp.add_argument("--point", help="base point 't,x'")
        sp.add_argument("--target", help="target point 't,x'")
        sp.add_argument("--grid", help="'n_t,n_x' (default 2001,2001)")
        sp.add_argument("--eps", help="comma-separated widening sequence")
        sp.add_argument("--window", help="'t0,t1,x0,x1'")
        sp.add_argument("--out", help="output directory (default ./out)")
        sp.add_argument("--format", help="comma-set of json,csv,svg")
        sp.add_argument("--budget", type=int, help="certificate search budget")
        sp.add_argument("--config", help="JSON config file (flags override)")
        sp.add_argument("--deterministic", action="store_true",
                        help="force sequential execution (always on)")

    sp = sub.add_parser("zoo-list", help="print the spacetime catalogue")
    sp.set_defaults(fn=cmd_zoo_list)

    sp = sub.add_parser("analyze", help="fronts, boundaries, bubbles, verdicts")
    common(sp)
    sp.set_defaults(fn=cmd_analyze)

    sp = sub.add_parser("generator", help="integrate an extremal null generator")
    common(sp)
    sp.add_argument("--branch", choices=("v1", "v2"), default="v1")
    sp.add_argument("--selector", choices=("maximal", "minimal"), default="maximal")
    sp.add_argument("--step", type=float)
    sp.set_defaults(fn=cmd_generator)

    sp = sub.add_parser("certify", help="search for a timelike certificate")
    common(sp)
    sp.set_defaults(fn=cmd_certify)

    sp = sub.add_parser("render", help="draw the analysis figure (SVG)")
    common(sp)
    sp.set_defaults(fn=cmd_render)

    sp = sub.add_parser("propcheck", help="check manifests against verdicts")
    common(sp)
    sp.set_defaults(fn=cmd_propcheck)

    return parser


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalInstabilityError, GridTooCoarseError) as exc:
        print(f"numerical instability: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
