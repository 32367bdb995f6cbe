"""Command-line front end: JSON config in, deterministic CSV out.

Exit codes: 0 success, 2 configuration/validation error (single-line
diagnostic on stderr naming the violated precondition), 3 file I/O failure.
All numeric output is fixed-precision decimal text with a fixed row order,
and every randomized probe takes an explicit seed, so identical invocations
produce byte-identical files.
"""

from __future__ import annotations

import argparse
import csv
import itertools
import json
import math
import os
import sys
from fractions import Fraction

import numpy as np

from . import evolve as evolve_mod
from . import exponents, functionals, groundstate
from .grid import RadialGrid, field_from_csv, field_to_csv, gaussian_field
from .params import ModelParams, upper_exponents, validate_scope


class ConfigError(ValueError):
    pass


# allowed keys per config section; unknown keys are rejected
_SCHEMA = {
    "model": {"N", "alpha", "b"},
    "grid": {"J", "h"},
    "solver": {"method", "tol", "max_iter"},
    "evolve": {"dt", "t_end", "record_every", "virial_R", "linear_only"},
    "pairs": {"theta", "eps"},
    "classify": {"field"},
    "sweep": {"subcommand", "N", "alpha", "b"},
    "output": {"directory", "precision"},
    "seed": None,
}


def load_config(path) -> dict:
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    for key, val in cfg.items():
        if key not in _SCHEMA:
            raise ConfigError(f"unknown config section {key!r}")
        allowed = _SCHEMA[key]
        if allowed is None:
            continue
        if not isinstance(val, dict):
            raise ConfigError(f"section {key!r} must be an object")
        for sub in val:
            if sub not in allowed:
                raise ConfigError(f"unknown key {key}.{sub}")
    return cfg


def _model(cfg) -> ModelParams:
    sec = cfg.get("model")
    if not sec:
        raise ConfigError("config needs a model section {N, alpha, b}")
    for k in ("N", "alpha", "b"):
        if k not in sec:
            raise ConfigError(f"model.{k} is required")
    try:
        return ModelParams(int(sec["N"]), float(sec["alpha"]), float(sec["b"]))
    except ValueError as exc:
        raise ConfigError(f"model: {exc}") from exc


def _grid(cfg, params) -> RadialGrid:
    sec = cfg.get("grid")
    if not sec:
        raise ConfigError("config needs a grid section {J, h}")
    try:
        return RadialGrid(J=int(sec["J"]), h=float(sec["h"]), N=params.N)
    except KeyError as exc:
        raise ConfigError(f"grid.{exc.args[0]} is required") from exc
    except ValueError as exc:
        raise ConfigError(f"grid: {exc}") from exc


def _precision(cfg) -> int:
    prec = cfg.get("output", {}).get("precision", 12)
    if not isinstance(prec, int) or not (1 <= prec <= 17):
        raise ConfigError(f"output.precision must be an integer in [1, 17], got {prec}")
    return prec


def _fmt(x, prec):
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"%.{prec}g" % x


def _write_csv(path, header, rows, prec):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v, prec) for v in row])


def _out_dir(cfg, args) -> str:
    out = args.out or cfg.get("output", {}).get("directory", ".")
    os.makedirs(out, exist_ok=True)
    return out


# ---------------------------------------------------------------------------
# subcommands


def cmd_params(cfg, args) -> int:
    params = _model(cfg)
    two_star, two_lower_star = upper_exponents(params.N, params.b)
    scope = validate_scope(params)
    prec = _precision(cfg)
    parts = [
        f"s_c={_fmt(params.s_c, prec)}",
        f"two_star={_fmt(float(two_star), prec)}",
        f"two_lower_star={_fmt(float(two_lower_star), prec)}",
        f"mass_supercritical={_fmt(scope.mass_supercritical, prec)}",
        f"energy_subcritical={_fmt(scope.energy_subcritical, prec)}",
        f"scattering_subcritical={_fmt(scope.scattering_subcritical, prec)}",
        f"theorem_scope={_fmt(scope.theorem_scope, prec)}",
        f"global_scope={_fmt(scope.global_scope, prec)}",
    ]
    print(" ".join(parts))
    return 0


def cmd_pairs(cfg, args) -> int:
    params = _model(cfg)
    sec = cfg.get("pairs", {})
    alpha = Fraction(str(cfg["model"]["alpha"]))
    b = Fraction(str(cfg["model"]["b"]))
    theta = Fraction(str(sec["theta"])) if sec.get("theta") is not None else None
    eps = Fraction(str(sec.get("eps", "1/100")))
    prec = _precision(cfg)
    try:
        rows = exponents.certificate_rows(params.N, alpha, b, theta=theta, eps=eps)
        th_used = rows[0]["theta"] if rows else (theta or Fraction(1, 20))
        app = exponents.appendix_checks(params.N, alpha, b, th_used, eps=eps)
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"pairs: {exc}") from exc
    out = _out_dir(cfg, args)
    header = ["family", "pair", "N", "alpha", "b", "theta", "q", "r", "class", "admissible", "identity_residual"]
    _write_csv(
        os.path.join(out, "pairs.csv"),
        header,
        [[r[k] for k in header] for r in rows],
        prec,
    )
    ah = ["check", "bound_holds", "condition_holds", "equivalent"]
    _write_csv(
        os.path.join(out, "appendix.csv"),
        ah,
        [[r[k] for k in ah] for r in app],
        prec,
    )
    return 0


def _solve(cfg, params, grid, method):
    sec = cfg.get("solver", {})
    tol = float(sec.get("tol", 1e-12))
    max_iter = int(sec.get("max_iter", 500))
    if method == "shooting":
        return groundstate.solve_shooting(params, grid)
    if method == "fixedpoint":
        return groundstate.solve_fixedpoint(params, grid, tol=tol, max_iter=max_iter)
    raise ConfigError(f"solver.method must be shooting or fixedpoint, got {method!r}")


def cmd_groundstate(cfg, args) -> int:
    params = _model(cfg)
    grid = _grid(cfg, params)
    prec = _precision(cfg)
    out = _out_dir(cfg, args)
    methods = cfg.get("solver", {}).get("method", "both")
    if methods == "both":
        methods = ["shooting", "fixedpoint"]
    else:
        methods = [methods]
    results = {}
    for m in methods:
        try:
            results[m] = _solve(cfg, params, grid, m)
        except (ValueError, RuntimeError) as exc:
            raise ConfigError(f"groundstate ({m}): {exc}") from exc
    primary = results.get("fixedpoint") or next(iter(results.values()))
    field_to_csv(primary.profile, os.path.join(out, "profile.csv"), precision=prec)
    N, alpha, b = params.N, params.alpha, params.b
    denom = N * alpha + 2 * b
    id_rows = []
    for name, gs in sorted(results.items()):
        id_rows.extend(
            [
                [f"GS1:{name}", gs.grad2, denom / (4 - 2 * b - alpha * (N - 2)) * gs.mass2,
                 groundstate.verify_identities(gs)["GS1"]],
                [f"GS2:{name}", gs.potential, 2 * (alpha + 2) / denom * gs.grad2,
                 groundstate.verify_identities(gs)["GS2"]],
                [f"EGS:{name}", gs.energy, alpha * params.s_c / denom * gs.grad2,
                 groundstate.verify_identities(gs)["EGS"]],
            ]
        )
    _write_csv(os.path.join(out, "identities.csv"), ["identity", "lhs", "rhs", "rel_residual"], id_rows, prec)
    sc = groundstate.sharp_constant(primary)
    probe = groundstate.gn_maximality_probe(primary, trials=200, seed=args.seed)
    _write_csv(
        os.path.join(out, "sharp.csv"),
        ["cgn_formula", "cgn_direct", "rel_gap", "probe_max_quotient", "probe_holds", "probe_trials", "seed"],
        [[sc["cgn_formula"], sc["cgn_direct"], sc["rel_gap"], probe["max_quotient"], probe["holds"], probe["trials"], args.seed]],
        prec,
    )
    return 0


def _load_field(cfg, args, params, grid):
    if args.field:
        u = field_from_csv(args.field, params.N)
        if u.grid.J != grid.J or abs(u.grid.h - grid.h) > 1e-12:
            raise ConfigError("field CSV grid does not match the configured grid")
        return u
    spec = cfg.get("classify", {}).get("field")
    if spec is None:
        raise ConfigError("no --field file and no classify.field profile given")
    spec = spec.strip()
    if spec.startswith("gaussian(") and spec.endswith(")"):
        try:
            amp, width = (float(x) for x in spec[len("gaussian(") : -1].split(","))
        except ValueError as exc:
            raise ConfigError(f"cannot parse field spec {spec!r}") from exc
        return gaussian_field(grid, amp, width)
    if spec == "zero":
        return grid.field(np.zeros(grid.J))
    raise ConfigError(f"unknown analytic field spec {spec!r}")


_CLASSIFY_HEADER = [
    "mass", "energy", "em_product", "gm_product", "em_threshold",
    "gm_threshold", "w", "A", "verdict",
]


def cmd_classify(cfg, args) -> int:
    params = _model(cfg)
    grid = _grid(cfg, params)
    prec = _precision(cfg)
    u0 = _load_field(cfg, args, params, grid)
    try:
        gs = _solve(cfg, params, grid, "fixedpoint")
    except (ValueError, RuntimeError) as exc:
        raise ConfigError(f"classify: {exc}") from exc
    rep = functionals.classify(u0, gs)
    row = [getattr(rep, k) for k in _CLASSIFY_HEADER]
    writer = csv.writer(sys.stdout)
    writer.writerow(_CLASSIFY_HEADER)
    writer.writerow([_fmt(v, prec) for v in row])
    return 0


def cmd_evolve(cfg, args) -> int:
    params = _model(cfg)
    grid = _grid(cfg, params)
    prec = _precision(cfg)
    out = _out_dir(cfg, args)
    sec = cfg.get("evolve")
    if not sec:
        raise ConfigError("config needs an evolve section {dt, t_end, ...}")
    try:
        econf = evolve_mod.EvolutionConfig(
            params=params,
            J=grid.J,
            h=grid.h,
            dt=float(sec["dt"]),
            t_end=float(sec["t_end"]),
            record_every=int(sec.get("record_every", 10)),
            virial_R=float(sec["virial_R"]) if sec.get("virial_R") is not None else None,
            linear_only=bool(sec.get("linear_only", False)),
        )
    except KeyError as exc:
        raise ConfigError(f"evolve.{exc.args[0]} is required") from exc
    except ValueError as exc:
        raise ConfigError(f"evolve: {exc}") from exc
    u0 = _load_field(cfg, args, params, grid)
    try:
        gs = _solve(cfg, params, grid, "fixedpoint")
        rep = functionals.classify(u0, gs)
    except (ValueError, RuntimeError) as exc:
        raise ConfigError(f"evolve: {exc}") from exc
    exploratory = rep.verdict not in ("GlobalScatters", "GlobalOnly")
    trace = evolve_mod.run(u0, econf, threshold=rep)
    rows = [
        [trace.times[i], trace.mass_series[i], trace.energy_series[i],
         trace.grad_series[i], trace.potential_series[i],
         trace.gm_product_series[i], trace.zR_series[i],
         trace.zR_prime_series[i], trace.zR_second_direct_series[i]]
        for i in range(len(trace.times))
    ]
    _write_csv(
        os.path.join(out, "trace.csv"),
        ["t", "mass", "energy", "grad2", "potential", "gm_product", "zR", "zR_prime", "zR_second"],
        rows,
        prec,
    )
    label = "exploratory" if exploratory else "below_threshold"
    if econf.virial_R is not None and not exploratory:
        rig = evolve_mod.rigidity_check(trace, rep)
        _write_csv(
            os.path.join(out, "rigidity.csv"),
            ["label", "holds", "r_too_small", "lower_bound", "min_slack", "max_budget", "integrated_holds", "A", "energy"],
            [[label, rig.holds, rig.r_too_small, rig.lower_bound, rig.min_slack,
              rig.max_budget, rig.integrated_holds, rig.A, rig.energy]],
            prec,
        )
    diag = evolve_mod.scattering_diagnostic(trace)
    _write_csv(
        os.path.join(out, "scattering.csv"),
        ["label", "decayed", "final_fraction", "decay_exponent", "grad_limit", "grad_flat"],
        [[label, diag.decayed, diag.final_fraction, diag.decay_exponent, diag.grad_limit, diag.grad_flat]],
        prec,
    )
    return 0


def cmd_sweep(cfg, args) -> int:
    sec = cfg.get("sweep")
    if not sec:
        raise ConfigError("config needs a sweep section")
    sub = sec.get("subcommand")
    if sub not in ("params", "pairs", "groundstate", "classify", "evolve"):
        raise ConfigError(f"sweep.subcommand must name a dispatchable subcommand, got {sub!r}")
    lists = {}
    for key in ("N", "alpha", "b"):
        vals = sec.get(key)
        if vals is None:
            vals = [cfg.get("model", {}).get(key)]
            if vals[0] is None:
                raise ConfigError(f"sweep needs {key} (list) or model.{key}")
        if not isinstance(vals, list):
            raise ConfigError(f"sweep.{key} must be a list")
        lists[key] = vals
    out = _out_dir(cfg, args)
    manifest = []
    for idx, (n_val, a_val, b_val) in enumerate(
        itertools.product(lists["N"], lists["alpha"], lists["b"])
    ):
        sub_dir = os.path.join(out, f"point_{idx:04d}")
        os.makedirs(sub_dir, exist_ok=True)
        point_cfg = {k: (dict(v) if isinstance(v, dict) else v) for k, v in cfg.items() if k != "sweep"}
        point_cfg.setdefault("model", {})
        point_cfg["model"].update({"N": n_val, "alpha": a_val, "b": b_val})
        # "." keeps the emitted config byte-stable across parent directories;
        # re-running it from inside the point directory reproduces the run
        point_cfg.setdefault("output", {})
        point_cfg["output"]["directory"] = "."
        with open(os.path.join(sub_dir, "config.json"), "w") as fh:
            json.dump(point_cfg, fh, indent=2, sort_keys=True)
            fh.write("\n")
        point_args = argparse.Namespace(out=sub_dir, field=args.field, seed=args.seed)
        try:
            status = _DISPATCH[sub](point_cfg, point_args)
        except ConfigError as exc:
            status = 2
            with open(os.path.join(sub_dir, "error.txt"), "w") as fh:
                fh.write(f"{exc}\n")
        manifest.append([idx, sub, n_val, a_val, b_val, os.path.basename(sub_dir), status])
    _write_csv(
        os.path.join(out, "manifest.csv"),
        ["index", "subcommand", "N", "alpha", "b", "directory", "status"],
        manifest,
        _precision(cfg),
    )
    return 0


_DISPATCH = {
    "params": cmd_params,
    "pairs": cmd_pairs,
    "groundstate": cmd_groundstate,
    "classify": cmd_classify,
    "evolve": cmd_evolve,
    "sweep": cmd_sweep,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="inlslab",
        description="Numerical laboratory for the radial inhomogeneous NLS equation",
    )
    parser.add_argument("subcommand", choices=sorted(_DISPATCH))
    parser.add_argument("--config", required=True, help="JSON configuration file")
    parser.add_argument("--out", default=None, help="output directory")
    parser.add_argument("--field", default=None, help="field CSV (r,re,im) input")
    parser.add_argument("--seed", type=int, default=0, help="seed for randomized probes")
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config)
        return _DISPATCH[args.subcommand](cfg, args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
