"""Command-line front end: solve, sweep, verify, converge.

Exit codes: 0 success, 2 invalid configuration, 3 nonpositive Gamma
denominator, 4 not converged within the step budget.  Failures leave a
machine-readable ``error.json`` in the output directory.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import math
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import io as gio
from .diagnostics import classify_singularities, decay_diagnostics, epsilon_convergence, verify_steady_identities
from .dynamics import initial_state, integrate_to_steady, residual_norm
from .errors import ConfigError, NonpositiveDenominator, NotConverged
from .model import Grid, Parameters, gamma as gamma_of, moments as moments_of

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NONPOSITIVE_DENOMINATOR = 3
EXIT_NOT_CONVERGED = 4


@dataclass
class RunConfig:
    subcommand: str
    params: Parameters
    init_kind: str = "random"
    tol: float = 1e-9
    max_steps: int = 10_000_000
    sample_every: int = 1000
    out_dir: Path = Path("out")
    beta_list: list[float] = field(default_factory=list)
    eps_list: list[float] = field(default_factory=list)

    def echo(self) -> dict:
        p = self.params
        return {
            "subcommand": self.subcommand,
            "beta": p.beta,
            "n_max": p.n_max,
            "domain_length": p.domain_length,
            "cells": p.cells,
            "eps": p.eps,
            "area": p.area_target,
            "dt_safety": p.dt_safety,
            "seed": p.seed,
            "init": self.init_kind,
            "tol": self.tol,
            "max_steps": self.max_steps,
        }


def read_config_file(path: str | Path) -> dict:
    """Flat ``key = value`` pairs, one per line, '#' starts a comment."""
    values: dict[str, str] = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        values[key.strip().replace("-", "_")] = value.strip()
    return values


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=str, default=None, help="flat key=value config file")
    common.add_argument("--beta", type=float, default=None)
    common.add_argument("--n-max", type=int, default=None, dest="n_max")
    common.add_argument("--domain-length", type=int, default=None, dest="domain_length")
    common.add_argument("--cells", type=int, default=None)
    common.add_argument("--area", type=float, default=None)
    common.add_argument("--tol", type=float, default=None)
    common.add_argument("--max-steps", type=int, default=None, dest="max_steps")
    common.add_argument("--init", type=str, default=None, choices=("random", "uniform", "localized"))
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--dt-safety", type=float, default=None, dest="dt_safety")
    common.add_argument("--out", type=str, default=None)

    parser = argparse.ArgumentParser(
        prog="grainkin",
        description="Steady-state solver and verification suite for the grain-growth kinetic model",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)
    sub.add_parser("solve", parents=[common], help="relax one configuration to steady state")
    p_sweep = sub.add_parser("sweep", parents=[common], help="solve for several beta values")
    p_sweep.add_argument("--betas", type=str, required=True, help="comma-separated beta list")
    p_sweep.add_argument("--workers", type=int, default=None, help="worker processes (default: up to #betas)")
    sub.add_parser("verify", parents=[common], help="re-derive the diagnostics of a finished run")
    p_conv = sub.add_parser("converge", parents=[common], help="grid-spacing convergence study")
    p_conv.add_argument("--eps-list", type=str, required=True, dest="eps_list",
                        help="comma-separated grid spacings")
    return parser


_DEFAULTS = {
    "beta": 1.0,
    "n_max": 25,
    "domain_length": 20,
    "cells": 400,
    "area": 1.0,
    "tol": 1e-9,
    "max_steps": 10_000_000,
    "init": "random",
    "seed": 0,
    "dt_safety": 0.9,
    "out": "out",
}

_CASTS = {
    "beta": float, "n_max": int, "domain_length": int, "cells": int,
    "area": float, "tol": float, "max_steps": int, "init": str,
    "seed": int, "dt_safety": float, "out": str,
}


def build_config(args: argparse.Namespace) -> RunConfig:
    merged = dict(_DEFAULTS)
    if args.config:
        try:
            file_values = read_config_file(args.config)
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}") from exc
        for key, value in file_values.items():
            if key not in _CASTS:
                raise ConfigError(f"unknown config key {key!r}")
            try:
                merged[key] = _CASTS[key](value)
            except ValueError as exc:
                raise ConfigError(f"bad value for {key!r}: {value!r}") from exc
    for key in _CASTS:
        flag = getattr(args, key, None)
        if flag is not None:
            merged[key] = flag
    try:
        params = Parameters(
            beta=merged["beta"], n_max=merged["n_max"],
            domain_length=merged["domain_length"], cells=merged["cells"],
            area_target=merged["area"], dt_safety=merged["dt_safety"],
            seed=merged["seed"],
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if merged["tol"] <= 0:
        raise ConfigError(f"tol must be positive, got {merged['tol']}")
    cfg = RunConfig(
        subcommand=args.subcommand,
        params=params,
        init_kind=merged["init"],
        tol=merged["tol"],
        max_steps=merged["max_steps"],
        out_dir=Path(merged["out"]),
    )
    if args.subcommand == "sweep":
        try:
            cfg.beta_list = [float(v) for v in args.betas.split(",") if v.strip()]
        except ValueError as exc:
            raise ConfigError(f"bad --betas list: {args.betas!r}") from exc
        if not cfg.beta_list:
            raise ConfigError("--betas is empty")
    if args.subcommand == "converge":
        try:
            cfg.eps_list = [float(v) for v in args.eps_list.split(",") if v.strip()]
        except ValueError as exc:
            raise ConfigError(f"bad --eps-list: {args.eps_list!r}") from exc
        if not cfg.eps_list:
            raise ConfigError("--eps-list is empty")
    return cfg


def _solve_into(cfg: RunConfig, out_dir: Path) -> dict:
    """Run one solve and write profile.csv, moments.csv, manifest.json."""
    out_dir.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    params = cfg.params
    grid = Grid.from_parameters(params)
    init = initial_state(params, grid, kind=cfg.init_kind)
    report = integrate_to_steady(
        init, grid, params, tol=cfg.tol, max_steps=cfg.max_steps,
        sample_every=cfg.sample_every,
    )
    identities = decay = singular = None
    if report.converged:
        identities = verify_steady_identities(report, grid, params)
        decay = decay_diagnostics(report, params)
        singular = classify_singularities(report, grid, params)
    manifest = gio.build_manifest(
        cfg.echo(), report, identities, decay, singular,
        wall_seconds=time.perf_counter() - t0,
    )
    gio.write_profile_csv(report, grid, params, out_dir / "profile.csv")
    gio.write_moments_csv(report, params, out_dir / "moments.csv")
    gio.write_manifest(manifest, out_dir / "manifest.json")
    if not report.converged:
        raise NotConverged(
            f"residual {report.residual:.3e} > tol {cfg.tol:.3e} after {report.steps} steps"
        )
    return manifest


def _sweep_worker(payload: dict) -> tuple[float, float, float]:
    cfg = RunConfig(
        subcommand="solve",
        params=Parameters(**payload["params"]),
        init_kind=payload["init_kind"],
        tol=payload["tol"],
        max_steps=payload["max_steps"],
    )
    manifest = _solve_into(cfg, Path(payload["out_dir"]))
    return payload["beta"], manifest["gamma"], manifest["moments"]["sum_X"]


def cmd_sweep(cfg: RunConfig, workers: int | None) -> int:
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    payloads = []
    for beta in cfg.beta_list:
        p = cfg.params
        payloads.append({
            "beta": beta,
            "params": dict(
                beta=beta, n_max=p.n_max, domain_length=p.domain_length,
                cells=p.cells, area_target=p.area_target,
                dt_safety=p.dt_safety, seed=p.seed,
            ),
            "init_kind": cfg.init_kind,
            "tol": cfg.tol,
            "max_steps": cfg.max_steps,
            "out_dir": str(cfg.out_dir / f"beta_{beta:g}"),
        })
    nworkers = workers or min(len(payloads), 4)
    rows: list[tuple[float, float, float]] = []
    if nworkers <= 1:
        rows = [_sweep_worker(p) for p in payloads]
    else:
        with concurrent.futures.ProcessPoolExecutor(max_workers=nworkers) as pool:
            rows = list(pool.map(_sweep_worker, payloads))
    rows.sort(key=lambda r: r[0])
    gio.write_sweep_csv(rows, cfg.out_dir / "sweep.csv")
    for beta, gam, sx in rows:
        print(f"beta={beta:g}  gamma={gam:.8g}  sum_X={sx:.8g}")
    return EXIT_OK


def _relative_gap(a: float, b: float) -> float:
    scale = max(abs(a), abs(b), 1e-300)
    return abs(a - b) / scale


def cmd_verify(cfg: RunConfig) -> int:
    out = cfg.out_dir
    manifest = gio.read_manifest(out / "manifest.json")
    conf = manifest["config"]
    params = Parameters(
        beta=conf["beta"], n_max=conf["n_max"], domain_length=conf["domain_length"],
        cells=conf["cells"], area_target=conf["area"],
        dt_safety=conf["dt_safety"], seed=conf["seed"],
    )
    grid = Grid.from_parameters(params)
    state = gio.state_from_profile(out / "profile.csv", params)
    m = moments_of(state, grid, params)
    _, _, gam = gamma_of(state, grid, params)
    resid = residual_norm(state, grid, params)

    from .dynamics import SteadyStateReport

    report = SteadyStateReport(
        profile=state, gamma=gam, residual=resid,
        steps=manifest["steps"], converged=bool(manifest["converged"]),
        drift_area=manifest["drift"]["area"], drift_pq=manifest["drift"]["pq"],
        min_g=manifest["min_g"], tol=conf["tol"], dt=manifest["dt"], moments=m,
    )
    checks = {
        "gamma": (gam, manifest["gamma"]),
        "residual": (resid, manifest["residual"]),
        "A": (m.A, manifest["moments"]["A"]),
        "P": (m.P, manifest["moments"]["P"]),
        "sum_X": (float(np.sum(m.X)), manifest["moments"]["sum_X"]),
    }
    identities = decay = singular = None
    if report.converged:
        identities = verify_steady_identities(report, grid, params)
        decay = decay_diagnostics(report, params)
        singular = classify_singularities(report, grid, params)
        checks["identities.mass"] = (identities.mass_identity, manifest["identities"]["mass"])
        checks["decay.slope"] = (decay.slope, manifest["decay"]["slope"])
    mismatches = {
        key: {"recomputed": a, "stored": b, "gap": _relative_gap(a, b)}
        for key, (a, b) in checks.items()
        if _relative_gap(a, b) > 1e-12
    }
    augmented = gio.build_manifest(
        conf, report, identities, decay, singular, full_tables=True,
    )
    augmented["verified"] = not mismatches
    augmented["verification"] = {
        "checked": sorted(checks),
        "mismatches": mismatches,
    }
    gio.write_manifest(augmented, out / "manifest_verified.json")
    if mismatches:
        for key, info in mismatches.items():
            print(f"MISMATCH {key}: stored={info['stored']!r} recomputed={info['recomputed']!r}",
                  file=sys.stderr)
        return 1
    print(f"verify: {len(checks)} quantities reproduced (gamma={gam:.8g}, residual={resid:.3e})")
    return EXIT_OK


def cmd_converge(cfg: RunConfig) -> int:
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    rows = epsilon_convergence(
        cfg.params, cfg.eps_list, init_kind=cfg.init_kind,
        tol=cfg.tol, max_steps=cfg.max_steps,
    )
    gio.write_convergence_csv(rows, cfg.out_dir / "convergence.csv")
    for row in rows:
        print(f"eps={row.eps:g}  gamma={row.gamma:.8g}  l1_to_finest={row.l1_to_finest:.3e}")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = build_config(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        if args.subcommand == "solve":
            manifest = _solve_into(cfg, cfg.out_dir)
            print(
                f"solve: gamma={manifest['gamma']:.8g} residual={manifest['residual']:.3e} "
                f"steps={manifest['steps']}"
            )
            return EXIT_OK
        if args.subcommand == "sweep":
            return cmd_sweep(cfg, args.workers)
        if args.subcommand == "verify":
            return cmd_verify(cfg)
        if args.subcommand == "converge":
            return cmd_converge(cfg)
    except NonpositiveDenominator as exc:
        gio.write_error_record(cfg.out_dir, "NonpositiveDenominator", str(exc))
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NONPOSITIVE_DENOMINATOR
    except NotConverged as exc:
        gio.write_error_record(cfg.out_dir, "NotConverged", str(exc))
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    except (OSError, ValueError, KeyError) as exc:
        gio.write_error_record(cfg.out_dir, type(exc).__name__, str(exc))
        print(f"error: {exc}", file=sys.stderr)
        return 1
    raise AssertionError("unreachable")


if __name__ == "__main__":
    sys.exit(main())
