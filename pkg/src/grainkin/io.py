"""Serialization: profile/moments CSV exports and the JSON run manifest.

All floats are written with 17 significant digits so values round-trip
double precision exactly; rows are sorted and line endings are LF, which
makes identical runs byte-identical (the manifest's wall-clock field is the
one intentional exception).  Schema version "1".
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .diagnostics import (
    DecayDiagnostics,
    IdentityResiduals,
    SingularityReport,
    boundary_values,
)
from .dynamics import SteadyStateReport
from .model import Grid, Parameters, State

SCHEMA_VERSION = "1"

__all__ = [
    "SCHEMA_VERSION",
    "write_profile_csv",
    "read_profile_csv",
    "state_from_profile",
    "write_moments_csv",
    "read_moments_csv",
    "write_sweep_csv",
    "write_convergence_csv",
    "build_manifest",
    "write_manifest",
    "read_manifest",
    "write_error_record",
]


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def write_profile_csv(
    report: SteadyStateReport, grid: Grid, params: Parameters, path: str | Path
) -> None:
    """One row per (n, k) including the k = 0 and k = K boundary rows.

    Boundary rows carry the boundary values of the profile: the continuation
    g_n^1 for classes 2..5 (continuous at xi = 0) and zero otherwise, so
    plots can draw boundary behaviour without knowing the scheme.
    """
    state = report.profile
    g0 = boundary_values(state, params)
    lines = ["n,k,xi,g"]
    for i, n in enumerate(params.class_values):
        for k in range(params.cells + 1):
            if k == 0:
                v = g0[i]
            elif k == params.cells:
                v = 0.0
            else:
                v = state.g[i, k]
            lines.append(f"{n},{k},{_fmt(grid.xi[k])},{_fmt(v)}")
    Path(path).write_text("\n".join(lines) + "\n", newline="\n")


def read_profile_csv(path: str | Path):
    """Columns (n, k, xi, g) as arrays."""
    rows = Path(path).read_text().strip().split("\n")
    if rows[0] != "n,k,xi,g":
        raise ValueError(f"unexpected profile header {rows[0]!r}")
    n = np.empty(len(rows) - 1, dtype=np.int64)
    k = np.empty(len(rows) - 1, dtype=np.int64)
    xi = np.empty(len(rows) - 1)
    g = np.empty(len(rows) - 1)
    for j, row in enumerate(rows[1:]):
        a, b, c, d = row.split(",")
        n[j] = int(a)
        k[j] = int(b)
        xi[j] = float(c)
        g[j] = float(d)
    return n, k, xi, g


def state_from_profile(path: str | Path, params: Parameters) -> State:
    n, k, _, g = read_profile_csv(path)
    expected = params.num_classes * (params.cells + 1)
    if n.size != expected:
        raise ValueError(
            f"profile has {n.size} rows, expected {expected} for these parameters"
        )
    arr = np.zeros((params.num_classes, params.cells + 1))
    arr[n - 2, k] = g
    arr[:, 0] = 0.0
    arr[:, -1] = 0.0
    return State(arr)


def write_moments_csv(report: SteadyStateReport, params: Parameters, path: str | Path) -> None:
    """Per-class moments; lnX left empty where X vanishes."""
    X, Y = report.moments.X, report.moments.Y
    lines = ["n,X,Y,lnX"]
    for i, n in enumerate(params.class_values):
        lnx = _fmt(math.log(X[i])) if X[i] > 0.0 else ""
        lines.append(f"{n},{_fmt(X[i])},{_fmt(Y[i])},{lnx}")
    Path(path).write_text("\n".join(lines) + "\n", newline="\n")


def read_moments_csv(path: str | Path):
    rows = Path(path).read_text().strip().split("\n")
    if rows[0] != "n,X,Y,lnX":
        raise ValueError(f"unexpected moments header {rows[0]!r}")
    n, X, Y, lnX = [], [], [], []
    for row in rows[1:]:
        a, b, c, d = row.split(",")
        n.append(int(a))
        X.append(float(b))
        Y.append(float(c))
        lnX.append(float(d) if d else math.nan)
    return np.array(n), np.array(X), np.array(Y), np.array(lnX)


def write_sweep_csv(rows: list[tuple[float, float, float]], path: str | Path) -> None:
    """Per-beta summary (beta, gamma, sum of the X moments)."""
    lines = ["beta,gamma,sum_X"]
    for beta, gam, sx in rows:
        lines.append(f"{_fmt(beta)},{_fmt(gam)},{_fmt(sx)}")
    Path(path).write_text("\n".join(lines) + "\n", newline="\n")


def write_convergence_csv(rows, path: str | Path) -> None:
    lines = ["eps,gamma,l1_to_finest"]
    for row in rows:
        lines.append(f"{_fmt(row.eps)},{_fmt(row.gamma)},{_fmt(row.l1_to_finest)}")
    Path(path).write_text("\n".join(lines) + "\n", newline="\n")


# --- manifest -------------------------------------------------------------------


def _clean(x):
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else None
    if isinstance(x, (np.integer, int)):
        return int(x)
    if isinstance(x, np.ndarray):
        return [_clean(v) for v in x.tolist()]
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, dict):
        return {k: _clean(v) for k, v in x.items()}
    return x


def build_manifest(
    config: dict,
    report: SteadyStateReport,
    identities: IdentityResiduals | None = None,
    decay: DecayDiagnostics | None = None,
    singularities: SingularityReport | None = None,
    wall_seconds: float | None = None,
    full_tables: bool = False,
) -> dict:
    m = report.moments
    eps = config.get("eps", None)
    manifest = {
        "schema_version": SCHEMA_VERSION,
        "config": dict(config),
        "gamma": report.gamma,
        "gamma_num": m.gamma_num,
        "gamma_den": m.gamma_den,
        "residual": report.residual,
        "steps": report.steps,
        "converged": report.converged,
        "dt": report.dt,
        "drift": {"area": report.drift_area, "pq": report.drift_pq},
        "min_g": report.min_g,
        "moments": {
            "A": m.A,
            "P": m.P,
            "Q": m.Q,
            "sum_X": float(np.sum(m.X)),
        },
        "wall_clock_seconds": report.wall_seconds if wall_seconds is None else wall_seconds,
    }
    if identities is not None:
        manifest["identities"] = {
            "mass": identities.mass_identity,
            "polyhedral": identities.polyhedral,
            "area": identities.area,
            "x_max": float(identities.x_identity.max()),
            "y_max": float(identities.y_identity.max()),
        }
    if decay is not None:
        manifest["decay"] = {
            "tau": decay.tau,
            "slope": decay.slope,
            "window": list(decay.window),
            "nbar": decay.nbar,
            "terminal_residual": decay.terminal_residual,
        }
    if singularities is not None:
        counts: dict[str, int] = {}
        gaps = []
        for row in singularities.rows:
            counts[row.regime] = counts.get(row.regime, 0) + 1
            if row.regime == "supercritical" and row.measurable:
                gaps.append(abs(row.measured_ratio - row.predicted_ratio))
        manifest["singularities"] = {
            "regimes": counts,
            "max_ratio_gap": max(gaps) if gaps else None,
        }
    if full_tables:
        if identities is not None:
            manifest["identities"]["x_identity"] = identities.x_identity
            manifest["identities"]["y_identity"] = identities.y_identity
        if decay is not None:
            manifest["decay"]["z_classes"] = decay.z_classes
            manifest["decay"]["z"] = decay.z
            manifest["decay"]["recursion_classes"] = decay.recursion_classes
            manifest["decay"]["recursion_residual"] = decay.recursion_residual
        if singularities is not None:
            manifest["singularities"]["table"] = [
                {
                    "n": r.n,
                    "kappa": r.kappa,
                    "gamma_kappa": r.gamma_kappa,
                    "regime": r.regime,
                    "predicted_limit": r.predicted_limit,
                    "g_at_singular": r.g_at_singular,
                    "g_hat": r.g_hat,
                    "measured_ratio": r.measured_ratio,
                    "predicted_ratio": r.predicted_ratio,
                    "integrable": r.integrable,
                    "measurable": r.measurable,
                }
                for r in singularities.rows
            ]
    return _clean(manifest)


def write_manifest(manifest: dict, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", newline="\n"
    )


def read_manifest(path: str | Path) -> dict:
    return json.loads(Path(path).read_text())


def write_error_record(out_dir: str | Path, kind: str, message: str) -> None:
    try:
        write_manifest({"error": kind, "message": message}, Path(out_dir) / "error.json")
    except OSError:
        pass
