"""Verification of converged profiles.

Every identity the steady states must satisfy is recomputed here from the
profile alone: the boundary-mass identity, the per-class moment identities,
the backward recursion of the tail ratios z_n, the classification of the
profile near its singular points, and a direct Runge-Kutta re-integration
of the stationary ODE between singular points.  Convergence studies in the
grid spacing and in the maximal class close the loop empirically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dynamics import SteadyStateReport, initial_state, integrate_to_steady
from .errors import EmptyWindow, IntervalTouchesSingularity, TooCloseToBoundary
from .model import Grid, Parameters, State, apply_coupling, stencil_for

__all__ = [
    "IdentityResiduals",
    "DecayDiagnostics",
    "SingularityRow",
    "SingularityReport",
    "verify_steady_identities",
    "phi_map",
    "decay_diagnostics",
    "classify_singularities",
    "ode_oracle",
    "EpsRow",
    "epsilon_convergence",
    "NRow",
    "n_convergence",
    "boundary_values",
]


@dataclass(frozen=True, eq=False)
class IdentityResiduals:
    """Residuals of the steady-state identities (all >= 0).

    mass_identity and polyhedral sit at rounding/tolerance level for a
    converged profile; x_identity and y_identity carry the O(eps) grid
    corrections of the discrete moment balances.
    """

    mass_identity: float
    x_identity: np.ndarray
    y_identity: np.ndarray
    polyhedral: float
    area: float


def boundary_values(state: State, params: Parameters) -> np.ndarray:
    """Profile values at xi = 0: continuation g_n^1 for n <= 5, zero above."""
    g0 = np.zeros(params.num_classes)
    g0[:4] = state.g[:4, 1]
    return g0


def verify_steady_identities(
    report: SteadyStateReport, grid: Grid, params: Parameters
) -> IdentityResiduals:
    if not report.converged:
        raise ValueError("identity verification expects a converged report")
    m = report.moments
    gam = report.gamma
    nsix = params.class_values - 6.0
    g1 = report.profile.g[:, 1]
    mass = abs(float((-nsix[:4]) @ g1[:4]) - math.fsum(m.X))
    g0 = boundary_values(report.profile, params)
    x_res = np.abs((-nsix) * g0 - m.X - gam * apply_coupling(m.X, params))
    y_res = np.abs((-nsix) * m.X - gam * apply_coupling(m.Y, params))
    return IdentityResiduals(
        mass_identity=mass,
        x_identity=x_res,
        y_identity=y_res,
        polyhedral=abs(m.P),
        area=abs(m.A - params.area_target),
    )


# --- tail decay ---------------------------------------------------------------


def phi_map(z: np.ndarray | float, tau: float):
    """Recursion map 1 + tau - tau/z; fixed points z = 1 and z = tau."""
    return 1.0 + tau - tau / z


@dataclass(frozen=True, eq=False)
class DecayDiagnostics:
    """Tail-decay diagnostics of a converged profile.

    z[n] = (n-1) X_{n-1} / (n X_n) should relax onto the stable fixed point
    tau of phi_map as n grows; the recursion residuals measure how far the
    measured ratios are from the backward recursion, and the slope of
    ln X_n over the fit window should approach -ln tau.
    """

    z_classes: np.ndarray            # n = 3..N
    z: np.ndarray
    tau: float
    recursion_classes: np.ndarray    # n = 6..N-1
    recursion_residual: np.ndarray
    terminal_residual: float
    slope: float
    window: tuple[int, int]
    nbar: int


def default_decay_window(params: Parameters) -> tuple[int, int]:
    # head classes feel the boundary, the last class has a modified kappa
    lo, hi = max(12, 6 + 3), params.n_max - 3
    if hi - lo < 1:
        # tiny class counts: fall back to the widest usable window
        lo, hi = 3, params.n_max
    return lo, hi


def smallest_integer_above(x: float) -> int:
    return math.floor(x) + 1


def decay_diagnostics(
    report: SteadyStateReport,
    params: Parameters,
    window: tuple[int, int] | None = None,
) -> DecayDiagnostics:
    X = report.moments.X
    gam = report.gamma
    beta = params.beta
    N = params.n_max
    tau = (1.0 + beta) / beta
    nvals = params.class_values.astype(np.float64)

    if window is None:
        window = default_decay_window(params)
    lo, hi = int(window[0]), int(window[1])
    sel = (nvals >= lo) & (nvals <= hi)
    if sel.sum() < 2:
        raise EmptyWindow(f"decay window [{lo}, {hi}] holds fewer than two classes")
    if np.any(X[sel] <= 0.0):
        raise ValueError("X_n must be positive on the fit window")

    with np.errstate(divide="ignore", invalid="ignore"):
        z = (nvals[:-1] * X[:-1]) / (nvals[1:] * X[1:])
    z_classes = params.class_values[1:]

    # backward recursion residuals for n = 6..N-1
    rec_classes = np.arange(6, N)
    zn = z[z_classes.searchsorted(rec_classes)]
    znp1 = z[z_classes.searchsorted(rec_classes + 1)]
    rec = zn - phi_map(znp1, tau) + 1.0 / (gam * beta * rec_classes)
    z_N = z[-1]
    terminal = abs(z_N - tau + 1.0 / (gam * beta * N))

    slope = float(np.polyfit(nvals[sel], np.log(X[sel]), 1)[0])
    nbar = smallest_integer_above(12.0 * (1.0 + 2.0 * beta) ** 2)
    return DecayDiagnostics(
        z_classes=z_classes,
        z=z,
        tau=tau,
        recursion_classes=rec_classes,
        recursion_residual=rec,
        terminal_residual=terminal,
        slope=slope,
        window=(lo, hi),
        nbar=nbar,
    )


# --- singular points -----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SingularityRow:
    n: int
    kappa: float
    gamma_kappa: float
    regime: str                 # supercritical | critical | subcritical | non-integrable
    predicted_limit: float      # G_n(n-6)/(Gamma kappa_n - 2), nan unless supercritical
    g_at_singular: float        # g_n^{k_n}
    g_hat: float                # two-sided extrapolation of g_n to xi = n-6, nan at boundary
    measured_ratio: float
    predicted_ratio: float      # (Gamma kappa_n - 2)/(Gamma kappa_n - 1)
    integrable: bool
    measurable: bool            # extrapolated value above the solver noise floor


@dataclass(frozen=True, eq=False)
class SingularityReport:
    rows: list[SingularityRow]

    def by_class(self, n: int) -> SingularityRow:
        for row in self.rows:
            if row.n == n:
                return row
        raise KeyError(n)


def regime_of(gamma_kappa: float) -> str:
    if gamma_kappa > 2.0:
        return "supercritical"
    if gamma_kappa == 2.0:
        return "critical"
    if gamma_kappa > 1.0:
        return "subcritical"
    return "non-integrable"


def extrapolate_to_singular(state: State, params: Parameters, grid: Grid, n: int) -> float:
    """Average of the two one-sided linear extrapolations of g_n to xi = n-6.

    The one-sided limits bracket the continuous value in the regime where
    the ratio test applies; raises TooCloseToBoundary when the stencil
    k_n +- 2 leaves the interior.
    """
    kn = grid.singular_index(n)
    K = params.cells
    if kn - 2 < 1 or kn + 2 > K - 1:
        raise TooCloseToBoundary(f"extrapolation stencil for n={n} leaves the grid")
    row = state.g[n - 2]
    left = 2.0 * row[kn - 1] - row[kn - 2]
    right = 2.0 * row[kn + 1] - row[kn + 2]
    return 0.5 * (left + right)


def classify_singularities(
    report: SteadyStateReport, grid: Grid, params: Parameters
) -> SingularityReport:
    """Regime of every class n >= 6 at its singular point xi = n - 6.

    The coupling sources G_n are read from the neighbour classes at the
    singular grid point (their profiles are continuous there); classes whose
    extrapolation stencil leaves the grid report nan ratios.
    """
    if not report.converged:
        raise ValueError("singularity classification expects a converged report")
    st = stencil_for(params, grid)
    gam = report.gamma
    g = report.profile.g
    g0 = boundary_values(report.profile, params)
    # below this the ratio is dominated by the residual of the relaxation
    noise_floor = 100.0 * report.residual * float(np.abs(g).max(initial=0.0))
    rows = []
    for n in range(6, params.n_max + 1):
        i = n - 2
        kap = float(st.kappa[i])
        gk = gam * kap
        kn = grid.singular_index(n)

        def class_value_at(m: int, k: int) -> float:
            if m < 2 or m > params.n_max:
                return 0.0
            if k < 1:
                return float(g0[m - 2]) if k == 0 else 0.0
            if k > params.cells - 1:
                return 0.0
            return float(g[m - 2, k])

        G_n = gam * (
            params.beta * (n - 1) * class_value_at(n - 1, kn)
            + (params.beta + 1.0) * (n + 1) * class_value_at(n + 1, kn)
        )
        predicted_limit = G_n / (gk - 2.0) if gk > 2.0 else float("nan")
        g_at = class_value_at(n, kn)
        try:
            g_hat = extrapolate_to_singular(report.profile, params, grid, n)
            measured = g_at / g_hat if g_hat != 0.0 else float("nan")
        except TooCloseToBoundary:
            g_hat = float("nan")
            measured = float("nan")
        rows.append(
            SingularityRow(
                n=n,
                kappa=kap,
                gamma_kappa=gk,
                regime=regime_of(gk),
                predicted_limit=predicted_limit,
                g_at_singular=g_at,
                g_hat=g_hat,
                measured_ratio=measured,
                predicted_ratio=(gk - 2.0) / (gk - 1.0) if gk > 2.0 else float("nan"),
                integrable=gk > 1.0,
                measurable=math.isfinite(measured) and abs(g_hat) > noise_floor,
            )
        )
    return SingularityReport(rows=rows)


# --- stationary ODE oracle ------------------------------------------------------


def ode_oracle(
    report: SteadyStateReport,
    n: int,
    interval: tuple[float, float],
    grid: Grid,
    params: Parameters,
) -> float:
    """Max deviation between the profile and a re-integration of its ODE.

    Integrates the stationary transport balance for class n across the
    interval with classical 4th-order steps of size eps/10 (grid-aligned),
    reading the neighbour classes from the discrete profile by piecewise
    linear interpolation and starting from the profile value at the left
    endpoint.  O(eps) deviations are expected for a converged profile.
    """
    a, b = float(interval[0]), float(interval[1])
    N = params.n_max
    eps = params.eps
    if not (0.0 < a < b < N - 6.0):
        raise IntervalTouchesSingularity(
            f"interval [{a}, {b}] must sit strictly inside (0, {N - 6})"
        )
    for p in (n - 7.0, n - 6.0, n - 5.0):
        if a - 2.0 * eps <= p <= b + 2.0 * eps:
            raise IntervalTouchesSingularity(
                f"interval [{a}, {b}] comes within 2*eps of the excluded point {p}"
            )

    st = stencil_for(params, grid)
    i = n - 2
    gam = report.gamma
    g = report.profile.g
    xi = st.xi
    g0 = boundary_values(report.profile, params)

    def neighbour(m: int) -> np.ndarray:
        if m < 2 or m > N:
            return np.zeros_like(xi)
        vals = g[m - 2].copy()
        vals[0] = g0[m - 2]
        vals[-1] = 0.0
        return vals

    up = neighbour(n + 1)
    lo = neighbour(n - 1)
    cu = gam * st.jup[i]
    cl = gam * st.jlo[i]
    gk = gam * st.kappa[i]
    offset = 6.0 - n

    def source(x: float) -> float:
        return cu * np.interp(x, xi, up) + cl * np.interp(x, xi, lo)

    def f(x: float, y: float) -> float:
        return ((gk - 2.0) * y - source(x)) / (x + offset)

    def rk4_segment(x0: float, y0: float, x1: float) -> float:
        length = x1 - x0
        nsub = max(1, math.ceil(length / (eps / 10.0) - 1e-12))
        # keep nodes off the reduced-smoothness points n-8 and n-4
        for _ in range(2):
            h = length / nsub
            nodes = x0 + h * np.arange(nsub + 1)
            bad = False
            for p in (n - 8.0, n - 4.0):
                if np.any(np.abs(nodes - p) < 1e-9) or np.any(
                    np.abs(nodes[:-1] + 0.5 * h - p) < 1e-9
                ):
                    bad = True
            if not bad:
                break
            nsub += 1
        h = length / nsub
        y = y0
        x = x0
        for _ in range(nsub):
            k1 = f(x, y)
            k2 = f(x + 0.5 * h, y + 0.5 * h * k1)
            k3 = f(x + 0.5 * h, y + 0.5 * h * k2)
            k4 = f(x + h, y + h * k3)
            y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            x += h
        return y

    # walk grid point to grid point so the comparison lands on exact samples
    k_first = math.ceil(a / eps - 1e-12)
    k_last = math.floor(b / eps + 1e-12)
    own = g[i].copy()
    own[0] = g0[i]
    y = float(np.interp(a, xi, own))
    x_cur = a
    deviation = 0.0
    for k in range(k_first, k_last + 1):
        xk = xi[k]
        if xk > x_cur:
            y = rk4_segment(x_cur, y, xk)
            x_cur = xk
        deviation = max(deviation, abs(y - g[i, k]))
    return deviation


# --- convergence studies ---------------------------------------------------------


@dataclass(frozen=True)
class EpsRow:
    eps: float
    gamma: float
    l1_to_finest: float


def _default_solver(init_kind: str, tol: float, max_steps: int):
    def solve(params: Parameters) -> SteadyStateReport:
        grid = Grid.from_parameters(params)
        init = initial_state(params, grid, kind=init_kind)
        return integrate_to_steady(init, grid, params, tol=tol, max_steps=max_steps)

    return solve


def epsilon_convergence(
    params: Parameters,
    eps_list: list[float],
    init_kind: str = "random",
    tol: float = 1e-9,
    max_steps: int = 10_000_000,
    solver=None,
) -> list[EpsRow]:
    """Solve at several grid spacings and compare profiles on the coarsest grid.

    All spacings must be commensurate (every K a multiple of the coarsest and
    a multiple of L); profiles are restricted by sampling the piecewise
    constant data at the coarse cell centres, then compared to the finest in
    a weighted l1 norm.
    """
    if not eps_list:
        raise ValueError("eps_list must be nonempty")
    L = params.domain_length
    cells = []
    for e in eps_list:
        K = round(L / e)
        if abs(K * e - L) > 1e-9 * L or K % L != 0:
            raise ValueError(f"eps={e} does not give a grid with K a multiple of L={L}")
        cells.append(K)
    order = np.argsort(cells)          # coarse -> fine
    cells = [cells[j] for j in order]
    eps_sorted = [L / k for k in cells]
    k_coarse, k_fine = cells[0], cells[-1]
    for K in cells:
        if K % k_coarse != 0 or k_fine % K != 0:
            raise ValueError("grid spacings must be commensurate for restriction")

    if solver is None:
        solver = _default_solver(init_kind, tol, max_steps)
    restricted = []
    gammas = []
    for K in cells:
        p = Parameters(
            beta=params.beta, n_max=params.n_max, domain_length=L, cells=K,
            area_target=params.area_target, dt_safety=params.dt_safety,
            seed=params.seed,
        )
        rep = solver(p)
        stride = K // k_coarse
        restricted.append(rep.profile.g[:, stride::stride][:, : k_coarse - 1])
        gammas.append(rep.gamma)
    eps_c = L / k_coarse
    fine = restricted[-1]
    rows = [
        EpsRow(eps=eps_sorted[j], gamma=gammas[j],
               l1_to_finest=float(eps_c * np.abs(restricted[j] - fine).sum()))
        for j in range(len(cells))
    ]
    return rows


@dataclass(frozen=True)
class NRow:
    n_max: int
    gamma: float


def n_convergence(
    params: Parameters,
    n_list: list[int],
    init_kind: str = "random",
    tol: float = 1e-9,
    max_steps: int = 10_000_000,
    solver=None,
) -> list[NRow]:
    """Gamma for increasing maximal class at fixed grid spacing."""
    if solver is None:
        solver = _default_solver(init_kind, tol, max_steps)
    rows = []
    for N in sorted(n_list):
        p = Parameters(
            beta=params.beta, n_max=N, domain_length=params.domain_length,
            cells=params.cells, area_target=params.area_target,
            dt_safety=params.dt_safety, seed=params.seed,
        )
        rep = solver(p)
        rows.append(NRow(n_max=N, gamma=rep.gamma))
    return rows
