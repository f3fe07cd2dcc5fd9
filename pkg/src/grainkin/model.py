"""Problem definition: parameters, grid, state, class coupling and moments.

The model tracks number densities g_n^k of grains with topological class
n = 2..N over a uniform grid of rescaled areas xi_k = k*eps in [0, L].
Grains of class n are transported in xi with speed -(xi + 6 - n); the
tridiagonal coupling operator J exchanges grains between neighbouring
classes at rates proportional to n, and the scalar weight Gamma scales J
self-consistently so that the total area A and the combination P + eps*Q
(polyhedral defect plus its grid correction) are conserved exactly.

Index conventions used throughout the package:

* row i of a state array holds class n = i + 2, for n = 2..N;
* column k holds grid point xi_k = k*eps, for k = 0..K, where columns 0
  and K are ghost columns pinned to the boundary values (zero);
* the singular index of class n is k_n = (n-6)*K/L, which is an exact
  integer because K is a multiple of L.  All transport coefficients are
  built from the integer offsets k - k_n, so the speed, its sign, and the
  Kronecker-delta correction at the singular cell carry no rounding.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .backends import active_backend
from .errors import NonpositiveDenominator

__all__ = [
    "Parameters",
    "Grid",
    "CouplingWeights",
    "State",
    "Moments",
    "apply_coupling",
    "coupling_matrix",
    "moments",
    "gamma",
    "gamma_terms",
]


@dataclass(frozen=True)
class Parameters:
    """Full problem definition.

    beta            ratio of neighbour-switching to grain-vanishing events;
                    the conserved-quantity guarantees hold for beta in (0, 2),
                    larger values are accepted with a warning.
    n_max           maximal topological class N (integer >= 7).
    domain_length   length L of the rescaled-area domain (integer > N - 6).
    cells           number K of grid cells; must be a multiple of L so that
                    every singular point xi = n - 6 falls on a grid point.
    area_target     prescribed total area A.
    dt_safety       safety factor in (0, 1) for the stable time step.
    seed            seed for random initial data.
    """

    beta: float = 1.0
    n_max: int = 25
    domain_length: int = 20
    cells: int = 400
    area_target: float = 1.0
    dt_safety: float = 0.9
    seed: int = 0

    def __post_init__(self):
        if not self.beta > 0:
            raise ValueError(f"beta must be positive, got {self.beta}")
        if self.beta >= 2:
            warnings.warn(
                f"beta = {self.beta} >= 2: conservation and positivity guarantees "
                "only hold for beta in (0, 2)",
                stacklevel=2,
            )
        if self.n_max < 7:
            raise ValueError(f"n_max must be >= 7, got {self.n_max}")
        if self.domain_length <= self.n_max - 6:
            raise ValueError(
                f"domain_length must exceed n_max - 6 = {self.n_max - 6}, "
                f"got {self.domain_length}"
            )
        if self.cells % self.domain_length != 0:
            raise ValueError(
                f"cells ({self.cells}) must be divisible by domain_length "
                f"({self.domain_length}) so singular points are grid points"
            )
        if not 0 < self.dt_safety < 1:
            raise ValueError(f"dt_safety must be in (0, 1), got {self.dt_safety}")

    @property
    def eps(self) -> float:
        return self.domain_length / self.cells

    @property
    def num_classes(self) -> int:
        return self.n_max - 1

    @property
    def class_values(self) -> np.ndarray:
        """Topological classes n = 2..N."""
        return np.arange(2, self.n_max + 1)


@dataclass(frozen=True, eq=False)
class Grid:
    """Uniform grid of cell centers xi_k = k*eps, k = 0..K."""

    eps: float
    cells: int
    domain_length: int
    xi: np.ndarray = field(repr=False)

    @classmethod
    def from_parameters(cls, params: Parameters) -> "Grid":
        eps = params.eps
        xi = np.arange(params.cells + 1, dtype=np.float64) * eps
        return cls(eps=eps, cells=params.cells, domain_length=params.domain_length, xi=xi)

    def singular_index(self, n: int) -> int:
        """k_n = (n-6)*K/L; xi_{k_n} = n - 6.  May be <= 0 for n <= 6."""
        return (n - 6) * self.cells // self.domain_length


@dataclass(frozen=True, eq=False)
class CouplingWeights:
    """Diagonal moduli kappa_n of the coupling operator and the tail rate tau."""

    kappa: np.ndarray
    tau: float

    @classmethod
    def from_parameters(cls, params: Parameters) -> "CouplingWeights":
        beta, N = params.beta, params.n_max
        n = params.class_values.astype(np.float64)
        kappa = (2.0 * beta + 1.0) * n
        kappa[0] = 2.0 * beta
        kappa[-1] = (beta + 1.0) * N
        return cls(kappa=kappa, tau=(1.0 + beta) / beta)


class State:
    """Number densities on the grid, value-semantic.

    ``g`` has shape (N-1, K+1); columns 0 and K are ghost columns held at
    zero.  The scheme never reads the k = 0 ghost for classes n <= 6 (their
    transport speed at k = 1 points rightward), and uses zero for n >= 7
    and at k = K, so zero padding realizes the boundary conditions.
    """

    __slots__ = ("g",)

    def __init__(self, g: np.ndarray, validate: bool = True):
        g = np.asarray(g, dtype=np.float64)
        if validate:
            if g.ndim != 2:
                raise ValueError("state array must be 2-D (classes x grid points)")
            if np.any(g[:, 0] != 0.0) or np.any(g[:, -1] != 0.0):
                raise ValueError("ghost columns must be zero")
            if not np.all(np.isfinite(g)):
                raise ValueError("state contains non-finite entries")
        self.g = g

    @classmethod
    def zeros(cls, params: Parameters) -> "State":
        return cls(np.zeros((params.num_classes, params.cells + 1)), validate=False)

    @classmethod
    def from_interior(cls, interior: np.ndarray, params: Parameters) -> "State":
        g = np.zeros((params.num_classes, params.cells + 1))
        g[:, 1:-1] = interior
        return cls(g)

    @property
    def interior(self) -> np.ndarray:
        """View of the evolving entries g_n^k, k = 1..K-1."""
        return self.g[:, 1:-1]

    def copy(self) -> "State":
        return State(self.g.copy(), validate=False)

    def is_nonnegative(self) -> bool:
        return bool(np.all(self.interior >= 0.0))


@dataclass(frozen=True, eq=False)
class Moments:
    """Scalar diagnostics of a state.

    X_n and Y_n are the discrete zeroth and first moments per class, Q the
    sign-weighted count with sgn(0) = 0 at singular cells, A = sum(Y),
    P = sum((n-6) X).  The coupling-weight pieces are included; ``gamma``
    is None when the denominator is nonpositive (e.g. for the zero state).
    """

    X: np.ndarray
    Y: np.ndarray
    Q: float
    A: float
    P: float
    gamma_num: float
    gamma_den: float
    gamma: float | None


# --- stencil ---------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Stencil:
    """Precomputed scheme coefficients for one (Parameters, Grid) pair.

    cp[i,k] = (xi_k + 6 - n)_+ / eps and cm[i,k] = (xi_k + 6 - n)_- / eps
    are exact integers (built from k - k_n); sign[i,k] = sgn(xi_k + 6 - n)
    with sgn(0) = 0 exactly at the singular cells.
    """

    cp: np.ndarray
    cm: np.ndarray
    sign: np.ndarray
    kd: np.ndarray        # singular index per class row (may be out of range)
    jup: np.ndarray       # superdiagonal of J: (beta+1)(n+1), zero in last row
    jlo: np.ndarray       # subdiagonal of J: beta(n-1), zero in first row
    kappa: np.ndarray     # diagonal moduli kappa_n
    wsix: np.ndarray      # 6 - n per class
    nsix: np.ndarray      # n - 6 per class
    numw: np.ndarray      # Gamma numerator weights (6-n)(6-n-eps), zero for n >= 6
    xi: np.ndarray
    eps: float


@lru_cache(maxsize=32)
def _stencil_cached(params: Parameters) -> Stencil:
    grid = Grid.from_parameters(params)
    beta, N, eps = params.beta, params.n_max, params.eps
    nvals = params.class_values
    kd = np.array([grid.singular_index(int(n)) for n in nvals], dtype=np.int64)
    koff = np.arange(params.cells + 1, dtype=np.int64)[None, :] - kd[:, None]
    cp = np.maximum(koff, 0).astype(np.float64)
    cm = np.maximum(-koff, 0).astype(np.float64)
    sign = np.sign(koff).astype(np.float64)

    cw = CouplingWeights.from_parameters(params)
    nf = nvals.astype(np.float64)
    jup = (beta + 1.0) * (nf + 1.0)
    jup[-1] = 0.0
    jlo = beta * (nf - 1.0)
    jlo[0] = 0.0
    wsix = 6.0 - nf
    # Gamma numerator weights (6-n)(6-n-eps): only classes 2..5 contribute.
    numw = np.where(nvals <= 5, wsix * (wsix - eps), 0.0)
    return Stencil(
        cp=cp, cm=cm, sign=sign, kd=kd,
        jup=jup, jlo=jlo, kappa=cw.kappa,
        wsix=wsix, nsix=-wsix, numw=numw,
        xi=grid.xi, eps=eps,
    )


def stencil_for(params: Parameters, grid: Grid | None = None) -> Stencil:
    st = _stencil_cached(params)
    if grid is not None and (grid.cells != params.cells or grid.eps != params.eps):
        raise ValueError("grid does not match parameters")
    return st


def _check_state(state: State, params: Parameters) -> None:
    expected = (params.num_classes, params.cells + 1)
    if state.g.shape != expected:
        raise ValueError(f"state shape {state.g.shape} does not match {expected}")


# --- coupling operator -----------------------------------------------------


def coupling_matrix(params: Parameters) -> np.ndarray:
    """Dense (N-1)x(N-1) matrix of the coupling operator J."""
    st = stencil_for(params)
    nc = params.num_classes
    J = np.zeros((nc, nc))
    J[np.arange(nc), np.arange(nc)] = -st.kappa
    J[np.arange(nc - 1), np.arange(1, nc)] = st.jup[:-1]
    J[np.arange(1, nc), np.arange(nc - 1)] = st.jlo[1:]
    return J


def apply_coupling(f: np.ndarray, params: Parameters) -> np.ndarray:
    """Apply J to a vector (or columnwise to a matrix) indexed by n = 2..N.

    The three-band stencil balances gains and losses between neighbouring
    classes, so the component sum of the result vanishes up to rounding.
    """
    f = np.asarray(f, dtype=np.float64)
    if f.shape[0] != params.num_classes:
        raise ValueError(
            f"expected leading dimension {params.num_classes}, got {f.shape[0]}"
        )
    st = stencil_for(params)
    out = -st.kappa.reshape(-1, *([1] * (f.ndim - 1))) * f
    out[:-1] += st.jup[:-1].reshape(-1, *([1] * (f.ndim - 1))) * f[1:]
    out[1:] += st.jlo[1:].reshape(-1, *([1] * (f.ndim - 1))) * f[:-1]
    return out


# --- moments and coupling weight -------------------------------------------


def moments(state: State, grid: Grid, params: Parameters) -> Moments:
    """All discrete moments of a state, plus the coupling-weight pieces."""
    _check_state(state, params)
    st = stencil_for(params, grid)
    be = active_backend()
    X, Y, Q = be.moments_arrays(state.g, st.xi, st.sign, st.eps)
    A = math.fsum(Y)
    P = math.fsum(st.nsix * X)
    num, den = be.gamma_terms(
        state.g, X, st.sign, st.eps, st.jup, st.jlo, st.kappa, st.wsix, st.numw
    )
    return Moments(
        X=X, Y=Y, Q=Q, A=A, P=P,
        gamma_num=num, gamma_den=den,
        gamma=(num / den) if den > 0.0 else None,
    )


def gamma_terms(state: State, grid: Grid, params: Parameters) -> tuple[float, float]:
    """Numerator and denominator of the coupling weight (no positivity check)."""
    _check_state(state, params)
    st = stencil_for(params, grid)
    be = active_backend()
    X, _, _ = be.moments_arrays(state.g, st.xi, st.sign, st.eps)
    return be.gamma_terms(
        state.g, X, st.sign, st.eps, st.jup, st.jlo, st.kappa, st.wsix, st.numw
    )


def gamma(state: State, grid: Grid, params: Parameters) -> tuple[float, float, float]:
    """Self-consistent coupling weight (num, den, num/den).

    Raises NonpositiveDenominator when den <= 0; the caller must abort the
    run since the conserved-quantity structure is lost outside that regime.
    """
    num, den = gamma_terms(state, grid, params)
    if den <= 0.0:
        raise NonpositiveDenominator(num, den)
    return num, den, num / den
