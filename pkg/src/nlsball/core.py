"""Radial grids, r^{N-1}-weighted quadrature, the discrete radial Laplacian,
and the principal Dirichlet eigenpair of the unit ball.

All integrals over the ball B_R in R^N reduce to weighted line integrals,
    int_{B_R} f dx = omega_N * int_0^R f(r) r^{N-1} dr,
with omega_N = |boundary of B_1|.  Quadrature weights are interpolatory
(Simpson-type, fourth order on uniform grids); the Laplacian is the
second-order conservative three-point stencil, symmetric with respect to
the finite-volume cell measure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy.linalg import solve_banded
from scipy.special import jv
from scipy.optimize import brentq

from .errors import ParameterError, SolverError


class Regime(Enum):
    SUBCRITICAL = "subcritical"
    L2CRITICAL = "L2critical"
    SUPERCRITICAL = "supercritical"


def surface_measure(n_dim: int) -> float:
    """|boundary of the unit ball| in R^N: 2 pi^{N/2} / Gamma(N/2)."""
    return 2.0 * math.pi ** (n_dim / 2.0) / math.gamma(n_dim / 2.0)


def ball_volume(n_dim: int) -> float:
    return surface_measure(n_dim) / n_dim


@lru_cache(maxsize=None)
def dirichlet_lambda1_exact(n_dim: int) -> float:
    """First Dirichlet eigenvalue of -Laplace on the unit ball.

    Equals the squared first positive zero of the Bessel function J_nu with
    nu = N/2 - 1 (radial eigenfunction r^{-nu} J_nu(sqrt(lambda) r)).
    """
    nu = n_dim / 2.0 - 1.0
    x = max(abs(nu), 0.5)
    f = lambda t: jv(nu, t)
    fx = f(x)
    step = 0.1
    while fx == 0.0:
        x += 1e-3
        fx = f(x)
    t = x
    for _ in range(10000):
        t_next = t + step
        if f(t_next) * fx < 0.0:
            root = brentq(f, t, t_next, xtol=1e-14, rtol=1e-15)
            return root * root
        t = t_next
    raise SolverError("no Bessel zero located", order=nu)


@dataclass(frozen=True)
class ProblemParams:
    """Dimension and nonlinearity exponent, with criticality bookkeeping."""

    N: int
    p: float

    def __post_init__(self):
        if not isinstance(self.N, int) or self.N < 1:
            raise ParameterError(f"dimension must be an integer >= 1, got {self.N!r}")
        limit = self.sobolev_limit
        if not (1.0 < self.p < limit):
            raise ParameterError(
                f"exponent p={self.p} outside admissible range (1, {limit})"
            )

    @property
    def sobolev_limit(self) -> float:
        """2* - 1, i.e. (N+2)/(N-2) for N >= 3 and +inf for N <= 2."""
        if self.N <= 2:
            return math.inf
        return (self.N + 2.0) / (self.N - 2.0)

    @property
    def critical_p(self) -> float:
        return 1.0 + 4.0 / self.N

    @property
    def regime(self) -> Regime:
        pc = self.critical_p
        if self.p == pc:
            return Regime.L2CRITICAL
        return Regime.SUBCRITICAL if self.p < pc else Regime.SUPERCRITICAL

    @property
    def omega(self) -> float:
        return surface_measure(self.N)


def _interpolatory_weights(nodes: np.ndarray, n_dim: int) -> np.ndarray:
    """Weights w with sum(w*f(nodes)) ~ int f(r) r^{N-1} dr.

    Composite Simpson applied to the weighted integrand f * r^{N-1}: panels
    of two intervals, with a four-node Newton-Cotes closing panel when the
    interval count is odd.  Exact whenever f * r^{N-1} is a cubic on each
    panel, so the moments int r^k dr (k <= N+2 per panel degree) come out
    exactly; fourth-order otherwise.  Supports mildly graded nodes.
    """
    n = len(nodes)
    w = np.zeros(n)

    def panel(idx):
        xs = nodes[list(idx)]
        # interpolatory weights for int_{xs[0]}^{xs[-1]} P(r) dr on the
        # panel's nodes, computed against monomials centered at the midpoint
        a, b = xs[0], xs[-1]
        c = 0.5 * (a + b)
        k = len(xs)
        V = np.vander(xs - c, k, increasing=True).T
        mom = np.array(
            [((b - c) ** (j + 1) - (a - c) ** (j + 1)) / (j + 1) for j in range(k)]
        )
        return np.linalg.solve(V, mom)

    m = n - 1
    stop = m if m % 2 == 0 else m - 3
    for i in range(0, stop, 2):
        w[i : i + 3] += panel((i, i + 1, i + 2))
    if m % 2 == 1:
        w[m - 3 : m + 1] += panel((m - 3, m - 2, m - 1, m))
    return w * nodes ** (n_dim - 1)


@dataclass(frozen=True)
class RadialGrid:
    """Nodes 0 = r_0 < ... < r_{n-1} = R with r^{N-1}-weighted quadrature."""

    nodes: np.ndarray
    weights: np.ndarray
    omega_n: float
    n_dim: int

    def __post_init__(self):
        self.nodes.setflags(write=False)
        self.weights.setflags(write=False)

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def radius(self) -> float:
        return float(self.nodes[-1])

    @property
    def spacing(self) -> float:
        return float(self.nodes[1] - self.nodes[0])

    def quad(self, samples: np.ndarray) -> float:
        """int_0^R samples(r) r^{N-1} dr (no surface factor)."""
        return float(self.weights @ samples)

    def integrate(self, samples: np.ndarray) -> float:
        """omega_N * int_0^R samples(r) r^{N-1} dr = integral over the ball."""
        return self.omega_n * self.quad(samples)

    def cell_volumes(self) -> np.ndarray:
        """Finite-volume cell measures (r_{i+1/2}^N - r_{i-1/2}^N)/N.

        The conservative Laplacian below is symmetric with respect to this
        diagonal measure; it is itself a second-order quadrature rule.
        """
        r = self.nodes
        faces = np.empty(len(r) + 1)
        faces[0] = r[0]
        faces[-1] = r[-1]
        faces[1:-1] = 0.5 * (r[1:] + r[:-1])
        return (faces[1:] ** self.n_dim - faces[:-1] ** self.n_dim) / self.n_dim


def make_grid(params: ProblemParams, n_nodes: int, R: float = 1.0,
              grading: float = 1.0) -> RadialGrid:
    """Uniform (default) or power-graded radial grid on [0, R]."""
    if n_nodes < 16:
        raise ParameterError(f"n_nodes must be >= 16, got {n_nodes}")
    if not (R > 0.0 and math.isfinite(R)):
        raise ParameterError(f"radius must be positive and finite, got {R}")
    if not (0.25 <= grading <= 4.0):
        raise ParameterError(f"grading exponent {grading} outside [0.25, 4]")
    s = np.linspace(0.0, 1.0, n_nodes)
    nodes = R * s**grading if grading != 1.0 else R * s
    weights = _interpolatory_weights(nodes, params.N)
    if weights.min() < -1e-15 * weights.max():
        raise ParameterError("grading too strong: negative quadrature weights")
    return RadialGrid(nodes=nodes, weights=np.maximum(weights, 0.0),
                      omega_n=params.omega, n_dim=params.N)


@dataclass(frozen=True)
class RadialProfile:
    """A radial function sampled on a RadialGrid, with its boundary slope."""

    grid: RadialGrid
    values: np.ndarray
    boundary_derivative: float

    def __post_init__(self):
        if len(self.values) != self.grid.n_nodes:
            raise ParameterError("profile length does not match grid")
        self.values.setflags(write=False)

    def derivative_values(self) -> np.ndarray:
        """Nodal du/dr by second-order finite differences."""
        return np.gradient(self.values, self.grid.nodes, edge_order=2)

    def l2_norm_sq(self) -> float:
        return self.grid.integrate(self.values**2)


def integrate(profile: RadialProfile, transform: Callable[[np.ndarray], np.ndarray]) -> float:
    """omega_N * int_0^R g(u(r)) r^{N-1} dr for a pointwise map g."""
    samples = np.asarray(transform(profile.values), dtype=float)
    out = profile.grid.integrate(samples)
    if not math.isfinite(out):
        raise ArithmeticError("integral overflowed or is undefined")
    return out


def grad_norm_sq(profile: RadialProfile) -> float:
    """omega_N * int_0^R (u'(r))^2 r^{N-1} dr via the nodal derivative."""
    d = profile.derivative_values()
    return profile.grid.integrate(d * d)


def radial_laplacian_tridiag(grid: RadialGrid):
    """Conservative three-point discretization A of -Laplace (radial part).

    Returns (lower, diag, upper, vol) for the operator acting on the
    unknowns at nodes 0..n-2 (the last node is a Dirichlet boundary).  Row
    0 encodes the r=0 symmetry u'(0)=0 through the flux form; the matrix is
    symmetric under the cell measure `vol`:  vol_i A_ij = vol_j A_ji.
    """
    r = grid.nodes
    n = grid.n_nodes
    m = n - 1  # unknowns
    nd = grid.n_dim
    vol = grid.cell_volumes()[:m]
    faces = 0.5 * (r[1:] + r[:-1])  # n-1 interior faces
    h = np.diff(r)
    cond = faces ** (nd - 1) / h  # face conductances
    diag = np.zeros(m)
    lower = np.zeros(m - 1)
    upper = np.zeros(m - 1)
    diag[0] = cond[0] / vol[0]
    upper[0] = -cond[0] / vol[0]
    for i in range(1, m):
        diag[i] = (cond[i - 1] + cond[i]) / vol[i]
        lower[i - 1] = -cond[i - 1] / vol[i]
        if i < m - 1:
            upper[i] = -cond[i] / vol[i]
    # upper[m-1] would couple to the Dirichlet node and is dropped
    return lower, diag, upper, vol


def apply_radial_laplacian(grid: RadialGrid, values: np.ndarray) -> np.ndarray:
    """(-Laplace u) at nodes 0..n-2 for a Dirichlet profile (u[n-1]=0)."""
    lower, diag, upper, _ = radial_laplacian_tridiag(grid)
    y = values[: grid.n_nodes - 1]
    out = diag * y
    out[:-1] += upper * y[1:]
    out[1:] += lower * y[:-1]
    return out


def _banded(lower, diag, upper):
    m = len(diag)
    ab = np.zeros((3, m), dtype=np.result_type(diag, 1.0))
    ab[0, 1:] = upper
    ab[1, :] = diag
    ab[2, :-1] = lower
    return ab


@dataclass(frozen=True)
class EigenPair:
    """Principal Dirichlet eigenvalue and positive L2-normalized eigenfunction."""

    lambda1: float
    phi1: RadialProfile


def principal_eigenpair(params: ProblemParams, grid: RadialGrid,
                        tol: float = 1e-12, max_iter: int = 500) -> EigenPair:
    """Smallest eigenvalue of the radial Dirichlet Laplacian on the grid.

    Inverse power iteration on the conservative tridiagonal operator,
    stopping when the Rayleigh-quotient residual falls below `tol`.
    """
    lower, diag, upper, vol = radial_laplacian_tridiag(grid)
    ab = _banded(lower, diag, upper)
    m = len(diag)

    def matvec(x):
        out = diag * x
        out[:-1] += upper * x[1:]
        out[1:] += lower * x[:-1]
        return out

    x = 1.0 - grid.nodes[:m] ** 2  # smooth positive seed
    x /= math.sqrt(vol @ x**2)
    # the attainable residual floor is ~eps * ||A||; iterate the vector all
    # the way down to it (the Rayleigh stall guard stops at roundoff)
    op_scale = float(np.max(np.abs(diag)))
    floor = 2.0 * np.finfo(float).eps * op_scale
    theta = float("nan")
    stall = 0
    res = math.inf
    for it in range(max_iter):
        y = solve_banded((1, 1), ab, x)
        y /= math.sqrt(vol @ y**2)
        Ay = matvec(y)
        theta_new = float(vol @ (y * Ay))
        res_new = math.sqrt(float(vol @ (Ay - theta_new * y) ** 2))
        moved = abs(theta_new - theta) if it else math.inf
        stalled_res = res_new >= 0.9 * res
        theta, res = theta_new, res_new
        x = y
        if res <= floor:
            break
        stall = stall + 1 if (moved <= 1e-15 * abs(theta) and stalled_res) else 0
        if stall >= 2:
            break
    else:
        raise SolverError(
            "inverse power iteration did not converge",
            iterations=max_iter, residual=res, rayleigh=theta,
        )
    if res > tol * op_scale:
        raise SolverError(
            "eigen residual stalled above tolerance",
            iterations=it + 1, residual=res, rayleigh=theta,
        )
    full = np.zeros(grid.n_nodes)
    full[:m] = x
    if full[m // 4] < 0.0:
        full = -full
    # normalize with the public quadrature so that int phi^2 dx = 1 exactly
    nrm = math.sqrt(grid.integrate(full**2))
    full /= nrm
    h = grid.spacing
    bnd = (full[-3] - 4.0 * full[-2]) / (2.0 * h)
    return EigenPair(lambda1=theta, phi1=RadialProfile(grid, full, bnd))
