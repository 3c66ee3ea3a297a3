"""Shooting solvers for the radial profile equations.

Three problems share one integrator:

* the positive Dirichlet profile on the unit ball,
      -u'' - (N-1)/r u' + lam u = mu u^p,  u'(0) = 0, u(1) = 0,
  solved for mu = +1 by bisection on the center value a = u(0);
* the same equation with mu = -1 (defocusing), solved by damped Newton on
  the conservative discretization -- center shooting is hopeless there
  because separatrix perturbations grow like exp(sqrt((p-1)|lam|) r),
  which exceeds double precision long before |lam| reaches the asymptotic
  regime;
* the whole-space decaying ground state of -Z'' - (N-1)/r Z' + Z = Z^p.

Trajectories integrate with classical RK4 at a lambda-scaled step landing
exactly on the output grid nodes, started off r = 0 with the even series
u = a + (lam a - mu a^p) r^2/(2N) + O(r^4).  Where the boundary tail falls
below what bisection can resolve in double precision (center values only
pin the trajectory down to relative eps, amplified by exp(sqrt(lam) r)),
the tail is replaced by the matched decaying solution of the linearized
equation: a Bessel I/K combination vanishing at r = 1 on the ball, and
c r^{-(N-1)/2} e^{-r} on the whole space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded
from scipy.optimize import brentq
from scipy.special import ive, kve

from .core import (
    ProblemParams,
    RadialGrid,
    RadialProfile,
    apply_radial_laplacian,
    dirichlet_lambda1_exact,
    make_grid,
    principal_eigenpair,
    radial_laplacian_tridiag,
)
from .errors import (
    BracketError,
    DomainError,
    ParameterError,
    PrecisionError,
    SolverError,
)

CROSSED = "crossed"
REBOUND = "rebound"
REACHED_END = "end"

# tail values below TAIL_SWITCH * u(0) are dominated by separatrix noise
TAIL_SWITCH = 1e-6


@dataclass(frozen=True)
class ShootConfig:
    """Tolerances and discretization knobs for the shooting solvers."""

    ode_tolerance: float = 1e-10
    bisection_tolerance: float = 1e-14  # relative width of the a-bracket
    max_bisections: int = 200
    event_definitions: tuple[str, str] = ("zero-crossing", "slope-sign")
    n_nodes: int = 2049

    def __post_init__(self):
        if self.ode_tolerance <= 0.0 or self.bisection_tolerance <= 0.0:
            raise ParameterError("tolerances must be positive")
        if self.max_bisections < 40:
            raise ParameterError("max_bisections must be >= 40")
        if self.n_nodes < 16:
            raise ParameterError("n_nodes must be >= 16")


@dataclass(frozen=True)
class WholeSpaceGroundState:
    """Decaying positive radial solution of -Delta Z + Z = Z^p on R^N."""

    params: ProblemParams
    profile: RadialProfile
    mass: float
    grad_energy: float
    lp1_norm: float
    center_value: float


def _substeps(cell: float, lam: float, tol: float) -> int:
    """Substeps per grid cell so the RK4 local error stays near `tol`."""
    x_max = (720.0 * tol) ** 0.2
    return max(1, math.ceil(cell * math.sqrt(1.0 + abs(lam)) / x_max))


def _integrate(a, lam, mu, n_dim, p, R, n_cells, substeps, record,
               terminal_events=True):
    """Fixed-step RK4 over [0, R] with events.

    Returns (status, r_stop, u_nodes, v_nodes, u_end, v_end); the node
    arrays are None unless `record`.  In record mode a zero crossing only
    counts as an event once u < -1e-12 a, so benign boundary roundoff does
    not truncate the profile; classification mode uses the sharp dichotomy.
    With terminal_events=False the flow runs to R regardless (the odd
    extension u |u|^{p-1} keeps it bounded), exposing the smooth shooting
    functional a -> u(R).
    """
    pm1 = p - 1.0
    Nm1 = n_dim - 1.0
    h = R / (n_cells * substeps)
    cross_floor = -1e-12 * a if record else 0.0

    u_nodes = v_nodes = None
    if record:
        u_nodes = np.full(n_cells + 1, np.nan)
        v_nodes = np.full(n_cells + 1, np.nan)
        u_nodes[0] = a
        v_nodes[0] = 0.0

    c2 = (lam * a - mu * a * abs(a) ** pm1) / (2.0 * n_dim)
    c4 = (lam - mu * p * abs(a) ** pm1) * c2 / (4.0 * (n_dim + 2.0))
    r = h
    u = a + c2 * h * h + c4 * h**4
    v = 2.0 * c2 * h + 4.0 * c4 * h**3

    step = 1
    total = n_cells * substeps
    while True:
        if terminal_events:
            if u <= cross_floor:
                return CROSSED, r, u_nodes, v_nodes, u, v
            if v >= 0.0 and lam * u > mu * u * abs(u) ** pm1:
                # slope event only where the flow cannot turn back down
                return REBOUND, r, u_nodes, v_nodes, u, v
        if record and step % substeps == 0:
            idx = step // substeps
            u_nodes[idx] = u
            v_nodes[idx] = v
        if step >= total:
            return REACHED_END, r, u_nodes, v_nodes, u, v
        # classical RK4 step
        k1u = v
        k1v = lam * u - mu * u * abs(u) ** pm1 - Nm1 * v / r
        rm = r + 0.5 * h
        u2 = u + 0.5 * h * k1u
        v2 = v + 0.5 * h * k1v
        k2u = v2
        k2v = lam * u2 - mu * u2 * abs(u2) ** pm1 - Nm1 * v2 / rm
        u3 = u + 0.5 * h * k2u
        v3 = v + 0.5 * h * k2v
        k3u = v3
        k3v = lam * u3 - mu * u3 * abs(u3) ** pm1 - Nm1 * v3 / rm
        re = r + h
        u4 = u + h * k3u
        v4 = v + h * k3v
        k4u = v4
        k4v = lam * u4 - mu * u4 * abs(u4) ** pm1 - Nm1 * v4 / re
        u += h * (k1u + 2.0 * (k2u + k3u) + k4u) / 6.0
        v += h * (k1v + 2.0 * (k2v + k3v) + k4v) / 6.0
        r = re
        step += 1


def _classify(a, lam, mu, n_dim, p, R, n_cells, substeps):
    """'big' if the trajectory crosses zero before R, else 'small'."""
    status, _, _, _, u_end, _ = _integrate(
        a, lam, mu, n_dim, p, R, n_cells, substeps, record=False
    )
    if status == CROSSED:
        return "big"
    if status == REBOUND:
        return "small"
    return "small" if u_end > 0.0 else "big"


def _find_bracket(classify, seed, lam, mu, p):
    """Geometric search for center values of both trajectory classes."""
    if seed is not None and seed > 0.0:
        lo, hi = 0.97 * seed, 1.03 * seed
    else:
        base = (max(lam, 0.0) / abs(mu)) ** (1.0 / (p - 1.0)) if lam > 0 else 0.0
        lo = hi = max(1.0, 1.5 * base)
    for _ in range(200):
        if classify(hi) == "big":
            break
        lo = hi
        hi *= 1.6
    else:
        raise BracketError("no crossing trajectory found", a_max=hi, lam=lam)
    for _ in range(200):
        if classify(lo) == "small":
            return lo, hi
        hi = lo
        lo *= 0.6
    raise BracketError("no rebound trajectory found", a_min=lo, lam=lam)


def _bisect_center(lam, mu, n_dim, p, R, n_cells, substeps, config, seed=None,
                   smooth_refine=True):
    """Locate the separatrix center value by classification bisection.

    With smooth_refine, the bracket is first narrowed to 1e-3 and then a
    Brent solve on the event-free boundary value u(R; a) finishes the job;
    that functional is smooth and monotone only while the separatrix
    divergence stays beyond R, so the root is verified against the
    classification dichotomy and bisection takes over whenever the
    verification fails (large lam, whole-space domains).
    """
    classify = lambda a: _classify(a, lam, mu, n_dim, p, R, n_cells, substeps)
    lo, hi = _find_bracket(classify, seed, lam, mu, p)
    tol = config.bisection_tolerance
    used = 0
    if smooth_refine:
        while hi - lo > 1e-3 * hi and used < config.max_bisections:
            mid = 0.5 * (lo + hi)
            if classify(mid) == "big":
                hi = mid
            else:
                lo = mid
            used += 1

        def boundary_value(a):
            return _integrate(a, lam, mu, n_dim, p, R, n_cells, substeps,
                              record=False, terminal_events=False)[4]

        if hi - lo > tol * hi:
            g_lo, g_hi = boundary_value(lo), boundary_value(hi)
            if g_lo > 0.0 > g_hi:
                root = brentq(boundary_value, lo, hi,
                              xtol=tol * hi, rtol=max(4e-16, tol), maxiter=120)
                pad = 4.0 * max(tol * root, np.finfo(float).eps * root)
                if (classify(root - pad) == "small"
                        and classify(root + pad) == "big"):
                    return root, root - pad, root + pad
    for _ in range(used, config.max_bisections):
        if hi - lo <= tol * hi:
            break
        mid = 0.5 * (lo + hi)
        if classify(mid) == "big":
            hi = mid
        else:
            lo = mid
    else:
        if hi - lo > 64.0 * tol * hi:
            raise PrecisionError(
                "bisection exhausted before tolerance",
                bracket_width=hi - lo, relative=(hi - lo) / hi,
                iterations=config.max_bisections,
            )
    return 0.5 * (lo + hi), lo, hi


def _tail_start_index(values: np.ndarray, a: float) -> int:
    """Last trustworthy node: the one before u first drops below the
    separatrix noise floor TAIL_SWITCH * u(0)."""
    filled = np.nan_to_num(values, nan=0.0)
    below = np.nonzero(filled < TAIL_SWITCH * a)[0]
    if len(below) == 0:
        return len(values) - 2
    return max(int(below[0]) - 1, 1)


def _ball_linear_tail(n_dim, lam, r_s, u_s, r_values):
    """Decaying solution of -w'' - (N-1)/r w' + lam w = 0 with w(1) = 0,
    matched to u_s at r_s.  Returns (values at r_values, w'(1)).

    w(r) = r^{-nu} [I_nu(z) K_nu(z r) - K_nu(z) I_nu(z r)], nu = N/2 - 1,
    z = sqrt(lam); the Wronskian gives w'(1) = -1 exactly.
    """
    nu = n_dim / 2.0 - 1.0
    z = math.sqrt(lam)

    def bracket_term(r):
        # exp-scaled so every exponent is <= 0
        return (
            ive(nu, z) * kve(nu, z * r)
            - kve(nu, z) * ive(nu, z * r) * np.exp(2.0 * z * (r - 1.0))
        )

    t_s = bracket_term(r_s)
    log_gs = -nu * math.log(r_s) + z * (1.0 - r_s) + math.log(t_s)
    vals = np.empty(len(r_values))
    for i, r in enumerate(r_values):
        if r >= 1.0:
            vals[i] = 0.0
            continue
        log_ratio = -nu * math.log(r) + z * (1.0 - r) + math.log(bracket_term(r)) - log_gs
        vals[i] = u_s * math.exp(log_ratio)
    boundary_slope = -u_s * math.exp(-log_gs)
    return vals, boundary_slope


def _solve_ball_focusing(params, lam, grid, config, seed=None):
    n_cells = grid.n_nodes - 1
    substeps = _substeps(grid.spacing, lam, config.ode_tolerance)
    a, lo, hi = _bisect_center(
        lam, 1.0, params.N, params.p, grid.radius, n_cells, substeps, config, seed
    )
    status, r_stop, u_nodes, v_nodes, u_end, v_end = _integrate(
        a, lam, 1.0, params.N, params.p, grid.radius, n_cells, substeps, record=True
    )
    values = u_nodes.copy()
    if status == REACHED_END or r_stop >= grid.radius - 1.5 * grid.spacing:
        trailing = np.isnan(values)
        values[trailing] = 0.0
        values[-1] = 0.0
        boundary = v_end
    else:
        # separatrix noise ate the tail; graft the linear decaying solution
        if lam <= 0.0:
            raise SolverError(
                "trajectory terminated early at the converged center value",
                r_stop=r_stop, status=status, lam=lam,
            )
        s = _tail_start_index(values, a)
        tail, boundary = _ball_linear_tail(
            params.N, lam, grid.nodes[s], values[s], grid.nodes[s + 1 :]
        )
        values[s + 1 :] = tail
        values[-1] = 0.0
    np.clip(values, 0.0, None, out=values)
    return RadialProfile(grid, values, float(boundary)), a


def _solve_ball_defocusing(params, lam, grid, seed_values=None,
                           tol=1e-11, max_iter=100):
    """Damped Newton for -Delta u + lam u + u^p = 0, u > 0, u(1) = 0."""
    lam1 = dirichlet_lambda1_exact(params.N)
    lower, diag, upper, _ = radial_laplacian_tridiag(grid)
    m = len(diag)
    p = params.p
    r = grid.nodes[:m]

    def phi1_seed():
        # small-amplitude ansatz a phi_1 with a^{p-1} = (-lam - lam1)/c
        eig = principal_eigenpair(params, grid)
        cp1 = grid.integrate(eig.phi1.values ** (p + 1))
        amp = (max(-lam - lam1, 1e-10) / cp1) ** (1.0 / (p - 1.0))
        return amp * eig.phi1.values[:m]

    def plateau_seed():
        plateau = (-lam) ** (1.0 / (p - 1.0))
        k = math.sqrt(-lam / 2.0)
        return plateau * np.tanh(k * (1.0 - r))

    def seeds():
        if seed_values is not None:
            yield np.array(seed_values[:m], dtype=float)
        if -lam < 4.0 * lam1:
            yield phi1_seed()
            yield plateau_seed()
        else:
            yield plateau_seed()
            yield phi1_seed()

    def residual(y):
        pos = np.maximum(y, 0.0)
        out = diag * y
        out[:-1] += upper * y[1:]
        out[1:] += lower * y[:-1]
        return out + lam * y + pos**p

    scale = max(1.0, -lam * (-lam) ** (1.0 / (p - 1.0)))
    op_scale = float(np.max(np.abs(diag)))  # residual roundoff floor ~ eps*op*|y|
    last = None
    for y in seeds():
        fy = residual(y)
        norm = np.max(np.abs(fy))

        def converged(nrm, vals):
            floor = 20.0 * np.finfo(float).eps * op_scale * max(vals.max(), 1e-30)
            return nrm <= tol * scale + floor

        ok = False
        for _ in range(max_iter):
            if converged(norm, y):
                ok = True
                break
            pos = np.maximum(y, 0.0)
            jdiag = diag + lam + p * pos ** (p - 1.0)
            ab = np.zeros((3, m))
            ab[0, 1:] = upper
            ab[1, :] = jdiag
            ab[2, :-1] = lower
            delta = solve_banded((1, 1), ab, -fy)
            t = 1.0
            for _ in range(30):
                # reflect to the positive cone: the target is the positive
                # global minimizer, and sign flips collapse Newton onto 0
                y_new = np.abs(y + t * delta)
                f_new = residual(y_new)
                n_new = np.max(np.abs(f_new))
                if n_new < norm:
                    break
                t *= 0.5
            else:
                ok = converged(norm, y)
                break
            y, fy, norm = y_new, f_new, n_new
        if ok and y.min() > 0.0:
            full = np.zeros(grid.n_nodes)
            full[:m] = y
            h = grid.spacing
            boundary = (full[-3] - 4.0 * full[-2]) / (2.0 * h)
            return RadialProfile(grid, full, float(boundary))
        last = norm
    raise SolverError(
        "defocusing Newton iteration failed", residual=last, lam=lam
    )


def solve_ball_profile(params: ProblemParams, lam: float, mu_sign: int,
                       config: ShootConfig | None = None,
                       grid: RadialGrid | None = None,
                       seed=None) -> RadialProfile:
    """Unique positive radial Dirichlet solution on the unit ball.

    mu_sign=+1 requires lam > -lambda_1(B_1), mu_sign=-1 requires
    lam < -lambda_1(B_1).  `seed` warm-starts the solver: a center value
    for the focusing branch, a value array for the defocusing one.
    """
    if mu_sign not in (+1, -1):
        raise ParameterError("mu_sign must be +1 or -1")
    config = config or ShootConfig()
    if grid is None:
        grid = make_grid(params, config.n_nodes, 1.0)
    lam1 = dirichlet_lambda1_exact(params.N)
    if mu_sign > 0:
        if lam <= -lam1:
            raise DomainError(
                f"focusing profile needs lam > -lambda1 = {-lam1:.6f}, got {lam}"
            )
        profile, _ = _solve_ball_focusing(params, lam, grid, config, seed=seed)
        return profile
    if lam >= -lam1:
        raise DomainError(
            f"defocusing profile needs lam < -lambda1 = {-lam1:.6f}, got {lam}"
        )
    return _solve_ball_defocusing(params, lam, grid, seed_values=seed)


def solve_whole_space(params: ProblemParams, R_max: float = 20.0,
                      config: ShootConfig | None = None) -> WholeSpaceGroundState:
    """Decaying ground state of -Delta Z + Z = Z^p on R^N by shooting."""
    config = config or ShootConfig()
    if math.exp(-R_max) >= 1e-8:
        raise ParameterError(f"R_max = {R_max} too small for the decay floor")
    grid = make_grid(params, config.n_nodes, R_max)
    n_cells = grid.n_nodes - 1
    substeps = _substeps(grid.spacing, 1.0, config.ode_tolerance)
    p = params.p
    # the flat-case homoclinic height is a lower bound for the center value
    flat = ((p + 1.0) / 2.0) ** (1.0 / (p - 1.0))
    a, _, _ = _bisect_center(
        1.0, 1.0, params.N, p, R_max, n_cells, substeps, config, seed=flat,
        smooth_refine=False,
    )
    _, _, u_nodes, v_nodes, _, _ = _integrate(
        a, 1.0, 1.0, params.N, p, R_max, n_cells, substeps, record=True
    )
    values = u_nodes.copy()
    dvalues = v_nodes.copy()
    s = _tail_start_index(values, a)
    r_s, u_s = grid.nodes[s], values[s]
    c = u_s * r_s ** ((params.N - 1) / 2.0) * math.exp(r_s)
    rt = grid.nodes[s + 1 :]
    values[s + 1 :] = c * rt ** (-(params.N - 1) / 2.0) * np.exp(-rt)
    dvalues[s + 1 :] = values[s + 1 :] * (-1.0 - (params.N - 1) / (2.0 * rt))
    profile = RadialProfile(grid, values, float(dvalues[-1]))
    mass = grid.integrate(values**2)
    grad = grid.integrate(dvalues**2)
    lp1 = grid.integrate(values ** (p + 1.0))
    return WholeSpaceGroundState(
        params=params, profile=profile, mass=mass, grad_energy=grad,
        lp1_norm=lp1, center_value=a,
    )


def rescaled_profile(point_profile: RadialProfile, lam: float, mu: float,
                     params: ProblemParams) -> RadialProfile:
    """Blow-up rescaling v(x) = (mu/lam)^{1/(p-1)} u(x / sqrt(lam)).

    The result lives on the dilated grid of radius sqrt(lam) * R and solves
    -Delta v + v = v^p up to the Dirichlet truncation.
    """
    if lam <= 0.0 or mu <= 0.0:
        raise DomainError("rescaling requires lam > 0 and mu > 0")
    fac = (mu / lam) ** (1.0 / (params.p - 1.0))
    root = math.sqrt(lam)
    grid = make_grid(params, point_profile.grid.n_nodes,
                     R=root * point_profile.grid.radius)
    values = fac * point_profile.values
    boundary = fac / root * point_profile.boundary_derivative
    return RadialProfile(grid, values, boundary)


def discrete_residual(profile: RadialProfile, lam: float, mu: float,
                      params: ProblemParams) -> float:
    """Max-norm residual of the conservative discretization,
    normalized by the largest term magnitude (at least 1)."""
    y = profile.values
    p = params.p
    lap = apply_radial_laplacian(profile.grid, y)
    yin = y[: len(lap)]
    res = lap + lam * yin - mu * yin * np.abs(yin) ** (p - 1.0)
    scale = max(1.0, np.max(np.abs(lam * yin)), np.max(np.abs(yin) ** p))
    return float(np.max(np.abs(res)) / scale)
