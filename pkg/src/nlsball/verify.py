"""Identity and spectral verification along the solution curves.

Every exact solution ties its scalars together: the radial Pohozaev
identity fixes lambda in terms of alpha and the boundary flux, the
differentiated constraints pair u with v = du/dalpha, and the boundary
form links mu' to u_r(1) v_r(1).  The residuals of these identities
measure the combined discretization and continuation error.  The
linearized operator's radial spectrum supplies the Morse index and the
nondegeneracy gap per spherical-harmonic sector.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .branch import Branch, BranchPoint
from .core import radial_laplacian_tridiag
from .errors import ParameterError

N_STORED_EIGENVALUES = 16


@dataclass(frozen=True)
class IdentityReport:
    """Per-point identity residuals along a branch.

    `pohozaev_res` covers every point; the derivative-based residuals
    cover interior points (centered differences need both neighbors) and
    are aligned with `interior_alphas`.  `alpha_steps` records the
    finite-difference stencil widths actually used.
    """

    alphas: np.ndarray
    interior_alphas: np.ndarray
    alpha_steps: np.ndarray
    pohozaev_res: np.ndarray
    multiplier_res: np.ndarray
    orthogonality_res: np.ndarray       # |int u v|
    grad_pairing_res: np.ndarray        # |int grad u . grad v - 1/2|
    nonlinear_pairing_res: np.ndarray   # |mu int u^p v - 1/2|
    mu_prime_identity_res: np.ndarray   # |mu' M - lambda' + (p-1)/2| (rel)
    M_prime_res: np.ndarray             # |M' - (p+1)/(2 mu)| (rel)
    boundary_flux_res: np.ndarray
    lambda_primes: np.ndarray
    mu_primes: np.ndarray


@dataclass(frozen=True)
class SpectrumReport:
    """Radial spectra of the linearized operator per harmonic sector."""

    l_values: tuple[int, ...]
    eigenvalues: tuple[np.ndarray, ...]  # lowest few per sector, ascending
    negative_counts: tuple[int, ...]
    min_abs_eigenvalue: float
    total_negative: int


def pohozaev_residual(point: BranchPoint) -> float:
    """Residual of the radial boundary identity
    lambda = (2/N)((p+1)/(p-1)) alpha - alpha - (omega/N)((p+1)/(p-1)) u_r(1)^2,
    scaled by max(1, |lambda|)."""
    params = point.params
    N, p = params.N, params.p
    frac = (p + 1.0) / (p - 1.0)
    target = (2.0 / N) * frac * point.alpha - point.alpha \
        - (params.omega / N) * frac * point.ur1**2
    return abs(point.lam - target) / max(1.0, abs(point.lam))


def multiplier_residual(point: BranchPoint) -> float:
    """Residual of alpha + lambda = mu int u^{p+1}, relative."""
    lhs = point.alpha + point.lam
    rhs = point.mu * point.M_alpha
    return abs(lhs - rhs) / max(1.0, abs(rhs))


def boundary_flux_check(branch: Branch) -> np.ndarray:
    """Residual of the boundary-flux form of mu',
    mu' M = (p+1)/(2(p-1)) [ (-p+1+4/N) - (4 omega/N) u_r(1) v_r(1) ],
    per interior point, normalized by the larger side."""
    params = branch.params
    N, p = params.N, params.p
    out = np.empty(max(len(branch.points) - 2, 0))
    for k, i in enumerate(range(1, len(branch.points) - 1)):
        pt = branch.points[i]
        d = branch.derivative(i)
        lhs = d.mu_prime * pt.M_alpha
        bracket = (-p + 1.0 + 4.0 / N) \
            - (4.0 * params.omega / N) * pt.ur1 * d.vr1
        rhs = (p + 1.0) / (2.0 * (p - 1.0)) * bracket
        out[k] = abs(lhs - rhs) / max(abs(lhs), abs(rhs), 1e-3)
    return out


def derivative_identities(branch: Branch) -> IdentityReport:
    """All identity residuals along a branch, derivatives from centered
    differences in alpha."""
    n = len(branch.points)
    if n < 3:
        raise ParameterError("need at least 3 points for centered differences")
    params = branch.params
    p = params.p
    interior = range(1, n - 1)
    m = n - 2
    orth = np.empty(m)
    gradp = np.empty(m)
    nlp = np.empty(m)
    mup = np.empty(m)
    Mp = np.empty(m)
    lam_primes = np.empty(m)
    mu_primes = np.empty(m)
    steps = np.empty(m)
    for k, i in enumerate(interior):
        pt = branch.points[i]
        d = branch.derivative(i)
        grid = pt.profile.grid
        u = pt.profile.values
        v = d.v.values
        orth[k] = abs(grid.integrate(u * v))
        du = pt.profile.derivative_values()
        dv = d.v.derivative_values()
        gradp[k] = abs(grid.integrate(du * dv) - 0.5)
        nlp[k] = abs(pt.mu * grid.integrate(np.abs(u) ** p * v) - 0.5)
        lhs = d.mu_prime * pt.M_alpha
        rhs = d.lambda_prime - (p - 1.0) / 2.0
        mup[k] = abs(lhs - rhs) / max(1.0, abs(rhs))
        target = (p + 1.0) / (2.0 * pt.mu)
        Mp[k] = abs(d.M_prime - target) / abs(target)
        lam_primes[k] = d.lambda_prime
        mu_primes[k] = d.mu_prime
        steps[k] = branch.points[i + 1].alpha - branch.points[i - 1].alpha
    return IdentityReport(
        alphas=branch.alphas,
        interior_alphas=branch.alphas[1:-1],
        alpha_steps=steps,
        pohozaev_res=np.array([pohozaev_residual(pt) for pt in branch.points]),
        multiplier_res=np.array([multiplier_residual(pt) for pt in branch.points]),
        orthogonality_res=orth,
        grad_pairing_res=gradp,
        nonlinear_pairing_res=nlp,
        mu_prime_identity_res=mup,
        M_prime_res=Mp,
        boundary_flux_res=boundary_flux_check(branch),
        lambda_primes=lam_primes,
        mu_primes=mu_primes,
    )


def linearized_spectrum(point: BranchPoint, l_max: int = 3) -> SpectrumReport:
    """Eigenvalues of the linearized operator per harmonic sector.

    L_l = -d_rr - (N-1)/r d_r + l(l+N-2)/r^2 + lambda - p mu u^{p-1},
    Dirichlet at r = 1 and regularity at 0 (even symmetry for l = 0, a
    Dirichlet center condition for l >= 1, matching the r^l behavior).
    """
    if l_max < 1:
        raise ParameterError("l_max must be >= 1")
    params = point.params
    N, p = params.N, params.p
    grid = point.profile.grid
    lower, diag, upper, vol = radial_laplacian_tridiag(grid)
    m = len(diag)
    u = point.profile.values[:m]
    potential = point.lam - p * point.mu * np.abs(u) ** (p - 1.0)
    r = grid.nodes[:m]

    eigs = []
    counts = []
    gaps = []
    for ell in range(l_max + 1):
        if ell == 0:
            d_full = diag + potential
            off = lower * np.sqrt(vol[1:] / vol[:-1])
            ew = eigh_tridiagonal(d_full, off, eigvals_only=True)
        else:
            cent = ell * (ell + N - 2.0) / r[1:] ** 2
            d_full = diag[1:] + potential[1:] + cent
            off = lower[1:] * np.sqrt(vol[2:] / vol[1:-1])
            ew = eigh_tridiagonal(d_full, off, eigvals_only=True)
        eigs.append(ew[:N_STORED_EIGENVALUES].copy())
        counts.append(int(np.sum(ew < 0.0)))
        gaps.append(float(np.min(np.abs(ew))))
    return SpectrumReport(
        l_values=tuple(range(l_max + 1)),
        eigenvalues=tuple(eigs),
        negative_counts=tuple(counts),
        min_abs_eigenvalue=float(min(gaps)),
        total_negative=int(sum(counts)),
    )
