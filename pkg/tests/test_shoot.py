"""Shooting-solver contracts against closed-form oracles.

The N=1, p=3, lam=0 ball profile has a first integral
    u'^2/2 + u^4/4 = u(0)^4/4,
giving u(0) = sqrt(2) K with K = int_0^1 ds/sqrt(1-s^4) and
u_r(1) = -u(0)^2/sqrt(2).  The whole-space states for N=1 are
Z = sqrt(2) sech r (p=3) and Z = 3^{1/4} sech^{1/2}(2r) (p=5).
"""

import math

import numpy as np
import pytest
from scipy.integrate import quad

from nlsball import (
    ProblemParams,
    ShootConfig,
    discrete_residual,
    rescaled_profile,
    solve_ball_profile,
    solve_whole_space,
)
from nlsball.errors import DomainError, ParameterError

P13 = ProblemParams(N=1, p=3.0)
P15 = ProblemParams(N=1, p=5.0)
P33 = ProblemParams(N=3, p=3.0)

K_LEMNISCATE = quad(lambda s: 1.0 / math.sqrt(1.0 - s**4), 0.0, 1.0)[0]
A_ORACLE = math.sqrt(2.0) * K_LEMNISCATE          # 1.8540746773...
UR1_ORACLE = -A_ORACLE**2 / math.sqrt(2.0)        # -2.4307452569...


class TestShootConfig:
    def test_validation(self):
        with pytest.raises(ParameterError):
            ShootConfig(max_bisections=10)
        with pytest.raises(ParameterError):
            ShootConfig(ode_tolerance=0.0)
        with pytest.raises(ParameterError):
            ShootConfig(n_nodes=8)


class TestBallFocusing:
    def test_first_integral_oracle(self, cfg_fine):
        prof = solve_ball_profile(P13, 0.0, +1, cfg_fine)
        assert prof.values[0] == pytest.approx(A_ORACLE, abs=1e-9)
        assert prof.values[0] == pytest.approx(1.85407467730, abs=1e-6)
        assert prof.boundary_derivative == pytest.approx(UR1_ORACLE, abs=1e-9)
        assert prof.boundary_derivative == pytest.approx(-2.43074525692, abs=1e-5)

    @pytest.mark.parametrize("params,lam", [(P13, -1.0), (P13, 7.0), (P15, 3.0),
                                            (P33, -5.0), (P33, 12.0)])
    def test_monotone_positive(self, params, lam, cfg_fast):
        prof = solve_ball_profile(params, lam, +1, cfg_fast)
        assert np.all(prof.values[:-1] > 0.0)
        assert np.all(np.diff(prof.values) < 0.0)
        assert prof.values[-1] == 0.0
        assert prof.boundary_derivative < 0.0

    def test_discrete_residual(self):
        # the N=3 stencil constant is larger, so it gets the finer grid
        for params, lam, n in ((P13, 0.0, 4097), (P33, 2.0, 8193)):
            prof = solve_ball_profile(params, lam, +1, ShootConfig(n_nodes=n))
            assert discrete_residual(prof, lam, 1.0, params) < 1e-6

    def test_uniqueness_witness(self, cfg_fast):
        a1 = solve_ball_profile(P13, 2.0, +1, cfg_fast, seed=1.0).values[0]
        a2 = solve_ball_profile(P13, 2.0, +1, cfg_fast, seed=6.0).values[0]
        assert abs(a1 - a2) <= 10.0 * cfg_fast.bisection_tolerance * a1

    def test_near_endpoint_matches_eigenfunction(self, cfg_fast):
        from nlsball import principal_eigenpair
        lam1 = math.pi**2 / 4
        prof = solve_ball_profile(P13, -lam1 + 1e-3, +1, cfg_fast)
        l2 = math.sqrt(prof.l2_norm_sq())
        eig = principal_eigenpair(P13, prof.grid)
        diff = prof.values / l2 - eig.phi1.values
        dist = math.sqrt(prof.grid.integrate(diff**2))
        assert dist < 0.05

    def test_large_lambda_matches_scaled_ground_state(self, cfg_fine,
                                                      ground_state_13):
        # u(r) ~ lam^{1/(p-1)} Z(sqrt(lam) r) away from the boundary layer
        lam = 400.0
        prof = solve_ball_profile(P13, lam, +1, cfg_fine)
        r = prof.grid.nodes
        scaled = math.sqrt(lam) * np.interp(
            math.sqrt(lam) * r, ground_state_13.profile.grid.nodes,
            ground_state_13.profile.values, right=0.0,
        )
        mask = (r <= 0.9) & (scaled >= 1e-3 * scaled[0])
        rel = np.abs(prof.values[mask] - scaled[mask]) / scaled[mask]
        assert np.max(rel) < 0.01

    def test_domain_errors(self, cfg_fast):
        lam1 = math.pi**2 / 4
        with pytest.raises(DomainError):
            solve_ball_profile(P13, -lam1 - 0.5, +1, cfg_fast)
        with pytest.raises(DomainError):
            solve_ball_profile(P13, -lam1 + 0.5, -1, cfg_fast)
        with pytest.raises(ParameterError):
            solve_ball_profile(P13, 0.0, 2, cfg_fast)


class TestBallDefocusing:
    @pytest.mark.parametrize("lam", [-2.6, -10.0, -300.0, -5000.0])
    def test_monotone_positive(self, lam, cfg_fast):
        prof = solve_ball_profile(P13, lam, -1, cfg_fast)
        assert np.all(prof.values[:-1] > 0.0)
        assert np.all(np.diff(prof.values) <= 0.0)
        assert discrete_residual(prof, lam, -1.0, P13) < 1e-8

    def test_plateau_height(self, cfg_fast):
        lam = -2000.0
        prof = solve_ball_profile(P13, lam, -1, cfg_fast)
        assert prof.values[0] == pytest.approx(math.sqrt(-lam), rel=2e-2)


class TestWholeSpace:
    def test_sech_oracle_p3(self, ground_state_13):
        Z = ground_state_13
        assert Z.center_value == pytest.approx(math.sqrt(2.0), abs=1e-7)
        assert Z.mass == pytest.approx(4.0, rel=1e-6)
        assert Z.grad_energy == pytest.approx(4.0 / 3.0, rel=1e-6)

    def test_sech_oracle_p5(self, ground_state_15):
        Z = ground_state_15
        assert Z.center_value == pytest.approx(3.0**0.25, abs=1e-7)
        assert Z.mass == pytest.approx(math.sqrt(3.0) * math.pi / 2.0, rel=1e-6)

    @pytest.mark.parametrize("gs", ["ground_state_13", "ground_state_15",
                                    "ground_state_33"])
    def test_invariants(self, gs, request):
        Z = request.getfixturevalue(gs)
        nehari = abs(Z.grad_energy + Z.mass - Z.lp1_norm) / Z.lp1_norm
        assert nehari < 1e-4
        N, p = Z.params.N, Z.params.p
        target = N * (p - 1.0) / (N + 2.0 - p * (N - 2.0))
        assert Z.grad_energy / Z.mass == pytest.approx(target, rel=1e-4)
        assert np.all(Z.profile.values[:-1] > 0.0)
        assert np.all(np.diff(Z.profile.values) < 0.0)
        assert Z.profile.values[-1] < 1e-8 * Z.center_value

    def test_r_max_guard(self, cfg_fast):
        with pytest.raises(ParameterError):
            solve_whole_space(P13, 10.0, cfg_fast)


class TestRescaling:
    def test_identity_scaling(self, cfg_fast):
        prof = solve_ball_profile(P13, 1.0, +1, cfg_fast)
        v = rescaled_profile(prof, 1.0, 1.0, P13)
        assert np.allclose(v.values, prof.values, rtol=0, atol=0)
        assert v.grid.radius == pytest.approx(1.0)

    def test_domain_error(self, cfg_fast):
        prof = solve_ball_profile(P13, 1.0, +1, cfg_fast)
        with pytest.raises(DomainError):
            rescaled_profile(prof, -1.0, 1.0, P13)
        with pytest.raises(DomainError):
            rescaled_profile(prof, 1.0, -1.0, P13)

    def test_limit_profile(self, cfg_fine, ground_state_13):
        from nlsball import normalize
        prof = solve_ball_profile(P13, 1e4, +1, cfg_fine)
        pt = normalize(prof, 1e4, +1, P13)
        v = rescaled_profile(pt.profile, pt.lam, pt.mu, P13)
        z = np.interp(v.grid.nodes, ground_state_13.profile.grid.nodes,
                      ground_state_13.profile.values, right=0.0)
        assert np.max(np.abs(v.values - z)) < 0.02

    def test_center_value_monotone_approach(self, cfg_fast, ground_state_13):
        # the approach is ~exp(-2 sqrt(lam)), hitting the discretization
        # floor near lam ~ 200, so the doubling sequence stops there
        from nlsball import normalize
        errs = []
        for lam in (12.5, 50.0, 200.0):
            prof = solve_ball_profile(P13, lam, +1, cfg_fast)
            pt = normalize(prof, lam, +1, P13)
            v0 = (pt.mu / pt.lam) ** 0.5 * pt.profile.values[0]
            errs.append(abs(v0 - ground_state_13.center_value))
        assert errs[0] > errs[1] > errs[2]
