import math

import numpy as np
import pytest

from singmin import analysis
from singmin.field_ops import (ScalarField, log_mean, p_energy, q_mean,
                               quotient_log, quotient_q, sup_norm)
from singmin.plap_solver import (MinimizerResult, SolverConfig,
                                 el_residual_lambda_q, minimize_lambda_q,
                                 minimize_mu, mu_from_singular,
                                 rescale_to_lambda, solve_singular,
                                 solve_torsion)


def test_solver_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(tol_rel=0.0)
    with pytest.raises(ValueError):
        SolverConfig(multistart=0)
    with pytest.raises(ValueError):
        SolverConfig(positivity_floor=1.0)
    assert SolverConfig().delta(1.5) > 0.0
    assert SolverConfig().delta(2.0) == 0.0


def test_torsion_disk_profile(disk64, cfg_single):
    phi = solve_torsion(disk64, 2.0, cfg_single)
    assert phi.values[disk64.interior].min() > 0.0
    assert (phi.values[~disk64.interior] == 0.0).all()
    assert sup_norm(phi) == pytest.approx(0.25, abs=8e-3)
    # nodewise profile matches (1 - r^2)/4 to O(h)
    idx = np.flatnonzero(disk64.interior)
    r = np.hypot(disk64.xs[idx], disk64.ys[idx])
    err = np.abs(phi.values[idx] - (1.0 - r * r) / 4.0)
    assert err.max() < 3 * disk64.h


def test_torsion_p3_disk(disk64, cfg_single):
    phi = solve_torsion(disk64, 3.0, cfg_single)
    assert sup_norm(phi) == pytest.approx(
        analysis.ball_torsion(2, 3.0, 1.0, 0.0), abs=1e-2)
    with pytest.raises(ValueError):
        solve_torsion(disk64, 1.0, cfg_single)


def test_minimize_lambda_q_q1_matches_torsion_eigenvalue(disk64, cfg):
    res = minimize_lambda_q(disk64, 2.0, 1.0, cfg)
    lam = math.exp(res.extras["log_lambda"])
    # q = 1: lambda_1 = ||torsion||_1^{1-p}; grid vs closed form (O(h) bias)
    assert lam == pytest.approx(analysis.lambda1_ball(2, 2.0, 1.0), rel=0.08)
    assert res.restarts_agreeing >= 2
    # log_lambda consistency with the Lambda objective
    V = disk64.volume
    assert res.extras["log_lambda"] == pytest.approx(
        math.log(res.objective) - 2.0 * math.log(V), abs=1e-10)
    # paper normalization int |u|^q = 1
    w = disk64.weights
    assert float(np.dot(w, np.abs(res.field.values))) == pytest.approx(1.0, rel=1e-8)


def test_minimize_lambda_q_objective_is_quotient(disk48, cfg_single):
    res = minimize_lambda_q(disk48, 2.0, 0.5, cfg_single)
    assert res.objective == pytest.approx(
        quotient_q(res.field, 2.0, 0.5), rel=1e-9)
    with pytest.raises(ValueError):
        minimize_lambda_q(disk48, 2.0, 1.5, cfg_single)


def test_lambda_q_el_residual(disk48, cfg_single):
    res = minimize_lambda_q(disk48, 2.0, 0.5, cfg_single)
    assert el_residual_lambda_q(res, n_tests=20) <= 1e-6


def test_minimize_mu_normalization_and_restarts(disk64, cfg):
    res = minimize_mu(disk64, 2.0, cfg)
    assert abs(log_mean(res.field).log_value) <= 1e-10
    assert res.objective == pytest.approx(p_energy(res.field, 2.0), rel=1e-12)
    assert res.objective == pytest.approx(quotient_log(res.field, 2.0), rel=1e-9)
    assert res.field.values[disk64.interior].min() > 0.0
    assert len(res.extras["restart_fields"]) == cfg.multistart - 1
    # mu dominates the explicit lower bound (discretization-safe slack)
    lb = analysis.mu_lower_bound(2, 2.0, disk64.volume)
    assert res.objective >= lb * 0.9


def test_minimize_mu_deterministic(disk48, cfg_single):
    a = minimize_mu(disk48, 2.0, cfg_single)
    b = minimize_mu(disk48, 2.0, cfg_single)
    assert np.array_equal(a.field.values, b.field.values)
    assert a.objective == b.objective


def test_solve_singular_positive_and_consistent(disk64, cfg_single):
    u = solve_singular(disk64, 2.0, 1.0, cfg_single)
    assert u.values[disk64.interior].min() > 0.0
    mu_s = mu_from_singular(u, 1.0, 2.0, disk64.volume)
    mu_d = minimize_mu(disk64, 2.0, cfg_single).objective
    assert mu_s == pytest.approx(mu_d, rel=0.05)


def test_solve_singular_homogeneity(disk48, cfg_single):
    u1 = solve_singular(disk48, 2.0, 1.0, cfg_single)
    u2 = solve_singular(disk48, 2.0, 2.0, cfg_single)
    scale = math.sqrt(2.0)
    diff = np.abs(u2.values - scale * u1.values).max()
    assert diff <= 1e-3 * sup_norm(u2)
    with pytest.raises(ValueError):
        solve_singular(disk48, 2.0, -1.0, cfg_single)


def test_rescale_to_lambda(disk48, cfg_single):
    res = minimize_mu(disk48, 2.0, cfg_single)
    mu, V = res.objective, disk48.volume
    lam = 0.7
    u_lam = rescale_to_lambda(res.field, mu, lam, V, p=2.0)
    factor = (lam * V / mu) ** 0.5
    assert np.allclose(u_lam.values, res.field.values * factor, rtol=1e-14)
    # energy of the rescaled field is exactly lam * V
    assert p_energy(u_lam, 2.0) == pytest.approx(lam * V, rel=1e-10)
    # rejects fields without unit geometric mean
    with pytest.raises(ValueError):
        rescale_to_lambda(u_lam, mu, lam, V, p=2.0)
    with pytest.raises(ValueError):
        rescale_to_lambda(res.field, -1.0, lam, V)


def test_minimize_mu_p_validation(disk24, cfg_single):
    with pytest.raises(ValueError):
        minimize_mu(disk24, 1.0, cfg_single)
