import math

import pytest
from scipy.special import beta as beta_fn

from singmin import analysis


def test_unit_ball_volumes():
    assert analysis.unit_ball_volume(2) == pytest.approx(math.pi, rel=1e-14)
    assert analysis.unit_ball_volume(3) == pytest.approx(4 * math.pi / 3, rel=1e-14)


def test_log_moment_value_and_recursion():
    assert analysis.log_moment_I(2) == pytest.approx(-1.5, abs=1e-10)
    for n in range(2, 10):
        lhs = analysis.log_moment_I(n + 1)
        rhs = analysis.log_moment_I(n) - 1.0 / (n + 1)
        assert lhs == pytest.approx(rhs, abs=1e-9)


def test_log_moment_matches_harmonic_number():
    for n in (2, 5, 9):
        assert analysis.log_moment_I(n) == pytest.approx(
            -analysis.harmonic_number(n), abs=1e-9)


def test_cone_moment_against_beta_integral():
    # independent oracle: int_0^1 (1 - t^(1/q))^N dt = q * B(q, N+1),
    # so the moment equals (q * B(q, N+1))^(1/q)
    for q, n in ((0.5, 2), (0.25, 3), (0.1, 2)):
        exact = (q * beta_fn(q, n + 1)) ** (1.0 / q)
        assert analysis.cone_moment(q, n) == pytest.approx(exact, rel=1e-9)


def test_cone_moment_small_q_limit():
    for n in (2, 3, 4):
        assert analysis.cone_moment(1e-3, n) == pytest.approx(
            analysis.harmonic_limit(n), abs=5e-3)


def test_cone_moment_explicit_half():
    # q = 1/2, N = 2: (int (1-t^2)^2 dt)^2 = (8/15)^2 = 64/225
    assert analysis.cone_moment(0.5, 2) == pytest.approx(64.0 / 225.0, rel=1e-10)


def test_cone_moment_rejects_bad_args():
    with pytest.raises(ValueError):
        analysis.cone_moment(0.0, 2)
    with pytest.raises(ValueError):
        analysis.cone_moment(1.5, 2)
    with pytest.raises(ValueError):
        analysis.cone_moment(0.5, 1)


def test_sobolev_constant_known_value():
    # S_{3,2} = 3 (pi/2)^(4/3)
    assert analysis.sobolev_constant(3, 2.0) == pytest.approx(
        3.0 * (math.pi / 2.0) ** (4.0 / 3.0), rel=1e-12)
    with pytest.raises(ValueError):
        analysis.sobolev_constant(2, 2.0)


def test_ball_torsion_values():
    assert analysis.ball_torsion(2, 2.0, 1.0, 0.0) == pytest.approx(0.25, rel=1e-14)
    assert analysis.ball_torsion(2, 2.0, 1.0, 1.0) == 0.0
    assert analysis.ball_torsion(2, 3.0, 1.0, 0.0) == pytest.approx(
        (2.0 / 3.0) / math.sqrt(2.0), rel=1e-12)
    with pytest.raises(ValueError):
        analysis.ball_torsion(2, 2.0, 1.0, 1.5)


def test_ball_torsion_l1_and_lambda1():
    # unit disk: ||phi||_1 = pi/8 and lambda_1 = 8/pi
    assert analysis.ball_torsion_l1(2, 2.0, 1.0) == pytest.approx(math.pi / 8, rel=1e-13)
    assert analysis.lambda1_ball(2, 2.0, 1.0) == pytest.approx(8 / math.pi, rel=1e-13)


def test_mu_lower_bound_disk():
    # N = p = 2 on the unit disk: 2*(2+2)*pi = 8*pi
    assert analysis.mu_lower_bound(2, 2.0, math.pi) == pytest.approx(
        8 * math.pi, rel=1e-13)
    assert analysis.logsob_explicit_constant(2, 2.0, math.pi) == pytest.approx(
        1.0 / (8 * math.pi), rel=1e-13)


def test_linfty_constant_positive_and_stable():
    C = analysis.poincare_constant(2, 2.0, 5.783185962946785)
    K = analysis.linfty_constant(2, 2.0, C)
    assert K > 0
    # the supremum dominates both endpoints of the q-interval
    assert K >= analysis._linfty_integrand(0.0, 2, 2.0, C) - 1e-12
    assert K >= analysis._linfty_integrand(1.0, 2, 2.0, C) - 1e-12


def test_ball_lambda_q_scaling_identity():
    lam1 = 0.7
    for q in (1.0, 0.25):
        val = analysis.ball_lambda_q(lam1, 2.0, 2, 2.0, q)
        logval = analysis.log_ball_lambda_q(lam1, 2.0, 2, 2.0, q)
        assert math.log(val) == pytest.approx(logval, abs=1e-12)
    # volume = omega_N recovers lambda_q(B_1)
    assert analysis.ball_lambda_q(lam1, math.pi, 2, 2.0, 0.5) == pytest.approx(
        lam1, rel=1e-13)
