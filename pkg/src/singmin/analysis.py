"""Closed-form constants and 1-D quadrature identities.

Everything here is a pure scalar function: the Sobolev embedding constant,
ball torsion values, the first sublinear eigenvalue of balls, the Poincare
constant C_{N,p}, the sup-norm constant K_{N,p}, the log-moment integral
I(N) and its harmonic-number limit, and the explicit lower bound for the
singular minimization constant mu(Omega).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from scipy.integrate import quad

OMEGA_2 = math.pi  # area of the unit disk


@dataclass(frozen=True)
class ConstantReport:
    """A named scalar constant together with the inputs that produced it."""

    name: str
    value: float
    inputs: dict = field(default_factory=dict)
    provenance: str = ""


def unit_ball_volume(N: int) -> float:
    """Volume of the unit ball in R^N."""
    return math.pi ** (N / 2.0) / math.gamma(N / 2.0 + 1.0)


def harmonic_number(N: int) -> float:
    return sum(1.0 / k for k in range(1, N + 1))


def harmonic_limit(N: int) -> float:
    """exp(-(1 + 1/2 + ... + 1/N)), the q->0 limit of the cone moment."""
    if N < 2:
        raise ValueError("N must be >= 2")
    return math.exp(-harmonic_number(N))


def cone_moment(q: float, N: int) -> float:
    """(int_0^1 (1 - t^(1/q))^N dt)^(1/q) by adaptive quadrature.

    The substitution u = (1/q) log(1/t) moves the sharp transition near
    t = 1 (for small q) onto a smooth exponentially decaying integrand on
    (0, inf), so a single adaptive pass reaches ~1e-13 absolute error.
    """
    if not 0.0 < q <= 1.0:
        raise ValueError("q must lie in (0, 1]")
    if N < 2:
        raise ValueError("N must be >= 2")
    s = 1.0 / q

    def integrand(u):
        return (-math.expm1(-u)) ** N * math.exp(-u / s)

    inner, _ = quad(integrand, 0.0, math.inf, epsabs=1e-14, epsrel=1e-13, limit=200)
    inner /= s
    return math.exp(s * math.log(inner))


def log_moment_I(N: int) -> float:
    """I(N) = N int_0^1 (1-tau)^(N-1) ln(tau) dtau, equal to -(1+1/2+...+1/N).

    The log endpoint singularity at tau = 0 is removed by tau = e^{-u}.
    """
    if N < 2:
        raise ValueError("N must be >= 2")

    def integrand(u):
        return -u * (-math.expm1(-u)) ** (N - 1) * math.exp(-u)

    val, _ = quad(integrand, 0.0, math.inf, epsabs=1e-12, epsrel=1e-12, limit=200)
    return N * val


def sobolev_constant(N: int, p: float) -> float:
    """The critical Sobolev constant S_{N,p} for 1 < p < N."""
    if not 1.0 < p < N:
        raise ValueError("requires 1 < p < N")
    lg = math.lgamma
    ratio = lg(N / p) + lg(1.0 + N - N / p) - lg(1.0 + N / 2.0) - lg(N)
    return (
        math.pi ** (p / 2.0)
        * N
        * ((N - p) / (p - 1.0)) ** (p - 1.0)
        * math.exp(ratio * p / N)
    )


def ball_torsion(N: int, p: float, R: float, r: float) -> float:
    """p-torsion function of the ball B_R evaluated at radius r."""
    if r > R:
        raise ValueError("r must not exceed R")
    if R <= 0 or p <= 1:
        raise ValueError("R > 0 and p > 1 required")
    pp = p / (p - 1.0)
    return (p - 1.0) / p * N ** (-1.0 / (p - 1.0)) * (R ** pp - r ** pp)


def ball_torsion_l1(N: int, p: float, R: float) -> float:
    """L1 norm of the p-torsion function of B_R (closed-form radial integral)."""
    pp = p / (p - 1.0)
    omega = unit_ball_volume(N)
    # N omega int_0^R r^(N-1) (R^pp - r^pp) dr = omega R^(N+pp) * pp / (N + pp)
    return (p - 1.0) / p * N ** (-1.0 / (p - 1.0)) * omega * R ** (N + pp) * pp / (N + pp)


def lambda1_ball(N: int, p: float, R: float) -> float:
    """lambda_1 of B_R (the q = 1 sublinear eigenvalue), ||phi_p||_1^(1-p)."""
    return ball_torsion_l1(N, p, R) ** (1.0 - p)


def poincare_constant(N: int, p: float, lambda_p_B1: float) -> float:
    """C_{N,p} = lambda_p(B_1) |B_1|^(p/N); lambda_p(B_1) comes from the radial oracle."""
    if lambda_p_B1 <= 0:
        raise ValueError("lambda_p(B_1) must be positive")
    return lambda_p_B1 * unit_ball_volume(N) ** (p / N)


def _linfty_integrand(q: float, N: int, p: float, C_Np: float) -> float:
    return C_Np ** (-1.0 / (p - q)) * ((p + N * (p - q)) / p) ** (
        (p + N * (p - 1.0)) / (N * (p - q))
    )


def linfty_constant(N: int, p: float, C_Np: float) -> float:
    """K_{N,p} = sup over q in [0,1] of the sup-norm bound constant.

    Golden-section refinement to 1e-10 in q around the best point of a
    coarse scan, with both endpoints compared explicitly.
    """
    if C_Np <= 0:
        raise ValueError("C_Np must be positive")
    f = lambda q: _linfty_integrand(q, N, p, C_Np)
    grid = [i / 64.0 for i in range(65)]
    best = max(grid, key=f)
    lo = max(0.0, best - 1.0 / 64.0)
    hi = min(1.0, best + 1.0 / 64.0)
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > 1e-10:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    return max(f(0.0), f(1.0), fc, fd)


def mu_lower_bound(N: int, p: float, volume: float) -> float:
    """Explicit lower bound N (N + p/(p-1))^(p-1) omega_N^(p/N) |Omega|^(1-p/N)."""
    if volume <= 0:
        raise ValueError("volume must be positive")
    omega = unit_ball_volume(N)
    return N * (N + p / (p - 1.0)) ** (p - 1.0) * omega ** (p / N) * volume ** (1.0 - p / N)


def logsob_explicit_constant(N: int, p: float, volume: float) -> float:
    """Weaker explicit log-Sobolev constant; reciprocal of mu_lower_bound."""
    return 1.0 / mu_lower_bound(N, p, volume)


def ball_lambda_q(lambda_q_B1: float, volume: float, N: int, p: float, q: float) -> float:
    """lambda_q of the ball of given volume from lambda_q(B_1) by scaling."""
    if lambda_q_B1 <= 0 or volume <= 0 or q <= 0:
        raise ValueError("inputs must be positive")
    omega = unit_ball_volume(N)
    expo = 1.0 - p / N - p / q
    return lambda_q_B1 * math.exp(expo * math.log(volume / omega))


def log_ball_lambda_q(lambda_q_B1: float, volume: float, N: int, p: float, q: float) -> float:
    """log of ball_lambda_q; safe for small q where the power itself underflows."""
    omega = unit_ball_volume(N)
    expo = 1.0 - p / N - p / q
    return math.log(lambda_q_B1) + expo * math.log(volume / omega)
