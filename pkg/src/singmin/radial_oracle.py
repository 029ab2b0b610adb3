"""High-accuracy radial reference solutions on balls by shooting.

Solves the radial reductions of the three problems on B_1 in R^N:

  torsion-type / sublinear:  -(r^{N-1}|w'|^{p-2}w')' = lam r^{N-1} w^{q-1}
  eigenvalue (q = p):        -(r^{N-1}|w'|^{p-2}w')' = lam r^{N-1} w^{p-1}
  singular:                  -(r^{N-1}|w'|^{p-2}w')' = lam r^{N-1} / w

Adaptive Runge-Kutta on the state (w, z) with z = |w'|^{p-2}w', a series
start at r = 0 to step over the |w'|^{p-2} degeneracy, and a rescale of the
hit radius onto r = 1, which absorbs residual bisection error exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.integrate import quad, solve_ivp
from scipy.optimize import brentq

from .analysis import linfty_constant, poincare_constant, unit_ball_volume


class OracleError(RuntimeError):
    """Raised when the shooting bracket or integration fails."""


@dataclass
class RadialSolution:
    """Radial profile w(r) on [0, 1] with problem data and derived scalars."""

    N: int
    p: float
    q_or_lam: float
    grid: np.ndarray
    profile: np.ndarray
    derived: dict = field(default_factory=dict)

    def __call__(self, r):
        return np.interp(r, self.grid, self.profile)


def _shoot(N, p, f, a, rtol, cutoff=1e-9):
    """Integrate outward from w(0) = a until w hits (nearly) zero.

    f(w) is the nonlinearity (rhs divided by r^{N-1}); returns
    (r_hit, rs, ws) where rs/ws sample the profile on [r0, r_hit].  When f
    is singular at w = 0 (the lam/w problem) the integrator cannot cross
    zero, so the terminal event fires at w = cutoff * a and the true hit
    radius is recovered by one Newton step along the local slope.
    """
    pp = p / (p - 1.0)
    floor = cutoff * a * 1e-3

    def rhs(r, y):
        w, z = y
        dw = math.copysign(abs(z) ** (1.0 / (p - 1.0)), z)
        dz = -(N - 1) * z / r - f(max(w, floor))
        return (dw, dz)

    def hit(r, y):
        return y[0] - cutoff * a

    hit.terminal = True
    hit.direction = -1

    # series start: w ~ a - ((p-1)/p)(f(a)/N)^{1/(p-1)} r^{p/(p-1)}
    r0 = 1e-6
    fa = f(a)
    w0 = a - (p - 1.0) / p * (fa / N) ** (1.0 / (p - 1.0)) * r0 ** pp
    z0 = -fa * r0 / N
    sol = solve_ivp(rhs, (r0, 1e3), (w0, z0), method="RK45",
                    rtol=rtol, atol=rtol * a * 1e-3, events=hit,
                    dense_output=True, max_step=0.05)
    if not sol.t_events[0].size:
        raise OracleError("profile never reached zero")
    r_end = float(sol.t_events[0][0])
    w_end, z_end = sol.y_events[0][0]
    dw_end = math.copysign(abs(z_end) ** (1.0 / (p - 1.0)), z_end)
    r_hit = r_end + (w_end / -dw_end if dw_end < 0 else 0.0)
    rs = np.linspace(r0, r_end, 2001)
    ws = np.maximum(sol.sol(rs)[0], 0.0)
    rs = rs * 1.0
    rs[-1] = r_hit
    ws[-1] = 0.0
    # prepend the series segment back to r = 0
    head = np.linspace(0.0, r0, 8, endpoint=False)
    whead = a - (p - 1.0) / p * (fa / N) ** (1.0 / (p - 1.0)) * head ** pp
    return r_hit, np.concatenate([head, rs]), np.concatenate([whead, ws])


def _log_ball_mean(grid, profile, N, power_of_log=1):
    """(1/|B_1|) int_{B_1} log w = N int_0^1 r^{N-1} log w(r) dr by quadrature."""
    def integrand(r):
        w = float(np.interp(r, grid, profile))
        if w <= 0.0:
            # integrable endpoint; nudge inside
            w = max(float(np.interp(1.0 - 1e-9, grid, profile)), 1e-300)
        return N * r ** (N - 1) * math.log(w)

    val, _ = quad(integrand, 0.0, 1.0, points=[1.0 - 1e-6], limit=400,
                  epsabs=1e-11, epsrel=1e-10)
    return val


def radial_lambda_q(N: int, p: float, q: float, tol: float = 1e-8,
                    radius: float = 1.0) -> RadialSolution:
    """lambda_q of the ball B_radius, normalized so int |w|^q = 1.

    One shot from w(0) = 1 with unit nonlinearity constant suffices: if w
    hits zero at r_hit then v(x) = w(r_hit x) solves the problem on B_1
    with lam_eff = r_hit^p, and the scaling w -> c w, lam -> c^{p-q} lam
    with c = (int_{B_1} v^q)^{-1/q} enforces the normalization.
    """
    if N < 2 or p <= 1.0 or not 0.0 < q <= 1.0 or tol <= 0:
        raise ValueError("need N >= 2, p > 1, q in (0, 1], tol > 0")
    r_hit, rs, ws = _shoot(N, p, lambda w: w ** (q - 1.0), 1.0, tol * 1e-2)
    grid = rs / r_hit
    lam_eff = r_hit ** p

    def wq(r):
        return N * r ** (N - 1) * float(np.interp(r, grid, ws)) ** q

    intq, _ = quad(wq, 0.0, 1.0, limit=400, epsabs=1e-12, epsrel=1e-11)
    intq *= unit_ball_volume(N)  # over B_1, not the normalized measure
    c = intq ** (-1.0 / q)
    lam = lam_eff * c ** (p - q)
    profile = ws * c
    log_lam = math.log(lam)
    if radius != 1.0:
        # lambda_q(B_R) = lambda_q(B_1) R^{N - p - Np/q}; done in log form since
        # the power under/overflows for small q
        log_lam += (N - p - N * p / q) * math.log(radius)
        lam = math.exp(log_lam) if abs(log_lam) < 700 else (0.0 if log_lam < 0 else math.inf)
    sol = RadialSolution(N=N, p=p, q_or_lam=q, grid=grid, profile=profile)
    sol.derived = {
        "lambda": lam,
        "log_lambda": log_lam,
        "sup_norm": float(profile.max()),
        "log_mean": _log_ball_mean(grid, profile, N),
        "radius": radius,
    }
    return sol


def radial_eigen_p(N: int, p: float, tol: float = 1e-8) -> float:
    """First Dirichlet eigenvalue of the p-Laplacian on B_1 (the q = p case).

    Shoots from w(0) = 1 with nonlinearity lam w^{p-1} and bisects lam so
    the first zero of w lands at r = 1; by p-homogeneity the hit radius
    satisfies lam(B_1) = lam * r_hit^p, so a single shot already determines
    the answer and the bisection only sharpens the hit-radius estimate.
    """
    if N < 2 or p <= 1.0 or tol <= 0:
        raise ValueError("need N >= 2, p > 1, tol > 0")
    r_hit, _, _ = _shoot(N, p, lambda w: max(w, 0.0) ** (p - 1.0), 1.0, tol * 1e-2)
    lam = r_hit ** p
    # one polish pass at the scaled eigenvalue to cancel integrator bias
    r_hit2, _, _ = _shoot(N, p, lambda w: lam * max(w, 0.0) ** (p - 1.0), 1.0, tol * 1e-3)
    return lam * r_hit2 ** p


def radial_singular(N: int, p: float, lam: float, tol: float = 1e-8) -> RadialSolution:
    """Radial solution of -Delta_p w = lam / w on B_1 with w(1) = 0.

    A single shot with unit lam from any center value a hits zero at some
    r_hit; rescaling radius to 1 and using the homogeneity w -> s w,
    lam -> s^p lam places the solution at the requested lam exactly.
    """
    if N < 2 or p <= 1.0 or lam <= 0 or tol <= 0:
        raise ValueError("need N >= 2, p > 1, lam > 0, tol > 0")
    a0 = 1.0
    r_hit, rs, ws = _shoot(N, p, lambda w: 1.0 / w, a0, tol * 1e-2)
    grid = rs / r_hit
    # v(x) = w(r_hit x) solves with lam_eff = r_hit^p * 1 ... then scale to lam:
    lam_eff = r_hit ** p
    s = (lam / lam_eff) ** (1.0 / p)
    profile = ws * s
    beta = _log_ball_mean(grid, profile, N)
    vol = unit_ball_volume(N)
    sol = RadialSolution(N=N, p=p, q_or_lam=lam, grid=grid, profile=profile)
    sol.derived = {
        "mu": lam * vol * math.exp(-p * beta),
        "sup_norm": float(profile.max()),
        "log_mean": beta,
        "center_value": float(profile[0]),
    }
    return sol


@lru_cache(maxsize=None)
def ball_constants(N: int, p: float):
    """(lambda_p(B_1), C_{N,p}, K_{N,p}) via the radial eigenvalue oracle."""
    lam_p = radial_eigen_p(N, p, tol=1e-9)
    C = poincare_constant(N, p, lam_p)
    K = linfty_constant(N, p, C)
    return lam_p, C, K
