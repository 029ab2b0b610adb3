"""Variational solvers on grid domains.

All four problems reduce to descent on a scale-invariant log objective or
to a convex energy: the p-torsion function, the sublinear minimizer u_q of
the Lambda_q quotient, the mu(Omega) minimizer u of the log quotient, and
the singular problem -Delta_p u = lam/u via bracketed fixed-point
iteration.  Descent directions are preconditioned with the (cached) linear
Laplacian factorization of the domain, which makes the p = 2 cases
essentially Newton steps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .field_ops import (DegenerateFieldError, ScalarField, log_mean, p_energy,
                        p_energy_grad, q_mean, sup_norm)
from .geometry import GridDomain


class ConvergenceError(RuntimeError):
    """Descent or fixed-point loop hit max_iter while still moving."""

    def __init__(self, msg, last=None):
        super().__init__(msg)
        self.last = last


class SolverDefectError(RuntimeError):
    """A converged solution violates a bracket it is guaranteed to satisfy."""


class NonuniquenessError(RuntimeError):
    """No pair of multistarts agreed on the objective; likely under-resolved."""


@dataclass
class SolverConfig:
    grad_reg: float = 1e-8          # delta for p < 2 gradient regularization
    positivity_floor: float = 1e-6  # relative floor eps_rel for 1/u and line search
    tol_rel: float = 1e-10          # relative objective-decrease stopping threshold
    max_iter: int = 4000
    multistart: int = 4
    seed: int = 0
    bracket_slack: float = 0.01

    def __post_init__(self):
        if self.grad_reg < 0 or not 0 < self.positivity_floor < 1e-2:
            raise ValueError("bad regularization/floor")
        if self.tol_rel <= 0 or self.multistart < 1:
            raise ValueError("bad tolerance or multistart count")

    def delta(self, p: float) -> float:
        return self.grad_reg if p < 2.0 else 0.0


@dataclass
class MinimizerResult:
    field: ScalarField
    objective: float
    iterations: int
    restarts_agreeing: int
    extras: dict = field(default_factory=dict)


def _smooth_noise(d: GridDomain, rng) -> np.ndarray:
    """Zero-mean smooth perturbation field, sup-norm 1."""
    raw = rng.standard_normal(d.n_nodes)
    raw[~d.interior] = 0.0
    smooth = d.laplacian_solve(raw)
    m = np.abs(smooth).max()
    return smooth / m if m > 0 else smooth


def _descend(d, p, v0, objective, gradient, renormalize, cfg, floor=False):
    """Preconditioned Armijo descent on a scale-invariant objective.

    objective/gradient act on raw value arrays; renormalize maps a raw
    array to the normalized representative (objective must be invariant
    under it).  With floor=True candidates whose interior minimum drops
    below eps_rel * sup are rejected.
    """
    interior = d.interior
    eps = cfg.positivity_floor
    v = renormalize(v0.copy())
    F = objective(v)
    t = 1.0
    small_steps = 0
    it = 0
    for it in range(1, cfg.max_iter + 1):
        g = gradient(v)
        dirn = -d.laplacian_solve(g)
        slope = float(np.dot(g, dirn))
        if slope >= 0.0:
            break
        accepted = False
        t = min(t * 4.0, 1e6)
        while t > 1e-16:
            cand = v + t * dirn
            if floor:
                vi = cand[interior]
                if vi.min() <= eps * np.abs(cand).max():
                    t *= 0.5
                    continue
            cand = renormalize(cand)
            Fc = objective(cand)
            if Fc <= F + 1e-4 * t * slope:
                accepted = True
                break
            t *= 0.5
        if not accepted:
            break
        drop = F - Fc
        v, F = cand, Fc
        if drop <= cfg.tol_rel * (1.0 + abs(F)):
            small_steps += 1
            if small_steps >= 4:
                break
        else:
            small_steps = 0
    else:
        raise ConvergenceError(f"descent did not settle in {cfg.max_iter} iterations",
                               last=v)
    return v, F, it


def solve_torsion(d: GridDomain, p: float, cfg: SolverConfig | None = None) -> ScalarField:
    """Minimizer of (1/p) int |grad v|^p - int v over dirichlet fields."""
    if p <= 1.0:
        raise ValueError("p must exceed 1")
    cfg = cfg or SolverConfig()
    w = d.load_weights
    delta = cfg.delta(p)
    fld = ScalarField(domain=d, values=np.zeros(d.n_nodes))

    def objective(vals):
        e, _ = p_energy_grad(fld.copy_with(vals), p, delta)
        return e / p - float(np.dot(w, vals))

    def gradient(vals):
        _, g = p_energy_grad(fld.copy_with(vals), p, delta)
        return g / p - np.where(d.interior, w, 0.0)

    # start from the p=2 solution (one exact linear solve)
    v0 = 2.0 * d.laplacian_solve(np.where(d.interior, w, 0.0))
    v, _, _ = _descend(d, p, v0, objective, gradient, lambda x: x, cfg)
    if v[d.interior].min() <= 0.0:
        raise ConvergenceError("torsion iterate lost interior positivity",
                               last=fld.copy_with(v))
    return fld.copy_with(v)


def _quotient_descent(d, p, cfg, objective, gradient, renormalize, seed_field,
                      floor):
    """Shared multistart driver for the two quotient minimizers."""
    rng = np.random.default_rng(cfg.seed)
    runs = []
    base = seed_field.values
    for k in range(cfg.multistart):
        if k == 0:
            v0 = base.copy()
        else:
            v0 = base * (1.0 + 0.5 * _smooth_noise(d, rng))
            v0[v0 < 0] = 0.5 * base[v0 < 0] + 1e-12
        v, F, it = _descend(d, p, v0, objective, gradient, renormalize, cfg,
                            floor=floor)
        runs.append((F, v, it))
    runs.sort(key=lambda r: r[0])
    Fbest, vbest, itbest = runs[0]
    agree = sum(1 for F, _, _ in runs
                if abs(F - Fbest) <= 10.0 * cfg.tol_rel * (1.0 + abs(Fbest)))
    if cfg.multistart > 1 and agree < 2:
        raise NonuniquenessError(
            "no two multistarts agree on the objective; refine the grid")
    return vbest, Fbest, itbest, agree, runs


def minimize_lambda_q(d: GridDomain, p: float, q: float,
                      cfg: SolverConfig | None = None) -> MinimizerResult:
    """Minimize the Lambda-quotient p_energy/m_q^p over dirichlet fields.

    The objective value is Lambda_q = lambda_q(Omega)|Omega|^{p/q}; the
    eigenvalue itself is reported in log form (log_lambda) since the
    |Omega|^{-p/q} factor under/overflows for small q.  The field is
    returned with the int |u|^q = 1 normalization when that scale is
    representable, otherwise kept at m_q = 1 with the log of the pending
    scale factor recorded.
    """
    if p <= 1.0 or not 0.0 < q <= 1.0:
        raise ValueError("need p > 1 and q in (0, 1]")
    cfg = cfg or SolverConfig()
    delta = cfg.delta(p)
    fld = ScalarField(domain=d, values=np.zeros(d.n_nodes))
    w = d.weights
    V = d.volume

    def renormalize(vals):
        m = q_mean(fld.copy_with(vals), q)
        if m == 0.0:
            raise DegenerateFieldError("iterate collapsed to zero q-mean")
        return vals / m

    def objective(vals):  # log E - p log m_q, evaluated after renormalize (m=1)
        e = p_energy(fld.copy_with(vals), p)
        m = q_mean(fld.copy_with(vals), q)
        return math.log(e) - p * math.log(m)

    def gradient(vals):  # at m_q = 1 so int |v|^q = V
        e, ge = p_energy_grad(fld.copy_with(vals), p, delta)
        a = np.abs(vals)
        np.maximum(a, 1e-300, out=a)
        g = ge / e - p * w * np.sign(vals) * a ** (q - 1.0) / V
        g[~d.interior] = 0.0
        return g

    seed = solve_torsion(d, p, cfg)
    v, F, it, agree, _ = _quotient_descent(d, p, cfg, objective, gradient,
                                           renormalize, seed, floor=False)
    v = renormalize(np.abs(v))
    Lambda = math.exp(objective(v))
    log_lambda = math.log(Lambda) - (p / q) * math.log(V)
    # paper normalization int |u|^q = 1 needs the factor V^{-1/q}
    log_scale = -math.log(V) / q
    normalized = abs(log_scale) < 500.0
    vals = v * math.exp(log_scale) if normalized else v
    return MinimizerResult(
        field=fld.copy_with(vals), objective=Lambda, iterations=it,
        restarts_agreeing=agree,
        extras={"log_lambda": log_lambda, "q": q, "p": p,
                "paper_normalized": normalized,
                "pending_log_scale": 0.0 if normalized else log_scale})


def minimize_mu(d: GridDomain, p: float,
                cfg: SolverConfig | None = None) -> MinimizerResult:
    """Minimize the log-quotient p_energy * e^{-p beta} (its minimum is mu).

    The returned field is positive at interior nodes, sign-fixed, and
    normalized so its geometric mean is 1 (beta = 0).
    """
    if p <= 1.0:
        raise ValueError("p must exceed 1")
    cfg = cfg or SolverConfig()
    delta = cfg.delta(p)
    fld = ScalarField(domain=d, values=np.zeros(d.n_nodes))
    w = d.weights
    V = d.volume
    interior = d.interior

    def renormalize(vals):
        beta = log_mean(fld.copy_with(vals)).log_value
        if beta == -math.inf:
            raise DegenerateFieldError("iterate touched zero inside")
        return vals * math.exp(-beta)

    def objective(vals):
        e = p_energy(fld.copy_with(vals), p)
        beta = log_mean(fld.copy_with(vals)).log_value
        return math.log(e) - p * beta

    def gradient(vals):
        e, ge = p_energy_grad(fld.copy_with(vals), p, delta)
        g = ge / e - p * w / (V * np.where(interior, vals, 1.0))
        g[~interior] = 0.0
        return g

    seed = solve_torsion(d, p, cfg)
    v, F, it, agree, runs = _quotient_descent(d, p, cfg, objective, gradient,
                                              renormalize, seed, floor=True)
    # sign fix (volume average nonnegative) and exact theta = 1 normalization
    if float(np.dot(w, v)) < 0.0:
        v = -v
    for _ in range(3):
        v = renormalize(v)
    mu = p_energy(fld.copy_with(v), p)  # beta = 0, so quotient = energy
    others = []
    for F, vv, _ in runs[1:]:
        if float(np.dot(w, vv)) < 0.0:
            vv = -vv
        for _ in range(3):
            vv = renormalize(vv)
        others.append(fld.copy_with(vv))
    return MinimizerResult(
        field=fld.copy_with(v), objective=mu, iterations=it,
        restarts_agreeing=agree,
        extras={"p": p, "restart_fields": others})


def solve_singular(d: GridDomain, p: float, lam: float,
                   cfg: SolverConfig | None = None) -> ScalarField:
    """Positive solution of -Delta_p u = lam/u with zero boundary values.

    The problem is the Euler-Lagrange equation of the strictly convex
    functional (1/p) int |grad v|^p - lam int log v on positive dirichlet
    fields (a naive substitution iteration on the 1/u right-hand side is
    strongly order-reversing and settles into a 2-cycle instead of the
    fixed point), so the solution is computed by descent on that
    functional, started from the subsolution c*phi_p and confined to the
    bracket [c*phi_p, K_{N,p}|Omega|^{1/N} lam^{1/p}] at exit.
    """
    from .radial_oracle import ball_constants

    if p <= 1.0 or lam <= 0.0:
        raise ValueError("need p > 1 and lam > 0")
    cfg = cfg or SolverConfig()
    N = 2
    _, _, K = ball_constants(N, p)
    V = d.volume
    upper = K * V ** (1.0 / N) * lam ** (1.0 / p)
    c_low = (K * V ** (1.0 / N)) ** (-1.0 / (p - 1.0)) * lam ** (1.0 / p)
    phi = solve_torsion(d, p, cfg)
    fld = ScalarField(domain=d, values=np.zeros(d.n_nodes))
    interior = d.interior
    w = d.weights
    delta = cfg.delta(p)

    def objective(x):
        e, _ = p_energy_grad(fld.copy_with(x), p, delta)
        xi = x[interior]
        if xi.min() <= 0.0:
            return math.inf
        return e / p - lam * float(np.dot(w[interior], np.log(xi)))

    def gradient(x):
        _, g = p_energy_grad(fld.copy_with(x), p, delta)
        g = g / p - lam * np.where(interior, w / np.where(interior, x, 1.0), 0.0)
        g[~interior] = 0.0
        return g

    u, _, it = _descend(d, p, c_low * phi.values, objective, gradient,
                        lambda y: y, cfg, floor=True)
    slack = cfg.bracket_slack
    if np.abs(u).max() > upper * (1.0 + slack):
        raise SolverDefectError("singular solution exceeds the sup-norm bracket")
    low = c_low * phi.values
    if (u[interior] < low[interior] * (1.0 - slack) - slack * low.max()).any():
        raise SolverDefectError("singular solution dips below the torsion bracket")
    return fld.copy_with(u)


def rescale_to_lambda(u: ScalarField, mu: float, lam: float, volume: float,
                      p: float = 2.0) -> ScalarField:
    """Return (lam*volume/mu)^{1/p} * u; requires theta_u = 1 on input."""
    beta = log_mean(u).log_value
    if not abs(beta) <= 1e-8:
        raise ValueError("input field must have unit geometric mean")
    if mu <= 0.0 or lam <= 0.0:
        raise ValueError("mu and lam must be positive")
    factor = (lam * volume / mu) ** (1.0 / p)
    return u.copy_with(u.values * factor)


def mu_from_singular(u_lam: ScalarField, lam: float, p: float, volume: float) -> float:
    """Invert the log-mean identity: mu = lam * volume * e^{-p beta(u_lam)}."""
    beta = log_mean(u_lam).log_value
    if beta == -math.inf:
        raise DegenerateFieldError("field has vanishing geometric mean")
    return lam * volume * math.exp(-p * beta)


def el_residual_lambda_q(res: MinimizerResult, n_tests: int = 20,
                         seed: int = 0) -> float:
    """Max relative weak-form residual of a lambda_q minimizer.

    Tests <E'(u), phi>/p = Lambda_q/ (int|u|^q) * int |u|^{q-2} u phi against
    random smooth dirichlet test fields; normalized by the energy scale.
    """
    u = res.field
    d = u.domain
    p, q = res.extras["p"], res.extras["q"]
    e, ge = p_energy_grad(u, p, 0.0 if p >= 2 else 1e-8)
    a = np.maximum(np.abs(u.values), 1e-300)
    intq = float(np.dot(d.weights, a ** q))
    rhs = p * e / intq * d.weights * np.sign(u.values) * a ** (q - 1.0)
    rhs[~d.interior] = 0.0
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_tests):
        phi = _smooth_noise(d, rng)
        num = abs(float(np.dot(ge - rhs, phi)))
        worst = max(worst, num / (p * e))
    return worst
