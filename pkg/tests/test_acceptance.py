"""Acceptance suite: one test (and one printed pass/fail line) per criterion."""

import math
import time

import numpy as np
import pytest

from singmin import analysis
from singmin.experiments import (classify_asymptotics, default_q_grid,
                                 estimate_mu, faber_krahn_check, q_sweep,
                                 random_positive_fields, scaling_exponent_fit)
from singmin.field_ops import energy_J, log_mean, quotient_log, sup_norm
from singmin.geometry import ShapeSpec, make_domain
from singmin.plap_solver import (SolverConfig, minimize_lambda_q, minimize_mu,
                                 mu_from_singular, solve_singular,
                                 solve_torsion)
from singmin.radial_oracle import radial_eigen_p, radial_lambda_q, radial_singular


def _line(num, ok, detail):
    print(f"[criterion {num:02d}] {'PASS' if ok else 'FAIL'}: {detail}", flush=True)
    assert ok, f"criterion {num}: {detail}"


@pytest.fixture(scope="module")
def acfg():
    return SolverConfig(multistart=4, seed=0)


@pytest.fixture(scope="module")
def scfg():
    return SolverConfig(multistart=1, seed=0)


@pytest.fixture(scope="module")
def sweep_disk128(disk128, acfg):
    return q_sweep(disk128, 2.0, default_q_grid(), acfg)


@pytest.fixture(scope="module")
def sweep_square128(square128, acfg):
    return q_sweep(square128, 2.0, default_q_grid(), acfg)


@pytest.fixture(scope="module")
def mu128(disk128, acfg):
    return minimize_mu(disk128, 2.0, acfg)


@pytest.fixture(scope="module")
def sing128(disk128, scfg):
    return solve_singular(disk128, 2.0, 1.0, scfg)


def _richardson_log_lambda(p, q, d64, d128, cfg):
    l64 = minimize_lambda_q(d64, p, q, cfg).extras["log_lambda"]
    l128 = minimize_lambda_q(d128, p, q, cfg).extras["log_lambda"]
    return 2.0 * l128 - l64


def test_criterion_01_log_moments():
    t0 = time.perf_counter()
    errs = [abs(analysis.log_moment_I(2) + 1.5)]
    for n in range(2, 10):
        errs.append(abs(analysis.log_moment_I(n + 1)
                        - (analysis.log_moment_I(n) - 1.0 / (n + 1))))
    cone_errs = [abs(analysis.cone_moment(1e-3, n) - analysis.harmonic_limit(n))
                 for n in (2, 3, 4)]
    dt = time.perf_counter() - t0
    ok = (errs[0] <= 1e-10 and all(e <= 1e-9 for e in errs[1:])
          and all(e <= 5e-3 for e in cone_errs) and dt < 5.0)
    _line(1, ok, f"I(2) err {errs[0]:.2e}, recursion max {max(errs[1:]):.2e}, "
          f"cone max {max(cone_errs):.2e}, {dt:.2f}s")


def test_criterion_02_torsion_oracles(disk128, square128, scfg):
    t0 = time.perf_counter()
    phi_d = solve_torsion(disk128, 2.0, scfg)
    disk_err = abs(sup_norm(phi_d) - 0.25)
    phi_s = solve_torsion(square128, 2.0, scfg)
    series = sum(4.0 / (n ** 3 * math.pi ** 3)
                 * (1.0 - 1.0 / math.cosh(n * math.pi / 2.0))
                 * math.sin(n * math.pi / 2.0)
                 for n in range(1, 200, 2))
    square_err = abs(sup_norm(phi_s) - series)
    dt = time.perf_counter() - t0
    ok = disk_err <= 5e-3 and square_err <= 1e-3 and dt < 30.0
    _line(2, ok, f"disk center err {disk_err:.2e}, square max err "
          f"{square_err:.2e} (series {series:.7f}), {dt:.2f}s")


def test_criterion_03_lambda1(disk64, disk128, scfg):
    exact = 8.0 / math.pi
    radial = radial_lambda_q(2, 2.0, 1.0).derived["lambda"]
    radial_err = abs(radial - exact) / exact
    grid = math.exp(_richardson_log_lambda(2.0, 1.0, disk64, disk128, scfg))
    grid_err = abs(grid - exact) / exact
    ok = radial_err <= 1e-6 and grid_err <= 0.02
    _line(3, ok, f"radial err {radial_err:.2e}, grid (Richardson 64/128) err "
          f"{grid_err:.2%}")


def test_criterion_04_lambda_q_matrix(disk64, disk128, scfg):
    t0 = time.perf_counter()
    worst = 0.0
    for p in (1.5, 2.0, 3.0):
        for q in (0.75, 0.5, 0.25):
            grid_log = _richardson_log_lambda(p, q, disk64, disk128, scfg)
            oracle_log = radial_lambda_q(2, p, q).derived["log_lambda"]
            worst = max(worst, abs(math.expm1(grid_log - oracle_log)))
    dt = time.perf_counter() - t0
    ok = worst <= 0.02 and dt < 600.0
    _line(4, ok, f"worst grid-vs-radial error {worst:.2%} over "
          f"p in {{1.5,2,3}} x q in {{0.75,0.5,0.25}}, {dt:.1f}s")


def test_criterion_05_monotone_sweeps(sweep_disk128, sweep_square128):
    ok = True
    for recs in (sweep_disk128, sweep_square128):
        lams = [r.Lambda_q for r in recs]
        ok = ok and all(b >= a * (1 - 0.005) for a, b in zip(lams, lams[1:]))
    _line(5, ok, "Lambda_q nondecreasing (0.5% slack) on disk and square, "
          f"q from 0.5 to {sweep_disk128[-1].q:g}")


def test_criterion_06_three_routes(disk128, sweep_disk128, mu128, sing128):
    V = disk128.volume
    mu_sweep = estimate_mu(sweep_disk128, V)
    mu_direct = mu128.objective
    mu_sing = mu_from_singular(sing128, 1.0, 2.0, V)
    vals = (mu_sweep, mu_direct, mu_sing)
    spread = max(abs(a - b) / min(a, b) for a in vals for b in vals)
    lb = analysis.mu_lower_bound(2, 2.0, V)
    ok = spread <= 0.03 and all(v >= 8 * math.pi * 0.98 for v in vals) \
        and all(v >= lb * 0.98 for v in vals)
    _line(6, ok, f"mu sweep {mu_sweep:.4f} / direct {mu_direct:.4f} / "
          f"singular {mu_sing:.4f}, spread {spread:.2%}, bound {lb:.4f}")


def test_criterion_07_minimizer_properties(disk128, mu128, acfg):
    u, mu = mu128.field, mu128.objective
    V = disk128.volume
    beta = abs(log_mean(u).log_value)
    j_err = abs(energy_J(u, 2.0, mu / V) - mu / 2.0) / (mu / 2.0)
    fields = random_positive_fields(disk128, 100, seed=acfg.seed + 1, cfg=acfg)
    j_ok = all(energy_J(f, 2.0, mu / V) >= mu / 2.0 - 1e-9 for f in fields)
    q_ok = all(quotient_log(f, 2.0) >= mu * (1 - 1e-3) for f in fields)
    ok = beta <= 1e-10 and j_err <= 5e-3 and j_ok and q_ok
    _line(7, ok, f"|beta| {beta:.1e}, J(u) vs mu/2 err {j_err:.2e}, "
          f"100 random fields J >= mu/2: {j_ok}, quotient >= mu: {q_ok}")


def test_criterion_08_singular_vs_radial(disk128, sing128, mu128, scfg):
    rad = radial_singular(2, 2.0, 1.0)
    idx = np.flatnonzero(disk128.interior)
    r = np.hypot(disk128.xs[idx], disk128.ys[idx])
    ref = rad(np.minimum(r, 1.0))
    sup_ref = rad.derived["sup_norm"]
    sup_diff = float(np.abs(sing128.values[idx] - ref).max()) / sup_ref
    u2 = solve_singular(disk128, 2.0, 2.0, scfg)
    hom = float(np.abs(u2.values - math.sqrt(2.0) * sing128.values).max())
    hom_rel = hom / sup_norm(u2)
    mu_sing = mu_from_singular(sing128, 1.0, 2.0, disk128.volume)
    mu_rel = abs(mu_sing - mu128.objective) / mu128.objective
    ok = sup_diff <= 0.02 and hom_rel <= 1e-3 and mu_rel <= 0.01
    _line(8, ok, f"grid-vs-radial sup diff {sup_diff:.2%}, homogeneity "
          f"2^(1/p) defect {hom_rel:.1e}, log-mean identity err {mu_rel:.2%}")


def test_criterion_09_apriori_bounds(sweep_disk128, sweep_square128):
    flags = [(r.q, r.bound_x4b_ok, r.bound_a1_ok)
             for r in sweep_disk128 + sweep_square128]
    ok = all(x and a for _, x, a in flags)
    _line(9, ok, f"sup-norm and torsion-barrier bounds hold for all "
          f"{len(flags)} sweep records")


def test_criterion_10_trichotomy(disk128, sweep_disk128, scfg):
    results = {}
    ok = True
    for name, dom, recs in (
        ("r=0.5", make_domain(ShapeSpec.disk(0.5, 128)), None),
        ("r=pi^-1/2", make_domain(ShapeSpec.disk(math.pi ** -0.5, 128)), None),
        ("r=1", disk128, sweep_disk128),
    ):
        if recs is None:
            recs = q_sweep(dom, 2.0, default_q_grid(), scfg)
        cls = classify_asymptotics(dom, 2.0, recs)
        results[name] = (cls["predicted"][0], cls["observed"])
        ok = ok and not cls["mismatch"]
    _line(10, ok, "; ".join(f"{k}: predicted {p}, observed {o}"
                            for k, (p, o) in results.items()))


def test_criterion_11_faber_krahn(square128, scfg):
    ok = True
    gaps = []
    for q in (1.0, 0.5):
        lam_sq, lam_ball, fk_ok = faber_krahn_check(square128, 2.0, q, scfg)
        gaps.append(lam_sq / lam_ball - 1.0)
        ok = ok and fk_ok and lam_sq >= lam_ball * 1.01
    _line(11, ok, f"square above equal-area disk by "
          f"{gaps[0]:.1%} (q=1) and {gaps[1]:.1%} (q=0.5)")


def test_criterion_12_scaling_exponent(disk64, scfg):
    ok = True
    details = []
    for p in (2.0, 3.0):
        report = {}
        slope = scaling_exponent_fit(disk64, p, [1.0, 1.5, 2.0], scfg, report)
        target = report["implemented_exponent"]
        ok = ok and abs(slope - target) <= 0.03
        details.append(f"p={p:g}: slope {slope:+.4f}, implemented exponent "
                       f"{target:+.2f}, alternative {report['alternative_exponent']:+.2f}")
    _line(12, ok, "; ".join(details))


def test_criterion_13_multistart_agreement(mu128):
    u = mu128.field
    scale = sup_norm(u)
    diffs = [float(np.abs(f.values - u.values).max()) / scale
             for f in mu128.extras["restart_fields"]]
    ok = len(diffs) == 3 and all(dv <= 1e-3 for dv in diffs) \
        and mu128.restarts_agreeing >= 2
    _line(13, ok, f"4 multistarts, pointwise spread {max(diffs):.1e} "
          f"(restarts agreeing: {mu128.restarts_agreeing})")
