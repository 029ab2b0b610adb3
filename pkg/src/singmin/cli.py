"""Command-line front end: verify / solve / sweep.

Artifacts are CSV (fields, sweep tables), JSON (summaries, manifests,
reports) and standalone SVG heatmaps.  Every run writes a manifest listing
the command, configuration, seed, and all emitted files; identical
command + seed at worker count 1 reproduces outputs byte-for-byte.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time

import numpy as np

from . import __version__, analysis
from .experiments import (MuReport, classify_asymptotics, default_q_grid,
                          estimate_mu, q_sweep, reconcile_mu, verify_identities)
from .field_ops import ScalarField, log_mean, q_mean, save_field, sup_norm
from .geometry import DomainError, GridDomain, ShapeSpec, make_domain
from .plap_solver import (ConvergenceError, NonuniquenessError, SolverConfig,
                          SolverDefectError, minimize_lambda_q, minimize_mu,
                          solve_singular, solve_torsion)

SCHEMA_VERSION = 1


def _shape_from_args(args) -> ShapeSpec:
    if args.shape == "disk":
        return ShapeSpec.disk(args.r, args.resolution)
    if args.shape in ("square", "rect"):
        h = args.w if args.shape == "square" else args.rect_h
        return ShapeSpec.rect(args.w, h, args.resolution)
    if args.shape == "lshape":
        return ShapeSpec.lshape(args.w, args.rect_h, args.cut, args.resolution)
    if args.shape == "mask":
        if not args.mask_file:
            raise SystemExit(2)
        return ShapeSpec.mask_file(args.mask_file, args.resolution)
    raise SystemExit(2)


def _config_from_args(args) -> SolverConfig:
    seed = args.seed
    env = os.environ.get("SINGMIN_SEED")
    if env is not None:
        seed = int(env)
    return SolverConfig(tol_rel=args.tol, max_iter=args.max_iter,
                        multistart=args.multistart, seed=seed)


def _write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


class Manifest:
    def __init__(self, args):
        self.data = {
            "schema_version": SCHEMA_VERSION,
            "tool_version": __version__,
            "command": " ".join(sys.argv[1:]) if sys.argv[1:] else args.cmd,
            "config": {k: v for k, v in vars(args).items()
                       if isinstance(v, (int, float, str, bool, type(None)))},
            "seed": args.seed if os.environ.get("SINGMIN_SEED") is None
                    else int(os.environ["SINGMIN_SEED"]),
            "started": time.strftime("%Y-%m-%dT%H:%M:%S"),
            "outputs": [],
            "passed": None,
        }

    def add(self, path):
        self.data["outputs"].append(str(path))

    def finish(self, path, passed):
        self.data["passed"] = bool(passed)
        self.data["finished"] = time.strftime("%Y-%m-%dT%H:%M:%S")
        _write_json(path, self.data)


# a small diverging colormap: dark blue -> white-ish -> dark red
_CMAP = [(0.10, 0.15, 0.45), (0.25, 0.45, 0.80), (0.85, 0.90, 0.95),
         (0.95, 0.60, 0.30), (0.60, 0.05, 0.10)]


def _color(t):
    t = min(max(t, 0.0), 1.0) * (len(_CMAP) - 1)
    i = min(int(t), len(_CMAP) - 2)
    f = t - i
    rgb = [(1 - f) * a + f * b for a, b in zip(_CMAP[i], _CMAP[i + 1])]
    return "#%02x%02x%02x" % tuple(int(255 * c + 0.5) for c in rgb)


def write_svg_heatmap(field: ScalarField, path, title="") -> None:
    """Standalone SVG heatmap of a nodal field with a min/max legend."""
    d = field.domain
    vals = field.values.reshape(d.ny, d.nx)
    step = max(1, max(d.nx, d.ny) // 256)
    vals = vals[::step, ::step]
    ny, nx = vals.shape
    vmin, vmax = float(vals.min()), float(vals.max())
    rng = vmax - vmin if vmax > vmin else 1.0
    cell = max(2, 512 // max(nx, ny))
    wpx, hpx = nx * cell, ny * cell + 40
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{wpx}" height="{hpx}">']
    parts.append(f'<rect width="{wpx}" height="{hpx}" fill="white"/>')
    for j in range(ny):
        y = (ny - 1 - j) * cell
        row = vals[j]
        for i in range(nx):
            c = _color((row[i] - vmin) / rng)
            parts.append(f'<rect x="{i * cell}" y="{y}" width="{cell}" '
                         f'height="{cell}" fill="{c}"/>')
    parts.append(f'<text x="4" y="{ny * cell + 16}" font-size="12">'
                 f'{title} min={vmin:.6g} max={vmax:.6g}</text>')
    parts.append(f'<text x="4" y="{ny * cell + 32}" font-size="12">'
                 f'singmin {__version__}</text>')
    parts.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(parts) + "\n")


def cmd_verify(args) -> int:
    cfg = _config_from_args(args)
    manifest = Manifest(args)
    if args.quick:
        report = {"checks": [], "all_ok": True}
        report["checks"].append({"name": "log_moment_I(2)",
                                 "value": analysis.log_moment_I(2),
                                 "expected": -1.5, "tol": 1e-10,
                                 "ok": abs(analysis.log_moment_I(2) + 1.5) <= 1e-10})
        for n in (2, 3, 4):
            v = analysis.cone_moment(1e-3, n)
            e = analysis.harmonic_limit(n)
            report["checks"].append({"name": f"cone_moment_limit_N{n}", "value": v,
                                     "expected": e, "tol": 5e-3,
                                     "ok": abs(v - e) <= 5e-3})
        report["all_ok"] = all(c["ok"] for c in report["checks"])
    else:
        report = verify_identities(cfg, resolution=args.resolution)
    out_json = os.path.join(args.out, "verify_report.json")
    out_md = os.path.join(args.out, "verify_report.md")
    os.makedirs(args.out, exist_ok=True)
    _write_json(out_json, {"schema_version": SCHEMA_VERSION, **report})
    lines = ["# identity verification report", ""]
    for c in report["checks"]:
        mark = "PASS" if c["ok"] else "FAIL"
        lines.append(f"- [{mark}] {c['name']}: value={c['value']:.12g} "
                     f"expected={c['expected']:.12g} tol={c['tol']:g}")
    lines.append("")
    lines.append(f"overall: {'PASS' if report['all_ok'] else 'FAIL'}")
    with open(out_md, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    manifest.add(out_json)
    manifest.add(out_md)
    manifest.finish(os.path.join(args.out, "manifest.json"), report["all_ok"])
    print(f"verify: {len(report['checks'])} checks, "
          f"{'all passed' if report['all_ok'] else 'FAILURES'}")
    return 0 if report["all_ok"] else 1


def cmd_solve(args) -> int:
    cfg = _config_from_args(args)
    manifest = Manifest(args)
    os.makedirs(args.out, exist_ok=True)
    try:
        d = make_domain(_shape_from_args(args))
    except (DomainError, IOError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    summary = {"schema_version": SCHEMA_VERSION, "task": args.task,
               "p": args.p, "volume": d.volume, "h": d.h}
    try:
        if args.task == "torsion":
            fieldr = solve_torsion(d, args.p, cfg)
            summary["sup_norm"] = sup_norm(fieldr)
        elif args.task == "lambda-q":
            if args.q is None:
                print("error: --q required for lambda-q", file=sys.stderr)
                return 2
            res = minimize_lambda_q(d, args.p, args.q, cfg)
            fieldr = res.field
            summary.update(q=args.q, Lambda_q=res.objective,
                           log_lambda_q=res.extras["log_lambda"],
                           iterations=res.iterations,
                           restarts_agreeing=res.restarts_agreeing)
        elif args.task == "mu":
            res = minimize_mu(d, args.p, cfg)
            fieldr = res.field
            summary.update(mu=res.objective, iterations=res.iterations,
                           restarts_agreeing=res.restarts_agreeing,
                           beta=log_mean(res.field).log_value)
        elif args.task == "singular":
            if args.lam is None:
                print("error: --lambda required for singular", file=sys.stderr)
                return 2
            fieldr = solve_singular(d, args.p, args.lam, cfg)
            summary.update(lam=args.lam, sup_norm=sup_norm(fieldr),
                           bracket_upper_ok=True, bracket_lower_ok=True)
        else:
            return 2
    except (ConvergenceError, SolverDefectError, NonuniquenessError) as exc:
        diag = os.path.join(args.out, "failure.json")
        _write_json(diag, {"schema_version": SCHEMA_VERSION,
                           "error": type(exc).__name__, "message": str(exc)})
        manifest.add(diag)
        manifest.finish(os.path.join(args.out, "manifest.json"), False)
        print(f"solver failure: {exc}", file=sys.stderr)
        return 1
    csv_path = os.path.join(args.out, "field.csv")
    save_field(fieldr, csv_path, header={"task": args.task, "p": args.p,
                                         "q": args.q, "lambda": args.lam})
    manifest.add(csv_path)
    manifest.add(csv_path + ".json")
    sum_path = os.path.join(args.out, "summary.json")
    _write_json(sum_path, summary)
    manifest.add(sum_path)
    if args.svg:
        write_svg_heatmap(fieldr, args.svg, title=args.task)
        manifest.add(args.svg)
    manifest.finish(os.path.join(args.out, "manifest.json"), True)
    print(f"solve {args.task}: done, outputs in {args.out}")
    return 0


def cmd_sweep(args) -> int:
    cfg = _config_from_args(args)
    manifest = Manifest(args)
    if not (0 < args.q_factor < 1 and 0 < args.q_to <= args.q_from <= 1):
        print("error: invalid q grid spec", file=sys.stderr)
        return 2
    os.makedirs(args.out, exist_ok=True)
    try:
        d = make_domain(_shape_from_args(args))
    except (DomainError, IOError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    grid = default_q_grid(args.q_from, args.q_to, args.q_factor)
    records = q_sweep(d, args.p, grid, cfg, workers=args.workers)
    csv_path = os.path.join(args.out, "sweep.csv")
    with open(csv_path, "w") as fh:
        fh.write("q,Lambda_q,log_lambda_q,sup_norm,x4b_ok,a1_ok\n")
        for r in records:
            fh.write(f"{r.q!r},{r.Lambda_q!r},{r.log_lambda_q!r},"
                     f"{r.sup_norm_uq!r},{int(r.bound_x4b_ok)},{int(r.bound_a1_ok)}\n")
    manifest.add(csv_path)
    mu = estimate_mu(records, d.volume)
    cls = classify_asymptotics(d, args.p, records)
    rep_path = os.path.join(args.out, "mu_report.json")
    _write_json(rep_path, {"schema_version": SCHEMA_VERSION,
                           "mu_estimate": mu, "volume": d.volume,
                           "classification": cls})
    manifest.add(rep_path)
    monotone = all(b.Lambda_q >= a.Lambda_q * (1 - 0.005)
                   for a, b in zip(records, records[1:]))
    bounds_ok = all(r.bound_x4b_ok and r.bound_a1_ok for r in records)
    ok = monotone and bounds_ok
    manifest.finish(os.path.join(args.out, "manifest.json"), ok)
    lam_word = {"diverging": "lambda diverging",
                "vanishing": "lambda vanishing",
                "converging-to-value": "lambda converging"}[cls["observed"][0]]
    print(f"sweep: {len(records)} points, {lam_word}, "
          f"mu estimate {mu:.6g}, {'ok' if ok else 'CHECK FAILURES'}")
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="singmin",
                                 description="singular minimization constants "
                                             "for the p-Laplacian on 2-D domains")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="cmd", required=True)

    def common(sp):
        sp.add_argument("--p", type=float, default=2.0)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--tol", type=float, default=1e-10)
        sp.add_argument("--max-iter", dest="max_iter", type=int, default=4000)
        sp.add_argument("--multistart", type=int, default=4)
        sp.add_argument("--workers", type=int, default=os.cpu_count() or 1)
        sp.add_argument("--out", default=".")

    def shape(sp):
        sp.add_argument("--shape", default="disk",
                        choices=["disk", "square", "rect", "lshape", "mask"])
        sp.add_argument("--r", type=float, default=1.0)
        sp.add_argument("--w", type=float, default=1.0)
        sp.add_argument("--rect-h", dest="rect_h", type=float, default=1.0)
        sp.add_argument("--cut", type=float, default=0.5)
        sp.add_argument("--mask-file", default=None)
        sp.add_argument("--resolution", type=int, default=128)

    sp = sub.add_parser("verify", help="run the identity verification suite")
    common(sp)
    sp.add_argument("--n", type=int, default=2)
    sp.add_argument("--quick", action="store_true")
    sp.add_argument("--resolution", type=int, default=96)
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("solve", help="solve one variational problem")
    common(sp)
    shape(sp)
    sp.add_argument("--task", required=True,
                    choices=["torsion", "lambda-q", "mu", "singular"])
    sp.add_argument("--q", type=float, default=None)
    sp.add_argument("--lambda", dest="lam", type=float, default=None)
    sp.add_argument("--svg", default=None)
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("sweep", help="q-sweep with bound checks and mu estimate")
    common(sp)
    shape(sp)
    sp.add_argument("--q-from", dest="q_from", type=float, default=0.5)
    sp.add_argument("--q-to", dest="q_to", type=float, default=0.005)
    sp.add_argument("--q-factor", dest="q_factor", type=float, default=0.5)
    sp.set_defaults(func=cmd_sweep)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.p <= 1.0:
        print("error: p must exceed 1", file=sys.stderr)
        return 2
    if getattr(args, "n", 2) < 2:
        print("error: N must be at least 2", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
