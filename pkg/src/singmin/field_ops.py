"""Discrete functionals on nodal fields.

p-Dirichlet energy of the piecewise-linear interpolant, numerically stable
q-power means, geometric/log means, the Rayleigh-type quotients whose minima
are Lambda_q = lambda_q |Omega|^{p/q} and mu(Omega), and the log-energy J.
Also handles field CSV/JSON serialization with bit-exact round-trip.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .geometry import GridDomain, INTERIOR


class DegenerateFieldError(ValueError):
    """Raised when a functional needs a nontrivial field and got zero."""


@dataclass
class ScalarField:
    """One scalar per grid node; dirichlet means zero on non-interior nodes."""

    domain: GridDomain
    values: np.ndarray
    dirichlet: bool = True

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.domain.n_nodes,):
            raise ValueError("values must have one entry per node")
        if not np.isfinite(self.values).all():
            raise ValueError("field values must be finite")
        if self.dirichlet:
            self.values = self.values.copy()
            self.values[~self.domain.interior] = 0.0

    def copy_with(self, values: np.ndarray) -> "ScalarField":
        return ScalarField(domain=self.domain, values=values, dirichlet=self.dirichlet)


@dataclass(frozen=True)
class MeanValue:
    """Geometric mean theta = e^beta; beta = -inf encodes theta = 0."""

    value: float
    log_value: float


def _tri_gradients(d: GridDomain, vals: np.ndarray):
    """Per-triangle constant gradients (gx, gy) for both triangle families."""
    h = d.h
    lo, up = d.tri_lo, d.tri_up
    gx_lo = (vals[lo[:, 1]] - vals[lo[:, 0]]) / h
    gy_lo = (vals[lo[:, 2]] - vals[lo[:, 1]]) / h
    gx_up = (vals[up[:, 1]] - vals[up[:, 2]]) / h
    gy_up = (vals[up[:, 2]] - vals[up[:, 0]]) / h
    return (gx_lo, gy_lo), (gx_up, gy_up)


def p_energy(v: ScalarField, p: float) -> float:
    """Dirichlet p-energy: sum over triangles of area * |grad v|^p."""
    d = v.domain
    area = d.h * d.h / 2.0
    (gxl, gyl), (gxu, gyu) = _tri_gradients(d, v.values)
    e = (gxl * gxl + gyl * gyl) ** (p / 2.0)
    e = e.sum() + ((gxu * gxu + gyu * gyu) ** (p / 2.0)).sum()
    return float(area * e)


def p_energy_grad(v: ScalarField, p: float, delta: float = 0.0):
    """(energy, nodal gradient) of the delta-regularized p-energy.

    Uses (|grad v|^2 + delta^2)^{p/2} on each triangle; the nodal gradient
    is assembled by scattering each triangle's chain-rule contributions.
    """
    d = v.domain
    h = d.h
    area = h * h / 2.0
    vals = v.values
    (gxl, gyl), (gxu, gyu) = _tri_gradients(d, vals)
    g = np.zeros(d.n_nodes)
    energy = 0.0
    for tri, gx, gy, sgx, sgy in (
        (d.tri_lo, gxl, gyl, ((-1, 1, 0)), ((0, -1, 1))),
        (d.tri_up, gxu, gyu, ((0, 1, -1)), ((-1, 0, 1))),
    ):
        s2 = gx * gx + gy * gy + delta * delta
        energy += float(area * (s2 ** (p / 2.0)).sum())
        w = area * p * s2 ** (p / 2.0 - 1.0)
        for k in range(3):
            contrib = w * (gx * sgx[k] + gy * sgy[k]) / h
            g += np.bincount(tri[:, k], weights=contrib, minlength=d.n_nodes)
    g[~d.interior] = 0.0
    return energy, g


def q_mean(v: ScalarField, q: float) -> float:
    """m_q(v) = ((1/|Omega|) int |v|^q)^(1/q), stable down to tiny q.

    Evaluated as log m_q = log1p(q*s)/q with s = (1/V) int (|v|^q - 1)/q,
    using expm1 so the q -> 0 limit is exact (the geometric mean).
    """
    if not 0.0 < q <= 1.0:
        raise ValueError("q must lie in (0, 1]")
    d = v.domain
    w = d.weights
    idx = np.flatnonzero(w > 0)
    a = np.abs(v.values[idx])
    pw = w[idx] / d.volume
    with np.errstate(divide="ignore"):
        logs = np.log(a)
    # expm1(q*log|v|) = |v|^q - 1; expm1(-inf) = -1 covers zeros
    s = float(np.dot(pw, np.expm1(q * logs))) / q
    if 1.0 + q * s <= 0.0:
        return 0.0
    return math.exp(math.log1p(q * s) / q)


def log_mean(v: ScalarField) -> MeanValue:
    """Geometric mean theta_v and its log beta_v = (1/V) int log|v|."""
    d = v.domain
    w = d.weights
    idx = np.flatnonzero(w > 0)
    a = np.abs(v.values[idx])
    if (a == 0.0).any():
        return MeanValue(value=0.0, log_value=-math.inf)
    beta = float(np.dot(w[idx], np.log(a))) / d.volume
    return MeanValue(value=math.exp(beta), log_value=beta)


def quotient_q(v: ScalarField, p: float, q: float) -> float:
    """Lambda-quotient p_energy / m_q^p; its minimum is lambda_q |Omega|^{p/q}."""
    m = q_mean(v, q)
    if m == 0.0:
        raise DegenerateFieldError("q-mean vanishes")
    return p_energy(v, p) / m ** p


def quotient_log(v: ScalarField, p: float) -> float:
    """Log-quotient p_energy * e^{-p beta_v}; its minimum is mu(Omega)."""
    mv = log_mean(v)
    if mv.log_value == -math.inf:
        return math.inf
    return p_energy(v, p) * math.exp(-p * mv.log_value)


def energy_J(v: ScalarField, p: float, lam: float) -> float:
    """(1/p) p_energy - lam * int log|v|; +inf when the log-mean diverges."""
    mv = log_mean(v)
    if mv.log_value == -math.inf:
        return math.inf
    return p_energy(v, p) / p - lam * v.domain.volume * mv.log_value


def sup_norm(v: ScalarField) -> float:
    return float(np.abs(v.values).max())


def save_field(v: ScalarField, csv_path, header: dict | None = None) -> None:
    """Write (ix, iy, value) rows plus a JSON side file with metadata.

    Values are serialized with repr so the round-trip is bit-exact.
    """
    csv_path = Path(csv_path)
    d = v.domain
    lines = ["ix,iy,value"]
    for n in np.flatnonzero(v.values != 0.0) if v.dirichlet else range(d.n_nodes):
        lines.append(f"{n % d.nx},{n // d.nx},{float(v.values[n])!r}")
    csv_path.write_text("\n".join(lines) + "\n")
    meta = dict(header or {})
    meta.setdefault("schema_version", 1)
    meta["grid"] = {"nx": d.nx, "ny": d.ny, "h": repr(d.h),
                    "x0": repr(d.x0), "y0": repr(d.y0),
                    "volume": repr(d.volume)}
    meta["dirichlet"] = v.dirichlet
    csv_path.with_suffix(csv_path.suffix + ".json").write_text(
        json.dumps(meta, indent=2, sort_keys=True) + "\n")


def load_field(csv_path, domain: GridDomain) -> ScalarField:
    """Read a field written by save_field back onto its domain."""
    csv_path = Path(csv_path)
    meta = json.loads(csv_path.with_suffix(csv_path.suffix + ".json").read_text())
    vals = np.zeros(domain.n_nodes)
    lines = csv_path.read_text().splitlines()
    if lines[0] != "ix,iy,value":
        raise IOError("unrecognized field CSV header")
    for line in lines[1:]:
        sx, sy, sv = line.split(",")
        vals[int(sy) * domain.nx + int(sx)] = float(sv)
    return ScalarField(domain=domain, values=vals, dirichlet=bool(meta.get("dirichlet", True)))
