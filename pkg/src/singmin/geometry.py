"""Structured 2-D triangulated domains.

A domain is a uniform node grid with each cell split into two right
triangles.  Nodes are classified interior / boundary / exterior; a triangle
is kept iff all three vertices are non-exterior, and admissible (Dirichlet)
fields vanish on every non-interior node.  Analytic shapes use a signed
distance with a half-spacing boundary band, which places the discrete
Dirichlet ring on top of the true boundary instead of one cell inside it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from pathlib import Path

import numpy as np

EXTERIOR, INTERIOR, BOUNDARY = 0, 1, 2

# neighbor offsets appearing in the 6-triangle stencil of a node
_STENCIL = ((1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (-1, -1))


class DomainError(ValueError):
    """Raised when a shape specification yields no usable domain."""


@dataclass(frozen=True)
class ShapeSpec:
    """Shape description: kind in {disk, rect, lshape, mask}, params per kind."""

    kind: str
    resolution: int
    params: tuple = ()
    center: tuple | None = None

    @staticmethod
    def disk(r: float = 1.0, resolution: int = 64) -> "ShapeSpec":
        return ShapeSpec("disk", resolution, (float(r),), (0.0, 0.0))

    @staticmethod
    def rect(w: float = 1.0, h: float = 1.0, resolution: int = 64) -> "ShapeSpec":
        return ShapeSpec("rect", resolution, (float(w), float(h)), (w / 2.0, h / 2.0))

    @staticmethod
    def lshape(w: float = 1.0, h: float = 1.0, cut: float = 0.5, resolution: int = 64) -> "ShapeSpec":
        return ShapeSpec("lshape", resolution, (float(w), float(h), float(cut)),
                         ((w - cut) / 2.0, (h - cut) / 2.0))

    @staticmethod
    def mask_file(path: str, resolution: int = 1) -> "ShapeSpec":
        return ShapeSpec("mask", resolution, (str(path),), None)

    def validate(self) -> None:
        if self.resolution <= 0:
            raise DomainError("resolution must be positive")
        if self.kind in ("disk", "rect", "lshape"):
            lengths = self.params if self.kind != "lshape" else self.params
            if any(v <= 0 for v in lengths):
                raise DomainError("all lengths must be positive")
            if self.kind == "lshape" and self.params[2] >= min(self.params[0], self.params[1]):
                raise DomainError("lshape cut must be smaller than both sides")
        elif self.kind != "mask":
            raise DomainError(f"unknown shape kind {self.kind!r}")


@dataclass(eq=False)
class GridDomain:
    """Immutable triangulated grid domain (treat as read-only after build)."""

    nx: int
    ny: int
    h: float
    x0: float
    y0: float
    mask: np.ndarray          # int8, len nx*ny, values EXTERIOR/INTERIOR/BOUNDARY
    tri_lo: np.ndarray        # (n,3) node ids (a, a+dx, a+dx+dy) of lower triangles
    tri_up: np.ndarray        # (n,3) node ids (a, a+dx+dy, a+dy) of upper triangles
    volume: float
    center: tuple | None = None
    _cache: dict = dc_field(default_factory=dict, repr=False)

    @property
    def n_nodes(self) -> int:
        return self.nx * self.ny

    @property
    def interior(self) -> np.ndarray:
        return self.mask == INTERIOR

    @property
    def xs(self) -> np.ndarray:
        if "xs" not in self._cache:
            ii = np.arange(self.n_nodes) % self.nx
            jj = np.arange(self.n_nodes) // self.nx
            self._cache["xs"] = self.x0 + ii * self.h
            self._cache["ys"] = self.y0 + jj * self.h
        return self._cache["xs"]

    @property
    def ys(self) -> np.ndarray:
        self.xs  # populate
        return self._cache["ys"]

    @property
    def triangles(self):
        """List of (node-triple, area) for all kept triangles."""
        area = self.h * self.h / 2.0
        out = [(tuple(t), area) for t in self.tri_lo]
        out += [(tuple(t), area) for t in self.tri_up]
        return out

    @property
    def load_weights(self) -> np.ndarray:
        """Raw lumped weights (one third of incident triangle area), zero off-interior.

        These are the P1 load-vector entries int phi_i and drive right-hand
        sides; their total undershoots the volume by the boundary strip.
        """
        if "load_weights" not in self._cache:
            area3 = self.h * self.h / 6.0
            w = np.zeros(self.n_nodes)
            for tri in (self.tri_lo, self.tri_up):
                for k in range(3):
                    w += np.bincount(tri[:, k], minlength=self.n_nodes) * area3
            w[~self.interior] = 0.0
            if w.sum() <= 0:
                raise DomainError("domain has no interior quadrature mass")
            self._cache["load_weights"] = w
        return self._cache["load_weights"]

    @property
    def weights(self) -> np.ndarray:
        """Quadrature weights for means, rescaled so that they sum to the volume.

        The rescale makes constant fields exact for the q- and log-means
        (the measure p_i = w_i/volume is then a probability measure).
        """
        if "weights" not in self._cache:
            w = self.load_weights
            self._cache["weights"] = w * (self.volume / w.sum())
        return self._cache["weights"]

    def laplacian_solve(self, rhs: np.ndarray) -> np.ndarray:
        """Apply the inverse of the P1 Laplacian stiffness on interior nodes.

        Used both as the p = 2 stiffness and as the descent preconditioner;
        the factorization is computed once and cached.
        """
        if "lap" not in self._cache:
            self._cache["lap"] = _factor_laplacian(self)
        solve, idx = self._cache["lap"]
        out = np.zeros(self.n_nodes)
        out[idx] = solve(rhs[idx])
        return out


def _factor_laplacian(dom: GridDomain):
    import scipy.sparse as sp
    from scipy.sparse.linalg import splu

    # each right triangle contributes two unit "springs" along its legs
    edges = []
    for tri, legs in ((dom.tri_lo, ((0, 1), (1, 2))), (dom.tri_up, ((2, 1), (0, 2)))):
        for i, j in legs:
            edges.append((tri[:, i], tri[:, j]))
    rows = np.concatenate([np.concatenate([e[0], e[1], e[0], e[1]]) for e in edges])
    cols = np.concatenate([np.concatenate([e[0], e[1], e[1], e[0]]) for e in edges])
    ones = np.ones(len(edges[0][0]))
    data = np.concatenate([np.concatenate([ones, ones, -ones, -ones]) for e in edges])
    K = sp.coo_matrix((data, (rows, cols)), shape=(dom.n_nodes, dom.n_nodes)).tocsr()
    idx = np.flatnonzero(dom.interior)
    Kii = K[np.ix_(idx, idx)].tocsc()
    lu = splu(Kii)
    return lu.solve, idx


def _signed_distance(spec: ShapeSpec, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    if spec.kind == "disk":
        (r,) = spec.params
        return np.hypot(x, y) - r
    if spec.kind == "rect":
        w, h = spec.params
        return np.maximum.reduce([-x, x - w, -y, y - h])
    if spec.kind == "lshape":
        w, h, cut = spec.params
        outer = np.maximum.reduce([-x, x - w, -y, y - h])
        # cut corner [w-cut, w] x [h-cut, h]; positive inside the cut
        in_cut = np.minimum(x - (w - cut), y - (h - cut))
        return np.maximum(outer, in_cut)
    raise DomainError(f"no signed distance for kind {spec.kind!r}")


def _classify(inside: np.ndarray, near: np.ndarray, nx: int, ny: int) -> np.ndarray:
    mask = np.full(inside.shape, EXTERIOR, dtype=np.int8)
    mask[near] = BOUNDARY
    mask[inside] = INTERIOR
    # promote exterior nodes in the triangle stencil of an interior node,
    # so every triangle touching an interior node is kept
    interior2 = inside.reshape(ny, nx)
    m2 = mask.reshape(ny, nx)
    for di, dj in _STENCIL:
        shifted = np.zeros_like(interior2)
        src = interior2[max(0, -dj):ny - max(0, dj), max(0, -di):nx - max(0, di)]
        shifted[max(0, dj):ny - max(0, -dj), max(0, di):nx - max(0, -di)] = src
        m2[(m2 == EXTERIOR) & shifted] = BOUNDARY
    return m2.reshape(-1)


def _build_triangles(mask: np.ndarray, nx: int, ny: int):
    ok = (mask != EXTERIOR).reshape(ny, nx)
    a = np.arange(nx * ny).reshape(ny, nx)[:-1, :-1]
    va, vb = ok[:-1, :-1], ok[:-1, 1:]
    vc, vd = ok[1:, 1:], ok[1:, :-1]
    keep_lo = va & vb & vc
    keep_up = va & vc & vd
    ids = a[keep_lo]
    tri_lo = np.stack([ids, ids + 1, ids + 1 + nx], axis=1)
    ids = a[keep_up]
    tri_up = np.stack([ids, ids + 1 + nx, ids + nx], axis=1)
    return tri_lo.astype(np.int64), tri_up.astype(np.int64)


def make_domain(spec: ShapeSpec) -> GridDomain:
    """Build a GridDomain from a shape spec."""
    spec.validate()
    h = 1.0 / spec.resolution

    if spec.kind == "mask":
        (path,) = spec.params
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise IOError(f"cannot read mask file {path!r}: {exc}") from exc
        rows = [line for line in text.splitlines() if line]
        if not rows or len({len(r) for r in rows}) != 1:
            raise DomainError("mask file must be a nonempty grid of uniform row length")
        if set("".join(rows)) - {".", "#"}:
            raise DomainError("mask file may only contain '.' and '#'")
        grid = np.array([[c == "#" for c in row] for row in rows], dtype=bool)
        grid = np.pad(grid, 1, constant_values=False)
        ny, nx = grid.shape
        inside = grid.reshape(-1)
        near = np.zeros_like(inside)
        x0 = y0 = 0.0
    else:
        # bounding box padded by two cells
        if spec.kind == "disk":
            (r,) = spec.params
            xlo, xhi, ylo, yhi = -r, r, -r, r
        else:
            w, hh = spec.params[0], spec.params[1]
            xlo, xhi, ylo, yhi = 0.0, w, 0.0, hh
        x0 = math.floor(xlo / h) * h - 2 * h
        y0 = math.floor(ylo / h) * h - 2 * h
        nx = int(math.ceil((xhi - x0) / h)) + 3
        ny = int(math.ceil((yhi - y0) / h)) + 3
        ii = np.arange(nx * ny) % nx
        jj = np.arange(nx * ny) // nx
        sd = _signed_distance(spec, x0 + ii * h, y0 + jj * h)
        inside = sd < 0.0
        near = (sd >= 0.0) & (sd <= 0.5 * h)

    mask = _classify(inside, near, nx, ny)
    if not (mask == INTERIOR).any():
        raise DomainError("shape has empty interior at this resolution")
    tri_lo, tri_up = _build_triangles(mask, nx, ny)
    n_tri = len(tri_lo) + len(tri_up)
    if n_tri == 0:
        raise DomainError("shape yields no triangles at this resolution")
    volume = n_tri * h * h / 2.0
    return GridDomain(nx=nx, ny=ny, h=h, x0=x0, y0=y0, mask=mask,
                      tri_lo=tri_lo, tri_up=tri_up, volume=volume, center=spec.center)


def scale_domain(d: GridDomain, t: float) -> GridDomain:
    """Homothety by t > 0: same mask, spacing t*h, volume t^2 * volume."""
    if t <= 0:
        raise ValueError("scale factor must be positive")
    center = None if d.center is None else (d.center[0] * t, d.center[1] * t)
    return GridDomain(nx=d.nx, ny=d.ny, h=d.h * t, x0=d.x0 * t, y0=d.y0 * t,
                      mask=d.mask, tri_lo=d.tri_lo, tri_up=d.tri_up,
                      volume=d.volume * t * t, center=center)


def schwarz_radius(d: GridDomain) -> float:
    """Radius of the disk with the same (discrete) volume."""
    return math.sqrt(d.volume / math.pi)


def _indicator_sample(d: GridDomain, chi: np.ndarray, px: np.ndarray, py: np.ndarray) -> np.ndarray:
    """Bilinear sample of a nodal indicator at arbitrary points."""
    fx = (px - d.x0) / d.h
    fy = (py - d.y0) / d.h
    i = np.clip(np.floor(fx).astype(int), 0, d.nx - 2)
    j = np.clip(np.floor(fy).astype(int), 0, d.ny - 2)
    tx = np.clip(fx - i, 0.0, 1.0)
    ty = np.clip(fy - j, 0.0, 1.0)
    n = j * d.nx + i
    c2 = chi.reshape(-1)
    return ((1 - tx) * (1 - ty) * c2[n] + tx * (1 - ty) * c2[n + 1]
            + tx * ty * c2[n + 1 + d.nx] + (1 - tx) * ty * c2[n + d.nx])


def cone_field(d: GridDomain, center: tuple | None = None):
    """Cone gauge field rho(x) = 1 - 1/r(x) for a star-shaped domain.

    r(x) is computed per interior node by marching along the ray from the
    center and bisecting the crossing of the interior indicator, to a
    tolerance of h/100.  The caller asserts star-shapedness.
    """
    from .field_ops import ScalarField

    if center is None:
        center = d.center
    if center is None:
        raise ValueError("no gauge center available")
    cx, cy = center
    chi = (d.mask == INTERIOR).astype(float)
    if _indicator_sample(d, chi, np.array([cx]), np.array([cy]))[0] < 0.5:
        raise ValueError("gauge center is not inside the domain")

    idx = np.flatnonzero(d.interior)
    px, py = d.xs[idx], d.ys[idx]
    dist = np.hypot(px - cx, py - cy)
    at_center = dist < 1e-12 * max(1.0, d.h)
    dist_safe = np.where(at_center, 1.0, dist)
    ux = (px - cx) / dist_safe
    uy = (py - cy) / dist_safe

    diag = d.h * math.hypot(d.nx, d.ny) + 1.0
    s_lo = dist.copy()
    s_hi = dist.copy()
    alive = ~at_center
    step = 0.5 * d.h
    while alive.any():
        s_try = s_hi[alive] + step
        val = _indicator_sample(d, chi, cx + ux[alive] * s_try, cy + uy[alive] * s_try)
        out = val < 0.5
        sub = np.flatnonzero(alive)
        s_lo[sub[~out]] = s_try[~out]
        s_hi[sub] = s_try
        done = sub[out]
        keep = np.ones(alive.sum(), dtype=bool)
        keep[out] = False
        alive[sub] = keep
        if (s_hi > diag).any():
            alive[s_hi > diag] = False
    # bisect chi = 0.5 in [s_lo, s_hi]
    tol = d.h / 100.0
    for _ in range(int(math.ceil(math.log2(max(2.0, d.h / tol)))) + 2):
        mid = 0.5 * (s_lo + s_hi)
        val = _indicator_sample(d, chi, cx + ux * mid, cy + uy * mid)
        hit = val < 0.5
        s_hi[hit] = mid[hit]
        s_lo[~hit] = mid[~hit]
    s_star = 0.5 * (s_lo + s_hi)

    rho = np.zeros(d.n_nodes)
    vals = 1.0 - dist / np.maximum(np.maximum(s_star, dist), 1e-300)
    vals[at_center] = 1.0
    rho[idx] = np.clip(vals, 0.0, 1.0)
    return ScalarField(domain=d, values=rho, dirichlet=True)
