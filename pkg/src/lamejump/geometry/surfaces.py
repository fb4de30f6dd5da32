"""
Boundary quadrature for smooth closed surfaces.

In R^3 the surface is the image of a subdivided icosahedron under radial
projection to the unit sphere followed by the affine map ``x = c + diag(a) s``
(sphere or axis-aligned ellipsoid).  Each flat parameter triangle carries a
6-point degree-4 rule; the radial-projection and affine Jacobians are exact,
so the only error is the rule's.  Targets close to the surface trigger local
adaptive subdivision of the parameter triangles.

For m >= 4 a tensor product Gauss-Gegenbauer / trapezoid rule on S^{m-1} is
used instead (no near-field refinement).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np
from scipy.spatial import cKDTree
from scipy.special import roots_gegenbauer

from .domains import Ball, Ellipsoid, GeometryError

# Strang-Fix / Dunavant 6-point rule, degree 4 (barycentric, weights sum to 1)
_A, _B = 0.445948490915965, 0.091576213509771
_WA, _WB = 0.223381589678011, 0.109951743655322
TRI_BARY = np.array([
    [_A, _A, 1 - 2 * _A], [_A, 1 - 2 * _A, _A], [1 - 2 * _A, _A, _A],
    [_B, _B, 1 - 2 * _B], [_B, 1 - 2 * _B, _B], [1 - 2 * _B, _B, _B],
])
TRI_W = np.array([_WA, _WA, _WA, _WB, _WB, _WB])
CENTROID_BARY = np.array([[1 / 3, 1 / 3, 1 / 3]])


class NearSingularityError(ValueError):
    pass


def icosphere(level: int) -> tuple[np.ndarray, np.ndarray]:
    """Vertices (on the unit sphere) and faces of a ``level``-times subdivided icosahedron."""
    if level < 0:
        raise GeometryError("level must be >= 0")
    t = (1 + 5**0.5) / 2
    V = np.array([[-1, t, 0], [1, t, 0], [-1, -t, 0], [1, -t, 0], [0, -1, t], [0, 1, t],
                  [0, -1, -t], [0, 1, -t], [t, 0, -1], [t, 0, 1], [-t, 0, -1], [-t, 0, 1]], float)
    V /= np.linalg.norm(V, axis=1, keepdims=True)
    F = np.array([[0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11], [1, 5, 9], [5, 11, 4],
                  [11, 10, 2], [10, 7, 6], [7, 1, 8], [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8],
                  [3, 8, 9], [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1]])
    verts = [tuple(v) for v in V]
    for _ in range(level):
        cache: dict[tuple[int, int], int] = {}
        newF = []

        def mid(i, j):
            key = (min(i, j), max(i, j))
            if key not in cache:
                p = (np.array(verts[i]) + np.array(verts[j])) / 2
                verts.append(tuple(p / np.linalg.norm(p)))
                cache[key] = len(verts) - 1
            return cache[key]

        for a, b, c in F:
            ab, bc, ca = mid(a, b), mid(b, c), mid(c, a)
            newF.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]])
        F = np.array(newF)
    return np.array(verts), F


def subdivide(tris: np.ndarray) -> np.ndarray:
    """Split flat triangles ``(T, 3, d)`` into four children each (midpoints, no projection)."""
    a, b, c = tris[:, 0], tris[:, 1], tris[:, 2]
    ab, bc, ca = (a + b) / 2, (b + c) / 2, (c + a) / 2
    kids = np.stack([np.stack([a, ab, ca], 1), np.stack([b, bc, ab], 1),
                     np.stack([c, ca, bc], 1), np.stack([ab, bc, ca], 1)], axis=1)
    return kids.reshape(-1, 3, tris.shape[-1])


@lru_cache(maxsize=None)
def sphere_rule(m: int, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Product rule on S^{m-1}: ``n`` Gegenbauer nodes per polar angle, ``2n`` azimuths.

    Exact for polynomials of degree ``<= 2n - 1`` restricted to the sphere.
    """
    if m < 2:
        raise ValueError("sphere_rule needs m >= 2")
    k = 2 * n
    ang = 2 * math.pi * np.arange(k) / k
    pts = np.column_stack([np.cos(ang), np.sin(ang)])
    wts = np.full(k, 2 * math.pi / k)
    for d in range(3, m + 1):
        # S^{d-1}: t = first coordinate, weight (1 - t^2)^{(d-3)/2}
        t, wt = roots_gegenbauer(n, (d - 2) / 2)
        s = np.sqrt(1 - t**2)
        pts = np.concatenate([np.column_stack([np.full(len(pts), ti), si * pts]) for ti, si in zip(t, s)])
        wts = np.concatenate([wi * wts for wi in wt])
    pts.setflags(write=False)
    wts.setflags(write=False)
    return pts, wts


@dataclass(frozen=True)
class AffineSphere:
    """Surface ``c + diag(a) s``, ``s`` on the unit sphere; icosphere parameterization in R^3."""

    axes: np.ndarray
    center: np.ndarray
    param_tris: np.ndarray | None = None  # (T, 3, 3) flat parameter triangles

    @property
    def dim(self) -> int:
        return len(self.axes)

    def map_param(self, p: np.ndarray, flat_normal: np.ndarray | None = None):
        """Map flat parameter points to (points, unit normals, area Jacobian)."""
        r = np.linalg.norm(p, axis=-1)
        s = p / r[..., None]
        a = self.axes
        x = self.center + s * a
        g = s / a  # A^{-T} n_s for diagonal A
        gn = np.linalg.norm(g, axis=-1)
        normal = g / gn[..., None]
        jac = float(np.prod(a)) * gn
        if flat_normal is not None:
            jac = jac * np.abs(np.sum(flat_normal * p, axis=-1)) / r**3
        return x, normal, jac

    def triangle_nodes(self, tris: np.ndarray, bary: np.ndarray = TRI_BARY, w: np.ndarray = TRI_W):
        """Quadrature nodes for flat parameter triangles ``(T, 3, 3)``."""
        e1 = tris[:, 1] - tris[:, 0]
        e2 = tris[:, 2] - tris[:, 0]
        cr = np.cross(e1, e2)
        area2 = np.linalg.norm(cr, axis=-1)
        fn = cr / area2[:, None]
        p = np.einsum("qk,tkd->tqd", bary, tris)
        x, n, jac = self.map_param(p, fn[:, None, :])
        wts = jac * (0.5 * area2[:, None]) * w[None, :]
        return x.reshape(-1, 3), n.reshape(-1, 3), wts.reshape(-1)

    def triangle_size(self, tris: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Physical centroid and diameter (max vertex distance) of parameter triangles."""
        x, _, _ = self.map_param(tris)
        cen, _, _ = self.map_param(tris.mean(axis=1))
        d = np.max(np.stack([np.linalg.norm(x[:, i] - x[:, j], axis=-1)
                             for i, j in ((0, 1), (1, 2), (2, 0))], 1), axis=1)
        return cen, d


@dataclass(frozen=True)
class BoundaryMesh:
    """Quadrature nodes on a closed surface: points, outward unit normals, weights.

    ``spacing`` is the largest panel diameter; ``surface`` (R^3 only) enables
    adaptive near-field refinement through :meth:`nodes_near`.
    """

    points: np.ndarray
    normals: np.ndarray
    weights: np.ndarray
    spacing: float
    n_panels: int
    meta: dict = field(default_factory=dict)
    surface: AffineSphere | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        for arr in (self.points, self.normals, self.weights):
            arr.setflags(write=False)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def area(self) -> float:
        return float(self.weights.sum())

    @property
    def diameter(self) -> float:
        return float(np.linalg.norm(self.points.max(axis=0) - self.points.min(axis=0)))

    @property
    def tree(self) -> cKDTree:
        t = self.__dict__.get("_tree")
        if t is None:
            t = cKDTree(self.points)
            object.__setattr__(self, "_tree", t)
        return t

    def nearest_distance(self, x: np.ndarray) -> np.ndarray:
        d, _ = self.tree.query(np.atleast_2d(x))
        return d

    def nodes_near(self, targets: np.ndarray, eta: float = 3.0, max_depth: int = 8,
                   max_nodes: int = 2_000_000):
        """Nodes refined for targets near the surface.

        Parameter triangles whose physical centroid lies closer to the target
        cluster than ``eta`` times their diameter are split recursively.  The
        same nodes are returned for the whole cluster, which keeps batched
        evaluations (finite-difference stencils) smooth in the target.
        """
        if self.surface is None or self.surface.param_tris is None:
            return self.points, self.normals, self.weights
        targets = np.atleast_2d(targets)
        center = targets.mean(axis=0)
        spread = float(np.max(np.linalg.norm(targets - center, axis=1)))
        surf = self.surface
        tris = surf.param_tris
        cen, diam = surf.triangle_size(tris)
        near = np.linalg.norm(cen - center, axis=1) - spread < eta * diam
        if not np.any(near):
            return self.points, self.normals, self.weights
        nq = len(TRI_W)
        keep = np.repeat(~near, nq)
        out_x, out_n, out_w = [self.points[keep]], [self.normals[keep]], [self.weights[keep]]
        work = tris[near]
        for depth in range(max_depth + 1):
            cen, diam = surf.triangle_size(work)
            dist = np.linalg.norm(cen - center, axis=1) - spread
            split = dist < eta * diam if depth < max_depth else np.zeros(len(work), bool)
            if np.any(~split):
                x, n, w = surf.triangle_nodes(work[~split])
                out_x.append(x)
                out_n.append(n)
                out_w.append(w)
            if not np.any(split):
                break
            work = subdivide(work[split])
            if len(work) * len(TRI_W) > max_nodes:
                raise NearSingularityError(
                    f"near-field refinement exceeds {max_nodes} nodes; the target cluster is too "
                    "spread out relative to its distance from the surface")
        return np.concatenate(out_x), np.concatenate(out_n), np.concatenate(out_w)

    # -- serialization: one node per JSON line ----------------------------
    def to_jsonl(self, path: str | Path) -> None:
        with open(path, "w") as fh:
            for p, n, w in zip(self.points, self.normals, self.weights):
                fh.write(json.dumps({"p": p.tolist(), "n": n.tolist(), "w": float(w)}) + "\n")

    @classmethod
    def from_jsonl(cls, path: str | Path, meta: dict | None = None) -> "BoundaryMesh":
        P, N, W = [], [], []
        with open(path) as fh:
            for line in fh:
                if line.strip():
                    rec = json.loads(line)
                    P.append(rec["p"])
                    N.append(rec["n"])
                    W.append(rec["w"])
        P, N, W = np.array(P, float), np.array(N, float), np.array(W, float)
        spacing = float(np.median(cKDTree(P).query(P, k=2)[0][:, 1])) * 2 if len(P) > 1 else 0.0
        return cls(P, N, W, spacing, len(P), dict(meta or {"source": str(path)}))


def _affine_mesh(axes, center, level: int, rule: str, meta: dict) -> BoundaryMesh:
    axes = np.asarray(axes, dtype=float)
    center = np.asarray(center, dtype=float)
    m = len(axes)
    if m == 3:
        V, F = icosphere(level)
        tris = V[F]
        surf = AffineSphere(axes, center, tris)
        if rule == "centroid":
            x, n, w = surf.triangle_nodes(tris, CENTROID_BARY, np.array([1.0]))
        elif rule == "gauss6":
            x, n, w = surf.triangle_nodes(tris)
        else:
            raise ValueError(f"unknown panel rule {rule!r}")
        _, diam = surf.triangle_size(tris)
        return BoundaryMesh(x, n, w, float(diam.max()), len(tris), meta, surf)
    if m < 3:
        raise GeometryError("surface meshes need m >= 3")
    nodes, wts = sphere_rule(m, 2 + 2 * level)
    surf = AffineSphere(axes, center)
    x, n, jac = surf.map_param(np.array(nodes))
    spacing = float(np.max(axes)) * math.pi / (2 + 2 * level)
    return BoundaryMesh(x, n, np.asarray(wts) * jac, spacing, len(nodes), meta, surf)


def mesh_sphere(radius: float = 1.0, level: int = 3, dim: int = 3, center=None,
                rule: str = "gauss6") -> BoundaryMesh:
    """Quadrature mesh of the sphere of given radius (icosphere for m = 3)."""
    if radius <= 0:
        raise GeometryError(f"radius must be positive, got {radius}")
    if level < 0:
        raise GeometryError("level must be >= 0")
    center = np.zeros(dim) if center is None else np.asarray(center, float)
    meta = {"kind": "sphere", "radius": radius, "level": level, "dim": dim,
            "center": center.tolist(), "rule": rule}
    return _affine_mesh(np.full(dim, float(radius)), center, level, rule, meta)


def mesh_ellipsoid(axes, level: int = 3, center=None, rule: str = "gauss6") -> BoundaryMesh:
    axes = np.asarray(axes, dtype=float)
    if np.any(axes <= 0):
        raise GeometryError("semi-axes must be positive")
    center = np.zeros(len(axes)) if center is None else np.asarray(center, float)
    meta = {"kind": "ellipsoid", "axes": axes.tolist(), "level": level,
            "center": center.tolist(), "rule": rule}
    return _affine_mesh(axes, center, level, rule, meta)


def mesh_for_domain(domain, level: int, rule: str = "gauss6") -> BoundaryMesh:
    if isinstance(domain, Ball):
        return mesh_sphere(domain.radius, level, domain.dim, domain.center, rule)
    if isinstance(domain, Ellipsoid):
        return mesh_ellipsoid(domain.axes, level, domain.center, rule)
    raise GeometryError(f"no surface mesher for {type(domain).__name__}")
