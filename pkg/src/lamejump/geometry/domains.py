"""Domain descriptors: inside tests and distances to the boundary."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..kernels import sigma


class GeometryError(ValueError):
    pass


class Domain:
    """Interface shared by all domains.

    Subclasses provide ``dim``, ``bbox``, ``inside`` and ``boundary_distance``;
    ``volume`` / ``boundary_area`` are ``None`` when no closed form exists.
    """

    dim: int
    volume: float | None = None
    boundary_area: float | None = None

    @property
    def bbox(self) -> tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    @property
    def diameter(self) -> float:
        lo, hi = self.bbox
        return float(np.linalg.norm(hi - lo))

    def inside(self, points: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def boundary_distance(self, points: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def describe(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class Ball(Domain):
    dim: int = 3
    radius: float = 1.0
    center: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.radius <= 0:
            raise GeometryError(f"radius must be positive, got {self.radius}")
        c = tuple(float(v) for v in (self.center or (0.0,) * self.dim))
        if len(c) != self.dim:
            raise GeometryError("center has the wrong dimension")
        object.__setattr__(self, "center", c)

    @property
    def c(self) -> np.ndarray:
        return np.array(self.center)

    @property
    def volume(self) -> float:
        return sigma(self.dim) * self.radius**self.dim / self.dim

    @property
    def boundary_area(self) -> float:
        return sigma(self.dim) * self.radius ** (self.dim - 1)

    @property
    def bbox(self):
        return self.c - self.radius, self.c + self.radius

    def inside(self, points):
        return np.linalg.norm(np.asarray(points) - self.c, axis=-1) < self.radius

    def boundary_distance(self, points):
        return np.abs(np.linalg.norm(np.asarray(points) - self.c, axis=-1) - self.radius)

    def normal_at(self, points):
        d = np.asarray(points) - self.c
        return d / np.linalg.norm(d, axis=-1, keepdims=True)

    def boundary_samples(self, spacing: float, seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
        """Near-uniform sphere samples with equal area weights.

        ``m = 3`` uses a Fibonacci lattice; other dimensions use seeded
        normalized Gaussian points.
        """
        if spacing <= 0:
            raise GeometryError("spacing must be positive")
        n = max(4, int(math.ceil(self.boundary_area / spacing ** (self.dim - 1))))
        if self.dim == 3:
            k = np.arange(n) + 0.5
            z = 1 - 2 * k / n
            t = np.pi * (1 + math.sqrt(5)) * k
            s = np.sqrt(1 - z * z)
            u = np.column_stack([s * np.cos(t), s * np.sin(t), z])
        else:
            u = np.random.default_rng(seed).normal(size=(n, self.dim))
            u /= np.linalg.norm(u, axis=1, keepdims=True)
        return self.c + self.radius * u, np.full(n, self.boundary_area / n)

    def describe(self):
        return {"kind": "ball", "dim": self.dim, "radius": self.radius, "center": list(self.center)}


@dataclass(frozen=True)
class Ellipsoid(Domain):
    """Axis-aligned ellipsoid ``sum ((x - c)_j / a_j)^2 < 1``."""

    axes: tuple[float, ...] = (1.0, 1.0, 1.0)
    center: tuple[float, ...] | None = None

    def __post_init__(self):
        axes = tuple(float(a) for a in self.axes)
        if any(a <= 0 for a in axes):
            raise GeometryError("ellipsoid semi-axes must be positive")
        c = tuple(float(v) for v in (self.center or (0.0,) * len(axes)))
        object.__setattr__(self, "axes", axes)
        object.__setattr__(self, "center", c)

    @property
    def dim(self) -> int:
        return len(self.axes)

    @property
    def c(self) -> np.ndarray:
        return np.array(self.center)

    @property
    def a(self) -> np.ndarray:
        return np.array(self.axes)

    @property
    def volume(self) -> float:
        return sigma(self.dim) / self.dim * float(np.prod(self.a))

    @property
    def bbox(self):
        return self.c - self.a, self.c + self.a

    def inside(self, points):
        u = (np.asarray(points) - self.c) / self.a
        return np.sum(u * u, axis=-1) < 1.0

    def boundary_distance(self, points):
        # closest point q = a^2 p / (a^2 + t); t is the largest root of the
        # secular function, found by bisection on (-min a^2, max a |p|]
        pts = np.asarray(points, dtype=float)
        p = np.atleast_2d(pts) - self.c
        a2 = self.a**2
        k = int(np.argmin(a2))
        lo = np.full(p.shape[0], -a2[k])
        hi = np.sqrt(a2.max()) * np.linalg.norm(p, axis=-1) + 1e-300
        pp = a2 * p * p

        def secular(t):
            with np.errstate(divide="ignore", invalid="ignore"):
                return np.sum(pp / (a2 + t[:, None]) ** 2, axis=-1) - 1.0

        for _ in range(200):
            mid = 0.5 * (lo + hi)
            pos = secular(mid) > 0
            lo = np.where(pos, mid, lo)
            hi = np.where(pos, hi, mid)
        t = 0.5 * (lo + hi)
        with np.errstate(divide="ignore", invalid="ignore"):
            q = a2 * p / (a2 + t[:, None])
        # degenerate interior case: root sits at the pole t = -min a^2
        rest = np.delete(np.arange(len(a2)), k)
        with np.errstate(divide="ignore", invalid="ignore"):
            qd = a2[rest] * p[:, rest] / (a2[rest] - a2[k])
        fill = 1.0 - np.sum(qd**2 / a2[rest], axis=-1)
        degen = ~np.all(np.isfinite(q), axis=-1) | ((secular(lo) <= 0) & (fill > 0))
        if np.any(degen):
            qq = np.zeros((int(degen.sum()), len(a2)))
            qq[:, rest] = qd[degen]
            sgn = np.where(p[degen, k] < 0, -1.0, 1.0)
            qq[:, k] = sgn * np.sqrt(a2[k] * np.maximum(fill[degen], 0.0))
            q[degen] = qq
        d = np.linalg.norm(p - q, axis=-1)
        return d.reshape(pts.shape[:-1])

    def describe(self):
        return {"kind": "ellipsoid", "axes": list(self.axes), "center": list(self.center)}


@dataclass(frozen=True)
class HalfSpace(Domain):
    """``{x : (x - point) . normal < 0}``; ``normal`` is the outward normal."""

    point: tuple[float, ...] = (0.0, 0.0, 0.0)
    normal: tuple[float, ...] = (0.0, 0.0, 1.0)
    extent: float = 10.0

    def __post_init__(self):
        n = np.asarray(self.normal, dtype=float)
        n = n / np.linalg.norm(n)
        object.__setattr__(self, "normal", tuple(n))
        object.__setattr__(self, "point", tuple(float(v) for v in self.point))

    @property
    def dim(self) -> int:
        return len(self.point)

    @property
    def bbox(self):
        p = np.array(self.point)
        return p - self.extent, p + self.extent

    def _signed(self, points):
        return (np.asarray(points) - np.array(self.point)) @ np.array(self.normal)

    def inside(self, points):
        return self._signed(points) < 0

    def boundary_distance(self, points):
        return np.abs(self._signed(points))

    def describe(self):
        return {"kind": "halfspace", "point": list(self.point), "normal": list(self.normal)}


# ---------------------------------------------------------------------------
# planar polygons (used by the Koch prism)

def polygon_contains(poly: np.ndarray, pts: np.ndarray, chunk: int = 20000) -> np.ndarray:
    """Even-odd point-in-polygon test for ``pts`` of shape ``(N, 2)``."""
    pts = np.asarray(pts, dtype=float)
    a = poly
    b = np.roll(poly, -1, axis=0)
    out = np.zeros(len(pts), dtype=bool)
    for s in range(0, len(pts), chunk):
        x = pts[s : s + chunk, 0:1]
        y = pts[s : s + chunk, 1:2]
        cond = (a[:, 1] > y) != (b[:, 1] > y)
        with np.errstate(divide="ignore", invalid="ignore"):
            xint = a[:, 0] + (y - a[:, 1]) * (b[:, 0] - a[:, 0]) / (b[:, 1] - a[:, 1])
        out[s : s + chunk] = (np.sum(cond & (x < xint), axis=1) % 2) == 1
    return out


def polygon_edge_distance(poly: np.ndarray, pts: np.ndarray, chunk: int = 20000) -> np.ndarray:
    """Distance from planar points to the polygon outline."""
    pts = np.asarray(pts, dtype=float)
    a = poly
    d = np.roll(poly, -1, axis=0) - a
    dd = np.sum(d * d, axis=1)
    out = np.empty(len(pts))
    for s in range(0, len(pts), chunk):
        p = pts[s : s + chunk, None, :] - a[None]
        t = np.clip(np.sum(p * d[None], axis=2) / dd, 0.0, 1.0)
        r = p - t[..., None] * d[None]
        out[s : s + chunk] = np.sqrt(np.min(np.sum(r * r, axis=2), axis=1))
    return out


def koch_polygon(depth: int, side: float = 1.0) -> np.ndarray:
    """Counter-clockwise vertices of the depth-k Koch snowflake, centroid at the origin."""
    h = side * math.sqrt(3) / 2
    pts = np.array([[-side / 2, -h / 3], [side / 2, -h / 3], [0.0, 2 * h / 3]])
    rot = np.array([[math.cos(-math.pi / 3), -math.sin(-math.pi / 3)],
                    [math.sin(-math.pi / 3), math.cos(-math.pi / 3)]])
    for _ in range(depth):
        a = pts
        b = np.roll(pts, -1, axis=0)
        d = (b - a) / 3
        p1 = a + d
        peak = p1 + d @ rot.T
        p2 = a + 2 * d
        pts = np.stack([a, p1, peak, p2], axis=1).reshape(-1, 2)
    return pts


@dataclass(frozen=True)
class KochPrism(Domain):
    """Koch-snowflake cross-section extruded over ``z in [0, height]`` with flat caps."""

    depth: int = 3
    side: float = 1.0
    height: float = 1.0
    polygon: np.ndarray = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.depth < 0:
            raise GeometryError("depth must be >= 0")
        if self.depth > 6:
            raise GeometryError("depth > 6 produces too many boundary samples")
        object.__setattr__(self, "polygon", koch_polygon(self.depth, self.side))

    dim = 3

    @property
    def bbox(self):
        lo2 = self.polygon.min(axis=0)
        hi2 = self.polygon.max(axis=0)
        return np.array([lo2[0], lo2[1], 0.0]), np.array([hi2[0], hi2[1], self.height])

    @property
    def perimeter(self) -> float:
        return 3 * self.side * (4 / 3) ** self.depth

    @property
    def cross_section_area(self) -> float:
        x, y = self.polygon[:, 0], self.polygon[:, 1]
        return 0.5 * abs(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))

    @property
    def volume(self) -> float:
        return self.cross_section_area * self.height

    @property
    def boundary_area(self) -> float:
        return self.perimeter * self.height + 2 * self.cross_section_area

    @property
    def edge_length(self) -> float:
        return self.side / 3**self.depth

    def inside(self, points):
        p = np.asarray(points, dtype=float)
        flat = p.reshape(-1, 3)
        z = flat[:, 2]
        ok = (z > 0) & (z < self.height)
        res = np.zeros(len(flat), dtype=bool)
        if np.any(ok):
            res[ok] = polygon_contains(self.polygon, flat[ok, :2])
        return res.reshape(p.shape[:-1])

    def boundary_distance(self, points):
        p = np.asarray(points, dtype=float)
        flat = p.reshape(-1, 3)
        z = flat[:, 2]
        de = polygon_edge_distance(self.polygon, flat[:, :2])
        dz_out = np.maximum.reduce([np.zeros_like(z), z - self.height, -z])
        lateral = np.hypot(de, dz_out)
        inpoly = polygon_contains(self.polygon, flat[:, :2])
        caps = np.where(inpoly, np.minimum(np.abs(z), np.abs(z - self.height)), np.inf)
        return np.minimum(lateral, caps).reshape(p.shape[:-1])

    def edge_frames(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Midpoints, outward unit normals and lengths of the polygon edges (planar)."""
        a = self.polygon
        b = np.roll(a, -1, axis=0)
        d = b - a
        length = np.linalg.norm(d, axis=1)
        normal = np.stack([d[:, 1], -d[:, 0]], axis=1) / length[:, None]
        return (a + b) / 2, normal, length

    def boundary_samples(self, spacing: float, include_caps: bool = True) -> tuple[np.ndarray, np.ndarray]:
        """Sample cloud on the prefractal boundary with per-sample area weights."""
        a = self.polygon
        b = np.roll(a, -1, axis=0)
        seg = []
        for p, q in zip(a, b):
            L = float(np.linalg.norm(q - p))
            n = max(1, int(math.ceil(L / spacing)))
            t = (np.arange(n) + 0.5) / n
            seg.append((p + t[:, None] * (q - p), np.full(n, L / n)))
        pts2 = np.concatenate([s[0] for s in seg])
        len2 = np.concatenate([s[1] for s in seg])
        nz = max(1, int(math.ceil(self.height / spacing)))
        zs = (np.arange(nz) + 0.5) * self.height / nz
        lat = np.column_stack([np.repeat(pts2, nz, axis=0), np.tile(zs, len(pts2))])
        wl = np.repeat(len2, nz) * self.height / nz
        pts, wts = [lat], [wl]
        if include_caps:
            lo, hi = self.polygon.min(axis=0), self.polygon.max(axis=0)
            xs = np.arange(lo[0] + spacing / 2, hi[0], spacing)
            ys = np.arange(lo[1] + spacing / 2, hi[1], spacing)
            X, Y = np.meshgrid(xs, ys, indexing="ij")
            q = np.column_stack([X.ravel(), Y.ravel()])
            q = q[polygon_contains(self.polygon, q)]
            for zc in (0.0, self.height):
                pts.append(np.column_stack([q, np.full(len(q), zc)]))
                wts.append(np.full(len(q), spacing**2))
        return np.concatenate(pts), np.concatenate(wts)

    def describe(self):
        return {"kind": "koch_prism", "depth": self.depth, "side": self.side, "height": self.height}


FractalDomain = KochPrism


def build_koch_prism(depth: int, side: float = 1.0, height: float = 1.0) -> KochPrism:
    return KochPrism(depth, side, height)
