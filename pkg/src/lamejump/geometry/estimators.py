"""
Empirical geometry of boundaries: box-counting slopes (d-summability) and
local distance-integrability exponents (Marcinkiewicz type).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .domains import Domain, GeometryError


# ---------------------------------------------------------------------------
# box counting


def _keys(k: np.ndarray) -> np.ndarray:
    """Row-major 1-D keys of non-negative integer cell indices."""
    span = k.max(axis=0) + 1
    key = np.zeros(len(k), dtype=np.int64)
    for j in range(k.shape[1]):
        key = key * span[j] + k[:, j]
    return key


def _voxel_reduce(points: np.ndarray, size: float) -> np.ndarray:
    """One representative point per occupied voxel of edge ``size``."""
    k = np.floor((points - points.min(axis=0)) / size).astype(np.int64)
    _, idx = np.unique(_keys(k), return_index=True)
    return points[np.sort(idx)]


def _occupied(points: np.ndarray, tau: float, offset: np.ndarray) -> int:
    k = np.floor(points / tau + offset).astype(np.int64)
    return int(np.unique(_keys(k - k.min(axis=0))).size)


def box_counts(points: np.ndarray, taus, n_offsets: int = 16, seed: int = 0) -> np.ndarray:
    """Occupied grid boxes at each ``tau``, minimized over seeded grid offsets.

    The cloud is thinned to one point per voxel of edge ``tau / 16`` before
    counting, which bounds the work at coarse scales without changing which
    boxes are hit by more than a sliver.
    """
    points = np.asarray(points, dtype=float)
    taus = np.asarray(taus, dtype=float)
    if points.ndim != 2 or len(points) == 0:
        raise GeometryError("box counting needs a non-empty (N, m) point cloud")
    rng = np.random.default_rng(seed)
    offsets = np.vstack([np.zeros(points.shape[1]), rng.random((max(n_offsets, 1) - 1, points.shape[1]))])
    origin = points.min(axis=0)
    cloud = points - origin
    counts = np.zeros(len(taus), dtype=np.int64)
    for i in np.argsort(taus):
        cloud = _voxel_reduce(cloud, taus[i] / 16) if len(cloud) > 50000 else cloud
        counts[i] = min(_occupied(cloud, taus[i], o) for o in offsets)
    return counts


def sample_spacing(points: np.ndarray, k: int = 2000, seed: int = 0) -> float:
    """Median nearest-neighbour distance over a seeded subsample."""
    points = np.asarray(points, dtype=float)
    rng = np.random.default_rng(seed)
    sub = points[rng.choice(len(points), size=min(k, len(points)), replace=False)]
    d, _ = cKDTree(points).query(sub, k=2)
    return float(np.median(d[:, 1]))


@dataclass(frozen=True)
class SummabilityReport:
    taus: np.ndarray
    counts: np.ndarray
    slope: float
    intercept: float
    spacing: float
    riemann: dict = field(default_factory=dict)

    def verdict(self, d: float) -> str:
        """``"summable"`` iff ``d`` exceeds the fitted box-counting slope."""
        return "summable" if d > self.slope else "not summable"

    def to_json_obj(self) -> dict:
        return {
            "taus": self.taus.tolist(),
            "counts": self.counts.tolist(),
            "slope": self.slope,
            "intercept": self.intercept,
            "sample_spacing": self.spacing,
            "riemann_surrogate": self.riemann,
        }


def riemann_surrogate(taus: np.ndarray, counts: np.ndarray, d: float) -> float:
    """Trapezoid sum of ``N(tau) tau^{d-1}`` over the sampled scales (log-spaced nodes)."""
    order = np.argsort(taus)
    t = taus[order]
    g = counts[order] * t ** (d - 1)
    return float(np.sum(0.5 * (g[1:] + g[:-1]) * np.diff(t)))


def estimate_d_summability(points: np.ndarray, taus, d_values=(), n_offsets: int = 16,
                           seed: int = 0, min_decades: float = 2.0) -> SummabilityReport:
    """Least-squares slope of ``log N(tau)`` against ``log(1/tau)``.

    ``taus`` must span at least ``min_decades`` decades, and the sample
    spacing must be at most half of the smallest ``tau``.
    """
    taus = np.sort(np.asarray(taus, dtype=float))[::-1]
    if len(taus) < 3:
        raise GeometryError("need at least three scales")
    if np.any(taus <= 0):
        raise GeometryError("scales must be positive")
    decades = math.log10(taus[0] / taus[-1])
    if decades < min_decades - 1e-9:
        raise GeometryError(f"scales span {decades:.2f} decades, need >= {min_decades}")
    spacing = sample_spacing(points, seed=seed)
    if spacing > 0.5 * taus[-1]:
        raise GeometryError(
            f"sample spacing {spacing:.3g} too coarse for the smallest scale {taus[-1]:.3g}")
    counts = box_counts(points, taus, n_offsets, seed)
    slope, intercept = np.polyfit(np.log(1 / taus), np.log(counts), 1)
    riem = {f"{d:g}": riemann_surrogate(taus, counts, d) for d in d_values}
    return SummabilityReport(taus, counts, float(slope), float(intercept), spacing, riem)


# ---------------------------------------------------------------------------
# distance-integrability exponents


@dataclass(frozen=True)
class SideEstimate:
    exponent: float             # fitted kappa in |{dist < t}| ~ t^kappa
    n_samples: int
    p_bounded: float | None     # largest ladder p with positive shell exponent
    growth: dict

    def to_json_obj(self) -> dict:
        return {"exponent": self.exponent, "n_samples": self.n_samples,
                "p_bounded": self.p_bounded, "growth": self.growth}


@dataclass(frozen=True)
class MarcinkiewiczReport:
    points: np.ndarray
    plus: list[SideEstimate]
    minus: list[SideEstimate]
    r: float

    @property
    def m_plus(self) -> float:
        return float(np.median([s.exponent for s in self.plus]))

    @property
    def m_minus(self) -> float:
        return float(np.median([s.exponent for s in self.minus]))

    @property
    def m_star(self) -> float:
        """``inf`` over sampled boundary points of ``max(m+, m-)``."""
        return float(min(max(p.exponent, q.exponent) for p, q in zip(self.plus, self.minus)))

    def to_json_obj(self) -> dict:
        return {
            "r": self.r,
            "points": self.points.tolist(),
            "m_plus": [s.to_json_obj() for s in self.plus],
            "m_minus": [s.to_json_obj() for s in self.minus],
            "m_star": self.m_star,
        }


def _ball_samples(center: np.ndarray, r: float, n: int, rng: np.random.Generator) -> np.ndarray:
    m = len(center)
    u = rng.normal(size=(n, m))
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    rad = r * rng.random(n) ** (1.0 / m)
    return center + u * rad[:, None]


def _side_estimate(dist: np.ndarray, r: float, total: int, p_grid, t_range) -> SideEstimate:
    n = len(dist)
    if n < 100:
        raise GeometryError("side of the boundary has too few samples inside the ball")
    ts = np.geomspace(t_range[0] * r, t_range[1] * r, 12)
    frac = np.array([(dist < t).sum() for t in ts], dtype=float) / total
    ok = frac > 0
    if ok.sum() < 3:
        raise GeometryError("too few samples close to the boundary")
    kappa = float(np.polyfit(np.log(ts[ok]), np.log(frac[ok]), 1)[0])
    growth = {}
    p_bounded = None
    for p in p_grid:
        # shell increments of int dist^{-p} scale like t^{kappa - p}; positive means integrable
        inc = np.array([np.sum(dist[(dist >= a) & (dist < b)] ** (-p)) for a, b in zip(ts[:-1], ts[1:])]) / total
        good = inc > 0
        if good.sum() < 3:
            continue
        g = float(np.polyfit(np.log(ts[:-1][good]), np.log(inc[good]), 1)[0])
        growth[f"{p:g}"] = g
        if g > 0 and (p_bounded is None or p > p_bounded):
            p_bounded = float(p)
    return SideEstimate(kappa, n, p_bounded, growth)


def estimate_marcinkiewicz(domain: Domain, x0, r: float, p_grid=(0.25, 0.5, 0.75, 0.9, 1.1, 1.5),
                           n_samples: int = 200000, seed: int = 0,
                           t_range: tuple[float, float] = (0.01, 0.2),
                           on_boundary_tol: float = 1e-6) -> MarcinkiewiczReport:
    """Local exponents of ``dist(., boundary)^{-p}`` integrability on both sides.

    For each boundary point, seeded uniform samples of ``B_r(x0)`` are split by
    the inside test.  On each side the volume fraction ``V(t)`` of samples with
    distance below ``t`` is fitted to ``t^kappa``; ``dist^{-p}`` is integrable
    there iff ``p < kappa``, so ``kappa`` estimates the side's exponent.  As a
    second view, shell increments of ``int dist^{-p}`` are fitted per ``p``;
    the largest ``p`` with a positive shell exponent is ``p_bounded``.
    """
    X0 = np.atleast_2d(np.asarray(x0, dtype=float))
    if r <= 0:
        raise GeometryError("radius must be positive")
    lo, hi = (np.asarray(b, float) for b in domain.bbox)
    if r > 0.5 * float(np.max(hi - lo)):
        raise GeometryError("radius too large for the domain")
    d0 = domain.boundary_distance(X0)
    if np.any(d0 > on_boundary_tol * max(1.0, domain.diameter)):
        raise GeometryError("x0 must lie on the boundary")
    rng = np.random.default_rng(seed)
    plus, minus = [], []
    for x in X0:
        Y = _ball_samples(x, r, n_samples, rng)
        ins = domain.inside(Y)
        dist = domain.boundary_distance(Y)
        plus.append(_side_estimate(dist[ins], r, n_samples, p_grid, t_range))
        minus.append(_side_estimate(dist[~ins], r, n_samples, p_grid, t_range))
    return MarcinkiewiczReport(X0, plus, minus, float(r))
