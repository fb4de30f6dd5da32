"""
First-order Whitney jets on boundary samples and their extension to R^m.

Cube mode builds dyadic Whitney cubes (side comparable to the distance to
the sample cloud), attaches to each cube the first-order Taylor polynomial of
the nearest jet point, and blends them with a normalized smooth bump
partition of unity.  The result is C^1 with second derivatives growing at
most like ``dist^{nu-1}`` for ``Lip(1+nu)`` data.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .clifford import embed_vectors, gp
from .fd import hessian
from .polyfield import LameParams, PolyField, StructuralSet, apply_lame, apply_M, partial_derivative


class WhitneyError(ValueError):
    pass


@dataclass(frozen=True)
class WhitneyJet:
    """Values ``f(y)`` and first partials ``f^j(y)`` at boundary samples."""

    points: np.ndarray      # (N, m)
    values: np.ndarray      # (N, 2**m)
    derivs: np.ndarray      # (N, m, 2**m)
    nu: float

    def __post_init__(self):
        if len(self.points) == 0:
            raise WhitneyError("empty jet")
        if not 0 < self.nu < 1:
            raise WhitneyError(f"nu must lie in (0, 1), got {self.nu}")

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @classmethod
    def from_poly(cls, P: PolyField, points: np.ndarray, nu: float) -> "WhitneyJet":
        points = np.asarray(points, dtype=float)
        derivs = np.stack([partial_derivative(P, j + 1).evaluate(points) for j in range(P.dim)], axis=1)
        return cls(points, P.evaluate(points), derivs, nu)

    @classmethod
    def constant(cls, value: np.ndarray, points: np.ndarray, nu: float) -> "WhitneyJet":
        points = np.asarray(points, dtype=float)
        v = np.broadcast_to(np.asarray(value, float), (len(points), np.size(value))).copy()
        return cls(points, v, np.zeros((len(points), points.shape[1], v.shape[1])), nu)

    def taylor(self, idx: np.ndarray, X: np.ndarray) -> np.ndarray:
        """``f(y) + sum_j f^j(y) (x - y)_j`` with ``y = points[idx]``."""
        d = X - self.points[idx]
        return self.values[idx] + np.einsum("nj,njk->nk", d, self.derivs[idx])

    def consistency(self, n_pairs: int = 20000, seed: int = 0, max_sep: float | None = None) -> dict:
        """Smallest ``C`` with ``|f(y) - P_z(y)| <= C |y - z|^{1+nu}`` over seeded pairs."""
        rng = np.random.default_rng(seed)
        N = len(self.points)
        i = rng.integers(0, N, n_pairs)
        if max_sep is None:
            j = rng.integers(0, N, n_pairs)
        else:
            # local pairs probe the small-separation regime
            tree = cKDTree(self.points)
            nb = tree.query(self.points[i], k=min(16, N))[1]
            j = nb[np.arange(n_pairs), rng.integers(1, nb.shape[1], n_pairs)] if N > 1 else i
        sep = np.linalg.norm(self.points[i] - self.points[j], axis=1)
        ok = sep > 0
        if not np.any(ok):
            return {"C": 0.0, "pairs": 0}
        i, j, sep = i[ok], j[ok], sep[ok]
        err = np.linalg.norm(self.values[i] - self.taylor(j, self.points[i]), axis=1)
        ratio = err / sep ** (1 + self.nu)
        return {"C": float(ratio.max()), "C_median": float(np.median(ratio)), "pairs": int(len(ratio))}


def _bump(t: np.ndarray) -> np.ndarray:
    out = np.zeros_like(t)
    inside = np.abs(t) < 1
    out[inside] = np.exp(-1.0 / (1.0 - t[inside] ** 2))
    return out


@dataclass
class WhitneyCubes:
    centers: np.ndarray
    sides: np.ndarray
    anchor: np.ndarray          # nearest jet point per cube
    levels: dict = field(default_factory=dict)   # side -> (tree, indices)


def whitney_cubes(jet: WhitneyJet, lo: np.ndarray, hi: np.ndarray, min_side: float,
                  max_cubes: int = 2_000_000) -> WhitneyCubes:
    """Dyadic cubes ``Q`` in the box ``[lo, hi]`` with ``diam Q <= dist(Q, samples)``.

    Subdivision stops at ``min_side``; cubes that never qualify are dropped
    (points there fall back to the nearest jet polynomial).
    """
    tree = cKDTree(jet.points)
    m = jet.dim
    side = float(np.max(hi - lo))
    centers = ((lo + hi) / 2)[None, :]
    out_c, out_s = [], []
    offs = np.array(np.meshgrid(*[[-1, 1]] * m, indexing="ij")).reshape(m, -1).T
    while len(centers) and side >= min_side:
        diam = side * np.sqrt(m)
        d, _ = tree.query(centers)
        good = diam <= d - diam / 2
        out_c.append(centers[good])
        out_s.append(np.full(int(good.sum()), side))
        rest = centers[~good]
        side /= 2
        centers = (rest[:, None, :] + offs[None] * side / 2).reshape(-1, m)
        if sum(len(c) for c in out_c) + len(centers) > max_cubes:
            raise WhitneyError("too many Whitney cubes; raise min_side")
    C = np.concatenate(out_c) if out_c else np.zeros((0, m))
    S = np.concatenate(out_s) if out_s else np.zeros(0)
    anchor = tree.query(C)[1] if len(C) else np.zeros(0, int)
    cubes = WhitneyCubes(C, S, anchor)
    for s in np.unique(S):
        idx = np.flatnonzero(S == s)
        cubes.levels[float(s)] = (cKDTree(C[idx]), idx)
    return cubes


class ExtendedField:
    """Extension ``f~`` with exact (analytic mode) or finite-difference operators."""

    def __init__(self, jet: WhitneyJet, mode: str, poly: PolyField | None = None,
                 cubes: WhitneyCubes | None = None, expand: float = 1.2, fd_step: float = 1e-3):
        self.jet, self.mode, self.poly, self.cubes = jet, mode, poly, cubes
        self.expand, self.fd_step = expand, fd_step
        self._tree = cKDTree(jet.points)

    @property
    def dim(self) -> int:
        return self.jet.dim

    def evaluate(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        flat = X.reshape(-1, self.dim)
        if self.mode == "analytic":
            out = self.poly.evaluate(flat)
        else:
            out = self._blend(flat)
        return out.reshape(X.shape[:-1] + (out.shape[-1],))

    __call__ = evaluate

    def _blend(self, X: np.ndarray) -> np.ndarray:
        cubes = self.cubes
        n = self.jet.values.shape[1]
        num = np.zeros((len(X), n))
        den = np.zeros(len(X))
        for s, (tree, idx) in cubes.levels.items():
            half = 0.5 * s * self.expand
            hits = tree.query_ball_point(X, half * np.sqrt(self.dim))
            rows = np.repeat(np.arange(len(X)), [len(h) for h in hits])
            if len(rows) == 0:
                continue
            q = idx[np.concatenate([np.asarray(h, dtype=int) for h in hits])]
            t = (X[rows] - cubes.centers[q]) / half
            w = np.prod(_bump(t), axis=1)
            keep = w > 0
            rows, q, w = rows[keep], q[keep], w[keep]
            vals = self.jet.taylor(cubes.anchor[q], X[rows])
            np.add.at(num, rows, w[:, None] * vals)
            np.add.at(den, rows, w)
        out = np.empty((len(X), n))
        ok = den > 0
        out[ok] = num[ok] / den[ok, None]
        if np.any(~ok):
            _, nn = self._tree.query(X[~ok])
            out[~ok] = self.jet.taylor(nn, X[~ok])
        return out

    def _stencil(self, X: np.ndarray, h: float, second: bool, chunk: int = 4096):
        """Batched central differences: gradients ``(N, m, n)`` and optionally Hessians ``(N, m, m, n)``."""
        m, n = self.dim, self.jet.values.shape[1]
        E = np.eye(m) * h
        offs = [np.zeros(m)] + [s * E[i] for i in range(m) for s in (1, -1)]
        pairs = [(i, j) for i in range(m) for j in range(i + 1, m)]
        if second:
            offs += [si * E[i] + sj * E[j] for i, j in pairs for si in (1, -1) for sj in (1, -1)]
        offs = np.array(offs)
        G = np.empty((len(X), m, n))
        H = np.empty((len(X), m, m, n)) if second else None
        for s in range(0, len(X), chunk):
            xb = X[s : s + chunk]
            v = self._blend((xb[:, None, :] + offs[None]).reshape(-1, m)).reshape(len(xb), len(offs), n)
            c = v[:, 0]
            for i in range(m):
                p, q = v[:, 1 + 2 * i], v[:, 2 + 2 * i]
                G[s : s + chunk, i] = (p - q) / (2 * h)
                if second:
                    H[s : s + chunk, i, i] = (p - 2 * c + q) / h**2
            if second:
                base = 1 + 2 * m
                for k, (i, j) in enumerate(pairs):
                    pp, pm, mp, mm = (v[:, base + 4 * k + t] for t in range(4))
                    H[s : s + chunk, i, j] = H[s : s + chunk, j, i] = (pp - pm - mp + mm) / (4 * h**2)
        return G, H

    def lame(self, X: np.ndarray, phi: StructuralSet, psi: StructuralSet, lam: LameParams) -> np.ndarray:
        X = np.atleast_2d(X)
        if self.mode == "analytic":
            return apply_lame(phi, psi, lam, self.poly).evaluate(X)
        _, H = self._stencil(X, self.fd_step, True)
        P = embed_vectors(np.eye(self.dim), phi.array)
        Q = embed_vectors(np.eye(self.dim), psi.array)
        sw = sum(gp(gp(P[i], H[:, i, j]), Q[j]) for i in range(self.dim) for j in range(self.dim))
        hm = sum(gp(gp(P[i], Q[j]), H[:, i, j]) for i in range(self.dim) for j in range(self.dim))
        return float(lam.alpha) * sw + float(lam.beta) * hm

    def apply_M(self, X: np.ndarray, psi: StructuralSet, lam: LameParams) -> np.ndarray:
        X = np.atleast_2d(X)
        if self.mode == "analytic":
            return apply_M(self.poly, psi, lam).evaluate(X)
        G, _ = self._stencil(X, self.fd_step, False)
        Q = embed_vectors(np.eye(self.dim), psi.array)
        return float(lam.alpha) * gp(G, Q).sum(axis=1) + float(lam.beta) * gp(Q, G).sum(axis=1)

    def growth_check(self, X: np.ndarray, dist: np.ndarray, n_strata: int = 5, h: float | None = None) -> dict:
        """Stratified max of ``|D^2 f~| dist^{1-nu}`` (reported, not asserted)."""
        X = np.atleast_2d(X)
        edges = np.quantile(dist, np.linspace(0, 1, n_strata + 1))
        vals = []
        for x, d in zip(X, dist):
            step = h or 0.25 * d
            H = hessian(self.evaluate, x, step, 2)
            vals.append(float(np.linalg.norm(H)) * d ** (1 - self.jet.nu))
        vals = np.array(vals)
        strata = []
        for k in range(n_strata):
            sel = (dist >= edges[k]) & (dist <= edges[k + 1])
            if np.any(sel):
                strata.append({"dist_lo": float(edges[k]), "dist_hi": float(edges[k + 1]),
                               "max_scaled": float(vals[sel].max())})
        mx = [s["max_scaled"] for s in strata]
        return {"strata": strata, "constant": float(max(mx)) if mx else 0.0,
                "spread": float(max(mx) / max(min(mx), 1e-300)) if mx else 0.0}


def whitney_extend(jet: WhitneyJet, mode: str = "cube", poly: PolyField | None = None,
                   bbox: tuple[np.ndarray, np.ndarray] | None = None, min_side: float | None = None,
                   check_tol: float = 1e-9) -> ExtendedField:
    """Extend a jet to a neighbourhood of its samples.

    ``analytic`` restricts a user-supplied global polynomial (checked against
    the jet); ``cube`` builds the Whitney-cube partition of unity inside
    ``bbox`` (default: sample box padded by 25%).
    """
    if mode == "analytic":
        if poly is None:
            raise WhitneyError("analytic mode needs the global field")
        ref = WhitneyJet.from_poly(poly, jet.points, jet.nu)
        scale = max(1.0, float(np.abs(jet.values).max()))
        if np.abs(ref.values - jet.values).max() > check_tol * scale or \
                np.abs(ref.derivs - jet.derivs).max() > check_tol * scale:
            raise WhitneyError("global field does not match the jet")
        return ExtendedField(jet, "analytic", poly=poly)
    if mode != "cube":
        raise WhitneyError(f"unknown extension mode {mode!r}")
    if bbox is None:
        lo, hi = jet.points.min(axis=0), jet.points.max(axis=0)
        pad = 0.25 * (hi - lo).max()
        lo, hi = lo - pad, hi + pad
    else:
        lo, hi = (np.asarray(b, float) for b in bbox)
    if min_side is None:
        spacing = float(np.median(cKDTree(jet.points).query(jet.points[:2000], k=2)[0][:, 1]))
        min_side = 2 * spacing
    cubes = whitney_cubes(jet, lo, hi, min_side)
    return ExtendedField(jet, "cube", cubes=cubes)
