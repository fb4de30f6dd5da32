"""Cartesian cell grids over a domain, with optional boundary-layer refinement."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import product
from pathlib import Path

import numpy as np

from .domains import Domain, GeometryError


@dataclass(frozen=True)
class VolumeGrid:
    """Cell centers strictly inside the domain, their volumes and edge lengths."""

    points: np.ndarray
    weights: np.ndarray
    sizes: np.ndarray
    h: float
    domain: Domain | None = field(default=None, repr=False, compare=False)
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        for arr in (self.points, self.weights, self.sizes):
            arr.setflags(write=False)

    def __len__(self) -> int:
        return len(self.weights)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def volume(self) -> float:
        return float(self.weights.sum())

    def inside(self, x: np.ndarray) -> np.ndarray:
        if self.domain is None:
            raise GeometryError("grid has no domain attached")
        return self.domain.inside(x)

    def to_jsonl(self, path: str | Path) -> None:
        with open(path, "w") as fh:
            for p, w in zip(self.points, self.weights):
                fh.write(json.dumps({"p": p.tolist(), "w": float(w)}) + "\n")

    @classmethod
    def from_jsonl(cls, path: str | Path, domain: Domain | None = None) -> "VolumeGrid":
        """Read cells written by ``to_jsonl``; edge lengths are recovered as ``w^(1/m)``."""
        P, W = [], []
        with open(path) as fh:
            for line in fh:
                if line.strip():
                    rec = json.loads(line)
                    P.append(rec["p"])
                    W.append(rec["w"])
        if not P:
            raise GeometryError(f"{path}: empty grid")
        P, W = np.array(P, float), np.array(W, float)
        sizes = W ** (1.0 / P.shape[1])
        return cls(P, W, sizes, float(sizes.max()), domain, {"source": str(path)})


def _children(centers: np.ndarray, size: float) -> np.ndarray:
    m = centers.shape[1]
    offs = (np.array(list(product((-1, 1), repeat=m)), dtype=float)) * (size / 4)
    return (centers[:, None, :] + offs[None]).reshape(-1, m)


def grid_domain(domain: Domain, h: float, refine_boundary: int = 0) -> VolumeGrid:
    """Uniform cells of edge ``h`` whose centers pass the inside test.

    With ``refine_boundary = k`` every cell within one cell diagonal of the
    boundary is split ``k`` times into ``2^m`` children, keeping the children
    whose centers lie inside.  This shrinks the staircase error of the
    domain approximation by ``2^k``.
    """
    if not h > 0:
        raise GeometryError(f"cell size must be positive, got {h}")
    if h > domain.diameter:
        raise GeometryError(f"cell size {h} exceeds the domain diameter {domain.diameter:.4g}")
    lo, hi = (np.asarray(b, float) for b in domain.bbox)
    m = len(lo)
    axes = []
    for a, b in zip(lo, hi):
        n = max(int(np.ceil((b - a) / h)), 1)
        mid = 0.5 * (a + b)
        axes.append(mid + (np.arange(n) - (n - 1) / 2) * h)
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, m)
    inside = domain.inside(mesh)
    if refine_boundary > 0 and inside.any():
        band = 0.5 * np.sqrt(m) * h
        near = domain.boundary_distance(mesh) < band
        pts, sizes = [mesh[inside & ~near]], [np.full(int((inside & ~near).sum()), h)]
        shell, size = mesh[near], h
        for level in range(refine_boundary):
            kids = _children(shell, size)
            size /= 2
            ins = domain.inside(kids)
            if level == refine_boundary - 1:
                near_k = np.zeros(len(kids), bool)
            else:
                near_k = domain.boundary_distance(kids) < 0.5 * np.sqrt(m) * size
            pts.append(kids[ins & ~near_k])
            sizes.append(np.full(int((ins & ~near_k).sum()), size))
            shell = kids[near_k]
    else:
        pts, sizes = [mesh[inside]], [np.full(int(inside.sum()), h)]
    points = np.concatenate(pts) if pts else np.zeros((0, m))
    sizes_a = np.concatenate(sizes) if sizes else np.zeros(0)
    order = np.lexsort(points.T[::-1]) if len(points) else np.arange(0)
    points, sizes_a = points[order], sizes_a[order]
    meta = {"h": h, "refine_boundary": refine_boundary, "domain": domain.describe()}
    return VolumeGrid(points, sizes_a**m, sizes_a, float(h), domain, meta)
