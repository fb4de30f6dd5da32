"""
Cauchy and Teodorescu type transforms for structural-set Dirac operators.

Every kernel used here is a radial weight times ``z_j`` or ``z_j z_k`` with
``z = y - x``, or the scalar ``E_1``.  A single pass over the quadrature nodes
of one target therefore produces three frame-independent moment tensors

    m1[j]    = sum_i w_i k(r_i) z_ij g_i
    m2[j, k] = sum_i w_i k(r_i) z_ij z_ik g_i
    m0       = sum_i w_i E_1(r_i) g_i,           k(r) = -1 / (sigma_m r^m)

from which all transform kinds and all frames are assembled.  ``g`` is the
density (volume transforms) or the density multiplied by ``n_phi`` on the
left or right (boundary transforms).

Volume integrals split the kernel with a smooth radial cutoff of radius
``rho`` around the target.  The outer part is smooth and summed with the cell
midpoint rule; the inner part is integrated in polar coordinates where the
``r^{m-1}`` Jacobian removes the weak singularity.  For polynomial densities
the inner rule is exact.  Keeping ``rho`` and the node set fixed makes the
result a smooth function of ``x``, so finite differences of transforms are
meaningful.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.spatial import cKDTree

from .clifford import embed_vectors, gp
from .geometry.surfaces import BoundaryMesh, NearSingularityError, sphere_rule
from .geometry.volume import VolumeGrid
from .kernels import sigma
from .polyfield import LameParams, PolyField, StructuralSet

BOUNDARY_KINDS = ("cl", "cr", "pair-c", "infra-c", "dagger-c")
VOLUME_KINDS = ("tl", "tr", "pair-t", "infra-t", "dagger-t")
KINDS = BOUNDARY_KINDS + VOLUME_KINDS


class TransformError(ValueError):
    pass


# ---------------------------------------------------------------------------
# densities


@dataclass(frozen=True)
class DensityField:
    """Multivector-valued function ``(N, m) -> (N, 2**m)`` with a smoothness tag."""

    evaluator: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    dim: int
    tag: str = "sampled"
    poly: PolyField | None = field(default=None, repr=False)

    def __call__(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        if pts.shape[-1] != self.dim:
            raise TransformError(f"density is defined on R^{self.dim}, got points in R^{pts.shape[-1]}")
        return self.evaluator(pts)

    @classmethod
    def from_poly(cls, P: PolyField) -> "DensityField":
        return cls(P.evaluate, P.dim, "polynomial-exact", P)

    @classmethod
    def constant(cls, value: np.ndarray, dim: int) -> "DensityField":
        v = np.asarray(value, dtype=float)
        if v.ndim == 0:
            v = np.concatenate([[float(v)], np.zeros((1 << dim) - 1)])
        return cls(lambda p: np.broadcast_to(v, p.shape[:-1] + v.shape).copy(), dim, "polynomial-exact")

    @classmethod
    def zero(cls, dim: int) -> "DensityField":
        return cls.constant(np.zeros(1 << dim), dim)

    @classmethod
    def from_samples(cls, points: np.ndarray, values: np.ndarray) -> "DensityField":
        """Nearest-sample interpolation of scattered values."""
        points = np.asarray(points, dtype=float)
        values = np.asarray(values, dtype=float)
        tree = cKDTree(points)

        def ev(p):
            _, idx = tree.query(p.reshape(-1, points.shape[1]))
            return values[idx].reshape(p.shape[:-1] + values.shape[1:])

        return cls(ev, points.shape[1], "sampled")

    def __add__(self, other: "DensityField") -> "DensityField":
        poly = self.poly + other.poly if self.poly is not None and other.poly is not None else None
        tag = self.tag if self.tag == other.tag else "sampled"
        return DensityField(lambda p: self(p) + other(p), self.dim, tag, poly)


def as_density(f, dim: int | None = None) -> DensityField:
    if isinstance(f, DensityField):
        return f
    if isinstance(f, PolyField):
        return DensityField.from_poly(f)
    if callable(f):
        if dim is None:
            raise TransformError("dimension needed to wrap a plain callable")
        return DensityField(f, dim, "sampled")
    raise TransformError(f"cannot use {type(f).__name__} as a density")


# ---------------------------------------------------------------------------
# results


@dataclass(frozen=True)
class TransformResult:
    """Transform values with quadrature diagnostics (leading axes follow the targets)."""

    value: np.ndarray
    kind: str
    n_nodes: np.ndarray
    nearest: np.ndarray
    est_error: np.ndarray
    refined: np.ndarray

    def to_json_obj(self) -> list[dict]:
        vals = np.atleast_2d(self.value)
        out = []
        for i, v in enumerate(vals):
            out.append({
                "kind": self.kind,
                "value": [float(c) for c in v],
                "n_nodes": int(np.ravel(self.n_nodes)[i]),
                "nearest": float(np.ravel(self.nearest)[i]),
                "est_error": None if np.isnan(np.ravel(self.est_error)[i]) else float(np.ravel(self.est_error)[i]),
                "refined": bool(np.ravel(self.refined)[i]),
            })
        return out


# ---------------------------------------------------------------------------
# moments


@dataclass
class Moments:
    """``m1 (m, C)``, ``m2 (m, m, C)``, ``m0 (C,)`` for ``C`` stacked density columns."""

    m1: np.ndarray
    m2: np.ndarray
    m0: np.ndarray

    def split(self, n: int) -> list["Moments"]:
        k = self.m0.shape[-1] // n
        return [Moments(self.m1[..., i * n:(i + 1) * n], self.m2[..., i * n:(i + 1) * n],
                        self.m0[..., i * n:(i + 1) * n]) for i in range(k)]

    def __add__(self, other: "Moments") -> "Moments":
        return Moments(self.m1 + other.m1, self.m2 + other.m2, self.m0 + other.m0)


def kernel_weights(z: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Rows ``[w k z_j, w k z_j z_k, w E_1]`` for nodes at offsets ``z`` (zero offsets get zero rows)."""
    m = z.shape[-1]
    r2 = np.einsum("...j,...j->...", z, z)
    ok = r2 > 0
    r = np.sqrt(np.where(ok, r2, 1.0))
    sm = sigma(m)
    k = np.where(ok, -w / (sm * r**m), 0.0)
    e1 = np.where(ok, w / ((m - 2) * sm * r ** (m - 2)), 0.0)
    kz = k[..., None] * z
    kzz = (kz[..., :, None] * z[..., None, :]).reshape(z.shape[:-1] + (m * m,))
    return np.concatenate([kz, kzz, e1[..., None]], axis=-1)


def moments_from(A: np.ndarray, G: np.ndarray, m: int) -> Moments:
    M = A.T @ G
    return Moments(M[:m], M[m:m + m * m].reshape(m, m, -1), M[-1])


def _frame(frame, m: int) -> np.ndarray:
    if frame is None:
        return embed_vectors(np.eye(m))
    arr = frame.array if isinstance(frame, StructuralSet) else np.asarray(frame, dtype=float)
    return embed_vectors(np.eye(m), arr)


def frame_vectors(frame, m: int) -> np.ndarray:
    """Dense ``(m, 2**m)`` array of the frame vectors."""
    return _frame(frame, m)


def assemble_left(M: Moments, phi) -> np.ndarray:
    """``sum_i w K_phi(z) g``."""
    m = M.m1.shape[0]
    return gp(_frame(phi, m), M.m1).sum(axis=0)


def assemble_right(M: Moments, phi) -> np.ndarray:
    """``sum_i w g K_phi(z)``."""
    m = M.m1.shape[0]
    return gp(M.m1, _frame(phi, m)).sum(axis=0)


def assemble_zk(M: Moments, phi, psi) -> np.ndarray:
    """``sum_i w z_psi K_phi(z) g``."""
    m = M.m1.shape[0]
    P, Q = _frame(phi, m), _frame(psi, m)
    QP = gp(Q[:, None, :], P[None, :, :])
    return gp(QP, M.m2).sum(axis=(0, 1))


def assemble_kz(M: Moments, phi, psi) -> np.ndarray:
    """``sum_i w K_phi(z) g z_psi``."""
    m = M.m1.shape[0]
    P, Q = _frame(phi, m), _frame(psi, m)
    return gp(gp(P[:, None, :], M.m2), Q[None, :, :]).sum(axis=(0, 1))


def assemble_e1_pair(M: Moments, phi, psi) -> np.ndarray:
    """``(sum_j psi_j phi_j) * sum_i w E_1 g``."""
    m = M.m1.shape[0]
    P, Q = _frame(phi, m), _frame(psi, m)
    return gp(gp(Q, P).sum(axis=0), M.m0)


def assemble_e1_infra(M: Moments, phi, psi) -> np.ndarray:
    """``sum_j phi_j (sum_i w E_1 g) psi_j``."""
    m = M.m1.shape[0]
    P, Q = _frame(phi, m), _frame(psi, m)
    return gp(gp(P, M.m0), Q).sum(axis=0)


def combine(kind: str, M: Moments, phi, psi=None, lam: LameParams | None = None) -> np.ndarray:
    """Transform value of the given kind from moments of the appropriate density."""
    base = kind.split("-")[0]
    sign = -1.0 if kind in VOLUME_KINDS else 1.0
    if base in ("cl", "tl"):
        return sign * assemble_left(M, phi)
    if base in ("cr", "tr"):
        return sign * assemble_right(M, phi)
    if base == "pair":
        return sign * 0.5 * (assemble_zk(M, phi, psi) + assemble_e1_pair(M, phi, psi))
    if base == "infra":
        return sign * 0.5 * (assemble_kz(M, phi, psi) + assemble_e1_infra(M, phi, psi))
    if base == "dagger":
        if lam is None:
            raise TransformError("dagger transforms need Lame parameters")
        pair = combine("pair-" + kind[-1], M, phi, psi)
        infra = combine("infra-" + kind[-1], M, phi, psi)
        return float(lam.dagger_pair) * pair - float(lam.dagger_infra) * infra
    raise TransformError(f"unknown transform kind {kind!r}")


# ---------------------------------------------------------------------------
# boundary quadrature


@dataclass(frozen=True)
class BoundaryOptions:
    """``near``: "error" refuses targets inside the guard band, "refine" subdivides panels."""

    near: str = "error"
    guard: float = 1.5
    eta: float = 3.0
    max_depth: int = 9
    shared: bool = False

    def __post_init__(self):
        if self.near not in ("error", "refine"):
            raise TransformError(f"near mode must be 'error' or 'refine', got {self.near!r}")


def boundary_groups(mesh: BoundaryMesh, X: np.ndarray, opts: BoundaryOptions):
    """Partition targets into groups sharing one node set.

    Yields ``(indices, points, normals, weights, refined)``.
    """
    d = mesh.nearest_distance(X)
    band = opts.guard * mesh.spacing
    near = d < band
    if np.any(near) and opts.near == "error":
        bad = int(np.argmax(near))
        raise NearSingularityError(
            f"target {X[bad].tolist()} is {d[bad]:.3g} from the boundary nodes, inside the guard band "
            f"{band:.3g}; use near='refine'")
    far_idx = np.flatnonzero(~near)
    groups = []
    if len(far_idx):
        groups.append((far_idx, mesh.points, mesh.normals, mesh.weights, False))
    near_idx = np.flatnonzero(near)
    if len(near_idx):
        if mesh.surface is None or mesh.surface.param_tris is None:
            # no parameterization to refine: fall back to plain nodes
            groups.append((near_idx, mesh.points, mesh.normals, mesh.weights, False))
        elif opts.shared:
            groups.append((near_idx, *mesh.nodes_near(X[near_idx], opts.eta, opts.max_depth), True))
        else:
            for i in near_idx:
                groups.append((np.array([i]), *mesh.nodes_near(X[i:i + 1], opts.eta, opts.max_depth), True))
    return groups, d


def _boundary_densities(kinds: set[str], f: DensityField, Y, Nrm, frames: dict) -> dict:
    """Stacked node densities ``n_phi f`` / ``f n_phi`` needed by ``kinds``."""
    fy = f(Y)
    cols = {}
    for kind in kinds:
        fr = frames[kind]
        n_phi = embed_vectors(Nrm, fr.array if isinstance(fr, StructuralSet) else fr)
        if kind in ("cr",):
            cols[kind] = gp(fy, n_phi)
        else:
            cols[kind] = gp(n_phi, fy)
    return cols


def boundary_transform(kind: str, mesh: BoundaryMesh, f, phi, x, psi=None, lam=None,
                       opts: BoundaryOptions | None = None, estimate_error: bool = True) -> TransformResult:
    """Evaluate a boundary transform of ``f`` at targets ``x`` (``(m,)`` or ``(P, m)``)."""
    if kind not in BOUNDARY_KINDS:
        raise TransformError(f"{kind!r} is not a boundary transform")
    opts = opts or BoundaryOptions()
    x = np.asarray(x, dtype=float)
    X = np.atleast_2d(x)
    m = X.shape[1]
    if m != mesh.dim:
        raise TransformError(f"targets in R^{m} but mesh in R^{mesh.dim}")
    f = as_density(f, m)
    groups, dist = boundary_groups(mesh, X, opts)
    out = np.zeros((len(X), 1 << m))
    n_nodes = np.zeros(len(X), int)
    refined = np.zeros(len(X), bool)
    for idx, Y, Nrm, W, ref in groups:
        g = _boundary_densities({kind}, f, Y, Nrm, {kind: phi})[kind]
        for i in idx:
            M = moments_from(kernel_weights(Y - X[i], W), g, m)
            out[i] = combine(kind, M, phi, psi, lam)
            n_nodes[i] = len(W)
            refined[i] = ref
    est = np.full(len(X), np.nan)
    if estimate_error:
        close = dist < 3 * mesh.spacing
        if np.any(close) and mesh.surface is not None and mesh.surface.param_tris is not None:
            # compare against one more level of near-field refinement
            for i in np.flatnonzero(close):
                Y, Nrm, W = mesh.nodes_near(X[i:i + 1], 2 * opts.eta, opts.max_depth + 1)
                g = _boundary_densities({kind}, f, Y, Nrm, {kind: phi})[kind]
                M = moments_from(kernel_weights(Y - X[i], W), g, m)
                est[i] = float(np.linalg.norm(combine(kind, M, phi, psi, lam) - out[i]))
    shape = x.shape[:-1]
    return TransformResult(out.reshape(shape + (1 << m,)), kind, n_nodes.reshape(shape),
                           dist.reshape(shape), est.reshape(shape), refined.reshape(shape))


# ---------------------------------------------------------------------------
# volume quadrature


def smoothstep(t: np.ndarray) -> np.ndarray:
    """``0`` at ``t <= 0``, ``1`` at ``t >= 1``, three vanishing derivatives at both ends."""
    t = np.clip(t, 0.0, 1.0)
    return t**4 * (35 - 84 * t + 70 * t**2 - 20 * t**3)


@dataclass(frozen=True)
class VolumeOptions:
    """``rho``: cutoff radius (shared by all targets) or None for the per-target default.

    The default is ``min(rho_max, max(rho_frac * dist(x, boundary), rho_cells * h))``
    for interior targets and no inner part for exterior ones.  Second
    finite differences of a transform need ``rho >= 4 h``: below that the
    grid-periodic quadrature error is amplified by ``1 / step^2``.
    """

    rho: float | None = None
    rho_max: float = 0.5
    rho_frac: float = 0.5
    rho_cells: float = 4.0
    n_radial: int = 12
    n_angular: int = 8


def _core_rule(m: int, n_radial: int, n_angular: int):
    """Unit-ball nodes and weights for ``int_{|u|<1} (1 - S(|u|^2)) g(u) du``-type integrals."""
    t, wt = np.polynomial.legendre.leggauss(n_radial)
    r = 0.5 * (t + 1)
    wr = 0.5 * wt * r ** (m - 1)
    dirs, wd = sphere_rule(m, n_angular)
    nodes = (r[:, None, None] * dirs[None]).reshape(-1, m)
    w = (wr[:, None] * wd[None]).reshape(-1)
    chi = 1.0 - smoothstep(np.repeat(r, len(wd)) ** 2)
    return nodes, w * chi


def default_rho(grid: VolumeGrid, X: np.ndarray, opts: VolumeOptions) -> np.ndarray:
    if opts.rho is not None:
        return np.full(len(X), float(opts.rho))
    if grid.domain is None:
        return np.full(len(X), opts.rho_cells * grid.h)
    inside = grid.domain.inside(X)
    d = grid.domain.boundary_distance(X)
    rho = np.minimum(opts.rho_max, np.maximum(opts.rho_frac * d, opts.rho_cells * grid.h))
    return np.where(inside, rho, 0.0)


def _grid_values(grid: VolumeGrid, f: DensityField) -> np.ndarray:
    cache = grid.__dict__.setdefault("_density_cache", [])
    for dens, vals in cache:
        if dens is f:
            return vals
    vals = f(grid.points)
    cache.append((f, vals))
    if len(cache) > 8:
        cache.pop(0)
    return vals


def volume_moments(grid: VolumeGrid, densities: list[DensityField], X: np.ndarray,
                   opts: VolumeOptions | None = None) -> tuple[list[list[Moments]], np.ndarray, np.ndarray]:
    """Moments of every density at every target; also returns ``rho`` and node counts."""
    opts = opts or VolumeOptions()
    if len(grid) == 0:
        raise TransformError("volume grid is empty")
    m = grid.dim
    rho = default_rho(grid, X, opts)
    G = np.concatenate([_grid_values(grid, f) for f in densities], axis=1)
    n = 1 << m
    unit_nodes, unit_w = _core_rule(m, opts.n_radial, opts.n_angular)
    out: list[list[Moments]] = []
    counts = np.zeros(len(X), int)
    for i, x in enumerate(X):
        z = grid.points - x
        w = grid.weights
        if rho[i] > 0:
            w = w * smoothstep(np.einsum("ij,ij->i", z, z) / rho[i] ** 2)
        keep = w != 0
        M = moments_from(kernel_weights(z[keep], w[keep]), G[keep], m)
        counts[i] = int(keep.sum())
        if rho[i] > 0:
            Y = x + rho[i] * unit_nodes
            wc = unit_w * rho[i] ** m
            if grid.domain is not None:
                ins = grid.domain.inside(Y)
                Y, wc = Y[ins], wc[ins]
            if len(Y):
                Gc = np.concatenate([f(Y) for f in densities], axis=1)
                M = M + moments_from(kernel_weights(Y - x, wc), Gc, m)
                counts[i] += len(Y)
        out.append(M.split(n))
    return out, rho, counts


def volume_values(kinds, grid: VolumeGrid, f, phi, X, psi=None, lam=None,
                  opts: VolumeOptions | None = None):
    """Values ``(P, len(kinds), 2**m)`` of several volume transforms from one moment pass."""
    for kind in kinds:
        if kind not in VOLUME_KINDS:
            raise TransformError(f"{kind!r} is not a volume transform")
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != grid.dim:
        raise TransformError(f"targets in R^{X.shape[1]} but grid in R^{grid.dim}")
    f = as_density(f, grid.dim)
    moms, rho, counts = volume_moments(grid, [f], X, opts)
    vals = np.array([[combine(k, M[0], phi, psi, lam) for k in kinds] for M in moms])
    return vals, rho, counts


def volume_transform(kind: str, grid: VolumeGrid, f, phi, x, psi=None, lam=None,
                     opts: VolumeOptions | None = None) -> TransformResult:
    """Evaluate a volume (Teodorescu type) transform of ``f`` at targets ``x``."""
    x = np.asarray(x, dtype=float)
    X = np.atleast_2d(x)
    vals, rho, counts = volume_values((kind,), grid, f, phi, X, psi, lam, opts)
    out = vals[:, 0]
    m = X.shape[1]
    if grid.domain is not None:
        near = np.abs(grid.domain.boundary_distance(X))
    else:
        near = np.full(len(X), np.nan)
    # a-priori midpoint error scale of the smooth outer part
    scale = np.where(rho > 0, (grid.h / np.maximum(rho, grid.h)) ** 2, np.nan)
    est = scale * np.linalg.norm(out, axis=-1)
    shape = x.shape[:-1]
    return TransformResult(out.reshape(shape + (1 << m,)), kind, counts.reshape(shape),
                           near.reshape(shape), est.reshape(shape), (rho > 0).reshape(shape))


# ---------------------------------------------------------------------------
# named entry points


def cauchy_left(mesh, f, phi, x, **kw) -> TransformResult:
    """``int K_phi(y - x) n_phi(y) f(y) dS(y)``."""
    return boundary_transform("cl", mesh, f, phi, x, **kw)


def cauchy_right(mesh, f, phi, x, **kw) -> TransformResult:
    """``int f(y) n_phi(y) K_phi(y - x) dS(y)``."""
    return boundary_transform("cr", mesh, f, phi, x, **kw)


def teodorescu_left(grid, f, phi, x, **kw) -> TransformResult:
    """``-int K_phi(y - x) f(y) dy``."""
    return volume_transform("tl", grid, f, phi, x, **kw)


def teodorescu_right(grid, f, phi, x, **kw) -> TransformResult:
    """``-int f(y) K_phi(y - x) dy``."""
    return volume_transform("tr", grid, f, phi, x, **kw)


def cauchy_pair(mesh, f, phi, psi, x, **kw) -> TransformResult:
    return boundary_transform("pair-c", mesh, f, phi, x, psi=psi, **kw)


def teodorescu_pair(grid, f, phi, psi, x, **kw) -> TransformResult:
    return volume_transform("pair-t", grid, f, phi, x, psi=psi, **kw)


def cauchy_infra(mesh, f, phi, psi, x, **kw) -> TransformResult:
    return boundary_transform("infra-c", mesh, f, phi, x, psi=psi, **kw)


def teodorescu_infra(grid, f, phi, psi, x, **kw) -> TransformResult:
    return volume_transform("infra-t", grid, f, phi, x, psi=psi, **kw)


def cauchy_dagger(mesh, f, phi, psi, lam, x, **kw) -> TransformResult:
    return boundary_transform("dagger-c", mesh, f, phi, x, psi=psi, lam=lam, **kw)


def teodorescu_dagger(grid, f, phi, psi, lam, x, **kw) -> TransformResult:
    return volume_transform("dagger-t", grid, f, phi, x, psi=psi, lam=lam, **kw)


def transform(kind: str, support, f, phi, x, psi=None, lam=None, **kw) -> TransformResult:
    """Dispatch on ``kind`` (one of :data:`KINDS`)."""
    if kind in BOUNDARY_KINDS:
        return boundary_transform(kind, support, f, phi, x, psi=psi, lam=lam, **kw)
    return volume_transform(kind, support, f, phi, x, psi=psi, lam=lam, **kw)


def field_at(kind, support, f, phi, psi=None, lam=None, **kw) -> Callable[[np.ndarray], np.ndarray]:
    """Closure ``X -> values`` with node set and cutoff shared across the batch.

    Use this to feed finite-difference stencils: for volume kinds the cutoff
    radius is fixed from the batch centroid; for boundary kinds near-field
    refinement is computed once for the whole batch.  ``kind`` may be a
    tuple of volume kinds, in which case values are concatenated along the
    last axis.
    """
    opts = kw.pop("opts", None)
    kinds = (kind,) if isinstance(kind, str) else tuple(kind)

    def ev(X):
        X = np.atleast_2d(X)
        if kinds[0] in BOUNDARY_KINDS:
            o = opts or BoundaryOptions()
            o = BoundaryOptions(o.near, o.guard, o.eta, o.max_depth, True)
            return np.concatenate([boundary_transform(k, support, f, phi, X, psi=psi, lam=lam, opts=o,
                                                      estimate_error=False).value for k in kinds], axis=-1)
        o = opts or VolumeOptions()
        if o.rho is None:
            center = X.mean(axis=0, keepdims=True)
            r = float(default_rho(support, center, o)[0])
            o = VolumeOptions(r, o.rho_max, o.rho_frac, o.rho_cells, o.n_radial, o.n_angular)
        vals, _, _ = volume_values(kinds, support, f, phi, X, psi, lam, o)
        return vals.reshape(len(X), -1)

    return ev
