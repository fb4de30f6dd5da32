"""
Integral representations and the transmission (jump) problem for the
generalized Lame-Navier operator.

Boundary terms shared by every assembly, for a target ``x``:

    c_l C^l_psi f - c_r C^r_psi f + C^dagger g + c_x (int K_psi f n_psi - int n_psi f K_psi)

with ``c_l = (3mu+lam)^2 / D``, ``c_r = (mu+lam)^2 / D``,
``c_x = (3mu+lam)(mu+lam) / D``, ``D = 4 mu (2 mu + lam)``.  With ``g = M f``
plus the volume term ``T^dagger(L f)`` this reproduces ``f`` inside and
vanishes outside; with ``g = f1`` it solves the smooth jump problem.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .clifford import embed_vectors, gp
from .fd import gradient, hessian, lame_terms_from_hessian
from .geometry.domains import Domain
from .geometry.surfaces import BoundaryMesh
from .geometry.volume import VolumeGrid
from .polyfield import (LameParams, PolyField, StructuralSet, apply_lame, apply_M)
from .transforms import (BoundaryOptions, DensityField, VolumeOptions, as_density, assemble_left,
                         assemble_right, boundary_groups, combine, default_rho, kernel_weights, moments_from,
                         volume_values)


class PreconditionError(ValueError):
    pass


class ExtrapolationError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# boundary assembly


def boundary_assembly(mesh: BoundaryMesh, f, g, phi, psi, lam: LameParams, X,
                      opts: BoundaryOptions | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Boundary part of the representation and ``C^l_phi g`` at targets ``X``.

    Returns ``(F, Cg)`` with shapes ``(P, 2**m)``.
    """
    opts = opts or BoundaryOptions()
    X = np.atleast_2d(np.asarray(X, dtype=float))
    m = X.shape[1]
    n = 1 << m
    f = as_density(f, m)
    g = as_density(g, m)
    cl, cr, cx = float(lam.c_left), float(lam.c_right), float(lam.c_mixed)
    F = np.zeros((len(X), n))
    Cg = np.zeros((len(X), n))
    groups, _ = boundary_groups(mesh, X, opts)
    for idx, Y, Nrm, W, _ in groups:
        fy, gy = f(Y), g(Y)
        n_psi = embed_vectors(Nrm, psi.array)
        n_phi = embed_vectors(Nrm, phi.array)
        G = np.concatenate([gp(n_psi, fy), gp(fy, n_psi), gp(n_phi, gy)], axis=1)
        for i in idx:
            M_nf, M_fn, M_ng = moments_from(kernel_weights(Y - X[i], W), G, m).split(n)
            left = assemble_left(M_nf, psi)           # int K_psi n_psi f
            right = assemble_right(M_fn, psi)         # int f n_psi K_psi
            mixed = assemble_left(M_fn, psi) - assemble_right(M_nf, psi)
            dag = combine("dagger-c", M_ng, phi, psi, lam)
            F[i] = cl * left - cr * right + dag + cx * mixed
            Cg[i] = assemble_left(M_ng, phi)
    return F, Cg


def _poly_operators(f: PolyField, phi, psi, lam):
    return apply_M(f, psi, lam), apply_lame(phi, psi, lam, f)


def borel_pompeiu_reconstruct(f: PolyField, mesh: BoundaryMesh, grid: VolumeGrid | None, phi: StructuralSet,
                              psi: StructuralSet, lam: LameParams, x,
                              bopts: BoundaryOptions | None = None,
                              vopts: VolumeOptions | None = None) -> np.ndarray:
    """Six-term integral assembly of a polynomial field; ``f(x)`` inside, ``0`` outside.

    ``M f`` and ``L f`` are formed exactly.  When ``L f`` vanishes identically
    the volume term is skipped and ``grid`` may be ``None``.
    """
    x = np.asarray(x, dtype=float)
    X = np.atleast_2d(x)
    Mf, Lf = _poly_operators(f, phi, psi, lam)
    F, _ = boundary_assembly(mesh, DensityField.from_poly(f), DensityField.from_poly(Mf), phi, psi, lam, X, bopts)
    if not Lf.is_zero():
        if grid is None:
            raise PreconditionError("L f is nonzero, a volume grid is required")
        vals, _, _ = volume_values(("dagger-t",), grid, DensityField.from_poly(Lf), phi, X, psi, lam, vopts)
        F = F + vals[:, 0]
    return F.reshape(x.shape[:-1] + (F.shape[-1],))


def cauchy_represent(f: PolyField, mesh: BoundaryMesh, phi, psi, lam, x,
                     bopts: BoundaryOptions | None = None) -> np.ndarray:
    """Boundary-only representation of a null solution of the Lame-Navier operator.

    Refuses to run unless ``L f = 0`` holds identically.
    """
    Mf, Lf = _poly_operators(f, phi, psi, lam)
    if not Lf.is_zero():
        raise PreconditionError("field is not a null solution of the Lame-Navier operator")
    x = np.asarray(x, dtype=float)
    F, _ = boundary_assembly(mesh, DensityField.from_poly(f), DensityField.from_poly(Mf), phi, psi, lam,
                             np.atleast_2d(x), bopts)
    return F.reshape(x.shape[:-1] + (F.shape[-1],))


# ---------------------------------------------------------------------------
# problem and solution containers


@dataclass(frozen=True)
class JumpProblemSpec:
    """Boundary data for the transmission problem: ``[F] = f``, ``[M F] = f1``."""

    f: DensityField
    f1: DensityField
    lam: LameParams
    phi: StructuralSet
    psi: StructuralSet
    domain: Domain | None = None


EVAL_MODES = ("pointwise", "stencil", "ladder")


@dataclass(frozen=True)
class SolutionField:
    """Evaluators for ``F`` and ``M F``.

    ``mode`` selects how a batch is evaluated: ``"pointwise"`` (default),
    ``"stencil"`` (one node set and cutoff for the whole batch, for finite
    differences) or ``"ladder"`` (points approaching the boundary: boundary
    panels refined per point, volume cutoff fixed across the batch).
    """

    evaluate_F: Callable[..., np.ndarray] = field(repr=False)
    evaluate_MF: Callable[..., np.ndarray] = field(repr=False)
    provenance: str
    phi: StructuralSet
    psi: StructuralSet
    lam: LameParams
    diagnostics: dict = field(default_factory=dict)

    def F(self, X, mode: str = "pointwise") -> np.ndarray:
        return self._eval(self.evaluate_F, X, mode)

    def MF(self, X, mode: str = "pointwise") -> np.ndarray:
        return self._eval(self.evaluate_MF, X, mode)

    @staticmethod
    def _eval(fn, X, mode):
        if mode not in EVAL_MODES:
            raise ValueError(f"unknown evaluation mode {mode!r}")
        X = np.asarray(X, dtype=float)
        out = fn(np.atleast_2d(X), mode)
        return out.reshape(X.shape[:-1] + (out.shape[-1],))


def solve_jump_smooth(spec: JumpProblemSpec, mesh: BoundaryMesh,
                      opts: BoundaryOptions | None = None) -> SolutionField:
    """Boundary-integral solution of the smooth transmission problem.

    ``MF`` is evaluated directly as ``C^l_phi f1``.
    """
    base = opts or BoundaryOptions()

    def run(X, mode):
        o = BoundaryOptions(base.near, base.guard, base.eta, base.max_depth, mode == "stencil")
        return boundary_assembly(mesh, spec.f, spec.f1, spec.phi, spec.psi, spec.lam, X, o)

    return SolutionField(lambda X, mode="pointwise": run(X, mode)[0],
                         lambda X, mode="pointwise": run(X, mode)[1],
                         "smooth-boundary integral solution", spec.phi, spec.psi, spec.lam,
                         {"mesh": dict(mesh.meta), "near": base.near})


def solve_jump_fractal(domain: Domain, ftilde, lam: LameParams, phi: StructuralSet, psi: StructuralSet,
                       grid: VolumeGrid, nu: float, d_estimate: float | None = None,
                       vopts: VolumeOptions | None = None, lp_check: bool = True,
                       p_offset: float = 0.25) -> SolutionField:
    """``F = f~ chi_Omega - T^dagger(L f~)`` and ``M F = (M f~) chi_Omega - T^l_phi(L f~)``.

    ``ftilde`` is a polynomial field (exact ``L``) or an extension object with
    ``lame`` and ``apply_M`` methods.  The hypothesis ``nu > d / m`` is checked
    against ``d_estimate`` and recorded; a violation is a warning entry, not
    an error, because ``d`` is itself an estimate.
    """
    m = domain.dim
    if not 0 < nu < 1:
        raise ValueError(f"nu must lie in (0, 1), got {nu}")
    if isinstance(ftilde, PolyField):
        Mf, Lf = _poly_operators(ftilde, phi, psi, lam)
        f_ev, Mf_ev, Lf_ev = ftilde.evaluate, Mf.evaluate, Lf.evaluate
    else:
        f_ev = ftilde.evaluate
        Mf_ev = lambda X: ftilde.apply_M(X, psi, lam)  # noqa: E731
        Lf_ev = lambda X: ftilde.lame(X, phi, psi, lam)  # noqa: E731
    Ldens = DensityField(Lf_ev, m, "extended-whitney")
    diag: dict = {"nu": nu, "grid_h": grid.h, "cells": len(grid)}
    if d_estimate is not None:
        diag["d_estimate"] = d_estimate
        diag["hypothesis_nu_gt_d_over_m"] = bool(nu > d_estimate / m)
        if not nu > d_estimate / m:
            diag["warning"] = f"nu = {nu} does not exceed d/m = {d_estimate / m:.4f}"
        if lp_check:
            p = (m - d_estimate) / (1 - nu) if nu > d_estimate / m else m + p_offset
            diag["lp"] = lp_norm_check(Ldens, domain, grid, p)
    base = vopts or VolumeOptions()

    def volume(X, mode, kinds):
        o = base
        if mode != "pointwise" and o.rho is None:
            # stencils share the centroid's cutoff; ladders approach the boundary, where it is 2h anyway
            r = float(default_rho(grid, X.mean(axis=0, keepdims=True), base)[0]) if mode == "stencil" \
                else base.rho_cells * grid.h
            o = VolumeOptions(r, base.rho_max, base.rho_frac, base.rho_cells, base.n_radial, base.n_angular)
        vals, _, _ = volume_values(kinds, grid, Ldens, phi, X, psi, lam, o)
        return vals[:, 0]

    def evF(X, mode="pointwise"):
        chi = domain.inside(X)[:, None]
        return np.where(chi, f_ev(X), 0.0) - volume(X, mode, ("dagger-t",))

    def evMF(X, mode="pointwise"):
        chi = domain.inside(X)[:, None]
        return np.where(chi, Mf_ev(X), 0.0) - volume(X, mode, ("tl",))

    return SolutionField(evF, evMF, "extension minus dagger volume transform", phi, psi, lam, diag)


class BlowUpError(RuntimeError):
    pass


def lp_norm_check(density: DensityField, domain: Domain, grid: VolumeGrid, p: float,
                  growth_tol: float = 0.5) -> dict:
    """Empirical ``L^p`` norm of a density on the grid and a refinement of it.

    A norm that grows by more than ``growth_tol`` (relative) when the boundary
    layer is refined signals a non-integrable blow-up and raises.
    """
    from .geometry.volume import grid_domain

    def norm(G):
        v = np.linalg.norm(density(G.points), axis=-1)
        return float(np.sum(G.weights * v**p) ** (1 / p))

    n0 = norm(grid)
    fine = grid_domain(domain, grid.h, refine_boundary=int(grid.meta.get("refine_boundary", 0)) + 1)
    n1 = norm(fine)
    growth = (n1 - n0) / max(n0, 1e-300)
    if growth > growth_tol:
        raise BlowUpError(f"L^{p:.3g} norm grows from {n0:.4g} to {n1:.4g} under refinement")
    return {"p": p, "norm": n0, "norm_refined": n1, "relative_growth": growth}


# ---------------------------------------------------------------------------
# verification


@dataclass(frozen=True)
class LadderParams:
    eps0: float
    rungs: int = 6
    ratio: float = 2.0
    tol: float = 0.1


@dataclass(frozen=True)
class JumpRow:
    point_id: int
    side: str
    jump_error: float
    mf_jump_error: float
    extrapolation_ok: bool


@dataclass(frozen=True)
class JumpReport:
    rows: list[JumpRow]
    max_jump_error: float
    median_jump_error: float
    max_mf_error: float
    median_mf_error: float
    flagged: list[int]

    def to_json_obj(self) -> dict:
        return {
            "max_jump_error": self.max_jump_error,
            "median_jump_error": self.median_jump_error,
            "max_mf_error": self.max_mf_error,
            "median_mf_error": self.median_mf_error,
            "flagged": list(self.flagged),
            "n_points": len(self.rows),
        }


def richardson_limit(values: np.ndarray, ratio: float = 2.0) -> tuple[np.ndarray, np.ndarray]:
    """Order-1 extrapolants ``(r v_{k+1} - v_k) / (r - 1)`` of a ladder ``(K, ...)``."""
    return (ratio * values[1:] - values[:-1]) / (ratio - 1), values


def one_sided_jump(evaluate: Callable, y: np.ndarray, n: np.ndarray, ladder: LadderParams):
    """Extrapolated ``lim F(y - e n) - F(y + e n)``, convergence flag, and the extrapolant ladder."""
    eps = ladder.eps0 * ladder.ratio ** -np.arange(ladder.rungs)
    pts = np.concatenate([y - eps[:, None] * n, y + eps[:, None] * n])
    vals = evaluate(pts)
    K = ladder.rungs
    jumps = vals[:K] - vals[K:]
    ext, _ = richardson_limit(jumps, ladder.ratio)
    scale = max(float(np.linalg.norm(ext[-1])), 1e-300)
    ok = bool(len(ext) < 2 or np.linalg.norm(ext[-1] - ext[-2]) < ladder.tol * scale)
    return ext[-1], ok, ext


def _rel(err: float, ref: float, floor: float) -> float:
    return err / max(ref, floor)


def verify_jump(sol: SolutionField, points: np.ndarray, normals: np.ndarray, f_expected, f1_expected,
                ladder: LadderParams, floor_frac: float = 0.1) -> JumpReport:
    """Compare extrapolated jumps of ``F`` and ``M F`` with the prescribed data.

    Errors are ``|jump - expected| / max(|expected|, floor_frac * data scale)``.
    Points whose ladder fails the convergence test are listed in ``flagged``.
    """
    points = np.atleast_2d(points)
    normals = np.atleast_2d(normals)
    m = points.shape[1]
    fe = as_density(f_expected, m)(points)
    f1e = as_density(f1_expected, m)(points)
    fs = float(np.max(np.linalg.norm(fe, axis=-1))) if len(fe) else 0.0
    f1s = float(np.max(np.linalg.norm(f1e, axis=-1))) if len(f1e) else 0.0
    rows, flagged = [], []
    for i, (y, n) in enumerate(zip(points, normals)):
        jF, okF, _ = one_sided_jump(lambda P: sol.F(P, "ladder"), y, n, ladder)
        jM, okM, _ = one_sided_jump(lambda P: sol.MF(P, "ladder"), y, n, ladder)
        ok = okF and okM
        eF = _rel(float(np.linalg.norm(jF - fe[i])), float(np.linalg.norm(fe[i])), floor_frac * fs or 1.0)
        eM = _rel(float(np.linalg.norm(jM - f1e[i])), float(np.linalg.norm(f1e[i])), floor_frac * f1s or 1.0)
        rows.append(JumpRow(i, "+-", eF, eM, ok))
        if not ok:
            flagged.append(i)
    jf = np.array([r.jump_error for r in rows])
    jm = np.array([r.mf_jump_error for r in rows])
    return JumpReport(rows, float(jf.max(initial=0)), float(np.median(jf)) if len(jf) else 0.0,
                      float(jm.max(initial=0)), float(np.median(jm)) if len(jm) else 0.0, flagged)


@dataclass(frozen=True)
class ResidualReport:
    residuals: np.ndarray
    scales: np.ndarray
    median: float
    max: float

    def to_json_obj(self) -> dict:
        return {"median": self.median, "max": self.max, "n_points": int(len(self.residuals))}


def pde_residual(sol: SolutionField, points, h: float = 1e-3, domain: Domain | None = None,
                 min_dist: float | None = None, order: int = 2) -> ResidualReport:
    """Relative finite-difference residual of the Lame-Navier operator applied to ``F``.

    The scale at each point is ``|alpha phi_D F psi_D| + |beta phi_D psi_D F|``.
    Points closer than ``3 h`` (or ``min_dist``) to the boundary are rejected.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if domain is not None:
        d = np.abs(domain.boundary_distance(points))
        lim = max(3 * h, min_dist or 0.0)
        if np.any(d <= lim):
            raise PreconditionError(f"residual points must be farther than {lim:.3g} from the boundary")
    a, b = float(sol.lam.alpha), float(sol.lam.beta)
    res, scl = [], []
    for x in points:
        H = hessian(lambda P: sol.F(P, "stencil"), x, h, order)
        sw, hm = lame_terms_from_hessian(H, sol.phi, sol.psi)
        r = np.linalg.norm(a * sw + b * hm)
        s = np.linalg.norm(a * sw) + np.linalg.norm(b * hm)
        res.append(r)
        scl.append(s)
    res, scl = np.array(res), np.array(scl)
    rel = np.where(scl > 0, res / np.where(scl > 0, scl, 1.0), 0.0)
    return ResidualReport(rel, scl, float(np.median(rel)) if len(rel) else 0.0, float(rel.max(initial=0)))


def M_residual(sol: SolutionField, points, h: float = 1e-3) -> np.ndarray:
    """Relative mismatch between finite-difference ``M F`` and the direct ``M F`` evaluator."""
    a, b = float(sol.lam.alpha), float(sol.lam.beta)
    out = []
    for x in np.atleast_2d(points):
        G = gradient(lambda P: sol.F(P, "stencil"), x, h, 2)
        Q = embed_vectors(np.eye(len(x)), sol.psi.array)
        fdM = a * gp(G, Q).sum(axis=0) + b * gp(Q, G).sum(axis=0)
        direct = sol.MF(x[None], "stencil")[0]
        out.append(np.linalg.norm(fdM - direct) / max(np.linalg.norm(direct), 1e-300))
    return np.array(out)


@dataclass(frozen=True)
class DecayReport:
    radii: np.ndarray
    max_norm: np.ndarray
    monotone: bool
    rate: float

    def to_json_obj(self) -> dict:
        return {"radii": self.radii.tolist(), "max_norm": self.max_norm.tolist(),
                "monotone": self.monotone, "empirical_rate": self.rate}


def decay_check(evaluate: Callable[[np.ndarray], np.ndarray], m: int, radii=(5, 10, 20, 40),
                n_dirs: int = 26, seed: int = 0) -> DecayReport:
    """Max over seeded directions of ``|F(R u)|``; monotone non-increase in ``R`` and log-log rate."""
    rng = np.random.default_rng(seed)
    u = rng.normal(size=(n_dirs, m))
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    radii = np.asarray(radii, dtype=float)
    mx = np.array([float(np.max(np.linalg.norm(evaluate(R * u), axis=-1))) for R in radii])
    mono = bool(np.all(np.diff(mx) <= 0))
    rate = float(np.polyfit(np.log(radii), np.log(np.maximum(mx, 1e-300)), 1)[0]) if np.all(mx > 0) else float("-inf")
    return DecayReport(radii, mx, mono, rate)
