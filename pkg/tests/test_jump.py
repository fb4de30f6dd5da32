from __future__ import annotations

import numpy as np
import pytest

from lamejump.geometry import Ball, grid_domain, mesh_for_domain
from lamejump.jump import (BlowUpError, JumpProblemSpec, LadderParams, M_residual, borel_pompeiu_reconstruct,
                           cauchy_represent, decay_check, lp_norm_check, one_sided_jump, pde_residual,
                           richardson_limit, solve_jump_smooth, verify_jump)
from lamejump.polyfield import LameParams, PolyField, StructuralSet, apply_M, dirichlet_counterexample
from lamejump.transforms import BoundaryOptions, DensityField

S = StructuralSet.standard(3)
PHI = StructuralSet.from_rows([["0", "-1", "0"], ["3/5", "0", "4/5"], ["-4/5", "0", "3/5"]])
LAM = LameParams(1, 1)


@pytest.fixture(scope="module")
def mesh():
    return mesh_for_domain(Ball(3), 3)


def test_richardson_exact_for_linear_ladder():
    eps = 0.1 * 2.0 ** -np.arange(5)
    v = (3.0 + 2.0 * eps)[:, None]
    ext, _ = richardson_limit(v, 2.0)
    np.testing.assert_allclose(ext[:, 0], 3.0)


def test_one_sided_jump_of_step():
    f = lambda P: np.where(P[:, :1] < 0, 2.0 + P[:, :1], -1.0 + 0.5 * P[:, :1])  # noqa: E731
    j, ok, _ = one_sided_jump(f, np.zeros(3), np.array([1.0, 0, 0]), LadderParams(0.2))
    assert ok and j[0] == pytest.approx(3.0)


def test_zero_data_gives_zero_solution(mesh):
    z = DensityField.constant(0.0, 3)
    sol = solve_jump_smooth(JumpProblemSpec(z, z, LAM, PHI, S, Ball(3)), mesh)
    X = np.array([[0.1, 0.2, 0.3], [2.0, 0, 0]])
    assert np.abs(sol.F(X)).max() == 0 and np.abs(sol.MF(X)).max() == 0


def test_constant_data_jump_and_decay(mesh):
    c = np.zeros(8)
    c[[0, 3]] = [1.0, -2.0]
    f = DensityField.constant(c, 3)
    sol = solve_jump_smooth(JumpProblemSpec(f, DensityField.constant(0.0, 3), LAM, PHI, S, Ball(3)), mesh)
    np.testing.assert_allclose(sol.F(np.array([[0.1, 0.2, 0.3]])), c[None], atol=1e-6)
    np.testing.assert_allclose(sol.F(np.array([[2.0, 0.3, 0.0]])), 0, atol=1e-6)
    d = decay_check(sol.F, 3, seed=0)
    assert np.all(d.max_norm < 1e-6)


def test_manufactured_smooth_jump(mesh):
    G = PolyField(3, {((1, 1, 0), 0): 1, ((0, 0, 2), 5): 2, ((1, 0, 0), 2): -1})
    MG = apply_M(G, S, LAM)
    sol = solve_jump_smooth(JumpProblemSpec(DensityField.from_poly(G), DensityField.from_poly(MG), LAM, PHI, S,
                                            Ball(3)), mesh, BoundaryOptions(near="refine"))
    u = np.random.default_rng(0).normal(size=(4, 3))
    Y = u / np.linalg.norm(u, axis=1, keepdims=True)
    rep = verify_jump(sol, Y, Y, G, MG, LadderParams(0.2))
    assert rep.median_jump_error < 3e-2 and rep.median_mf_error < 5e-2
    assert [r.side for r in rep.rows] == ["+-"] * 4
    rr = pde_residual(sol, np.array([[0.2, 0.1, 0.0], [1.8, 0.0, 0.5]]), 1e-3, Ball(3))
    assert rr.max < 1e-3
    assert np.max(M_residual(sol, np.array([[2.0, 0.1, 0.0]]))) < 1e-3


def test_cauchy_representation_of_null_solution():
    ce = dirichlet_counterexample()
    from lamejump.geometry import Ellipsoid

    E = Ellipsoid((6 ** -0.5, 1.0, 1.0))
    X = np.array([[0.1, 0.2, -0.1], [0.0, 0.4, 0.3]])
    v = cauchy_represent(ce.field, mesh_for_domain(E, 4), ce.phi, ce.psi, ce.lam, X)
    np.testing.assert_allclose(v, ce.field.evaluate(X), atol=1e-8)


def test_borel_pompeiu_dichotomy_refines(mesh):
    P = PolyField(3, {((2, 0, 0), 0): 1, ((0, 1, 1), 6): 1})
    X = np.array([[0.2, 0.0, 0.1], [0.5, 0.3, 0.2], [1.6, 0.2, 0.0]])
    ref = np.vstack([P.evaluate(X[:2]), np.zeros((1, 8))])
    errs = []
    for h in (0.1, 0.05):
        v = borel_pompeiu_reconstruct(P, mesh, grid_domain(Ball(3), h, 1), PHI, S, LAM, X)
        errs.append(np.linalg.norm(v - ref, axis=1).max())   # field scale on the ball is 1
    assert errs[1] < errs[0] < 1e-2


def test_lp_check_detects_blow_up():
    B = Ball(3)
    grid = grid_domain(B, 0.1)
    dens = DensityField(lambda X: np.column_stack([B.boundary_distance(X) ** -2.0, np.zeros((len(X), 7))]), 3)
    with pytest.raises(BlowUpError):
        lp_norm_check(dens, B, grid, 2.0)
    ok = lp_norm_check(DensityField.constant(1.0, 3), B, grid, 2.0)
    assert abs(ok["relative_growth"]) < 0.05
