from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lamejump.clifford import embed_vectors
from lamejump.geometry import Ball, NearSingularityError, grid_domain, mesh_for_domain
from lamejump.polyfield import LameParams, StructuralSet, random_polyfield
from lamejump.transforms import (BoundaryOptions, DensityField, TransformError, smoothstep, transform)

S = StructuralSet.standard(3)
PHI = StructuralSet.from_rows([["0", "-1", "0"], ["3/5", "0", "4/5"], ["-4/5", "0", "3/5"]])
X = np.array([[0.2, 0.1, -0.3], [0.0, 0.5, 0.0], [1.5, 0.0, 0.0], [0.0, -1.2, 1.0]])
ONE = DensityField.constant(1.0, 3)


@pytest.fixture(scope="module")
def grid():
    return grid_domain(Ball(3), 0.05, 1)


@pytest.fixture(scope="module")
def mesh():
    return mesh_for_domain(Ball(3), 3)


def test_left_teodorescu_of_one_matches_uniform_ball_field(grid):
    # Newton's theorem: T^l 1 = -x/3 inside the unit ball and -x/(3|x|^3) outside
    r = np.linalg.norm(X, axis=1)[:, None]
    ref = np.where(r < 1, -embed_vectors(X) / 3, -embed_vectors(X) / (3 * r ** 3))
    np.testing.assert_allclose(transform("tl", grid, ONE, S, X).value, ref, atol=1e-4)


def test_pair_teodorescu_of_one_is_newtonian_potential(grid):
    # with standard frames the pair operator is -Delta: (3 - r^2)/6 inside, 1/(3r) outside
    r = np.linalg.norm(X, axis=1)
    ref = np.zeros((len(X), 8))
    ref[:, 0] = np.where(r < 1, (3 - r ** 2) / 6, 1 / (3 * r))
    np.testing.assert_allclose(transform("pair-t", grid, ONE, S, X, psi=S).value, ref, atol=1e-4)


@pytest.mark.parametrize("frame", [S, PHI])
def test_cauchy_of_one_is_indicator(mesh, frame):
    v = transform("cl", mesh, ONE, frame, X).value
    inside = np.linalg.norm(X, axis=1) < 1
    ref = np.zeros((len(X), 8))
    ref[inside, 0] = 1
    np.testing.assert_allclose(v, ref, atol=1e-7)


@given(c=st.lists(st.floats(-3, 3), min_size=8, max_size=8))
def test_cauchy_left_is_linear_in_constant_density(mesh, c):
    c = np.array(c)
    v = transform("cl", mesh, DensityField.constant(c, 3), PHI, X[:2]).value
    np.testing.assert_allclose(v, np.broadcast_to(c, v.shape), atol=1e-6 * (1 + np.abs(c).max()))


def test_volume_transform_linearity(grid):
    f = random_polyfield(3, 2, 1)
    g = random_polyfield(3, 2, 2)
    lam = LameParams(1, 1)
    kw = dict(psi=S, lam=lam)
    a = transform("dagger-t", grid, DensityField.from_poly(f), PHI, X, **kw).value
    b = transform("dagger-t", grid, DensityField.from_poly(g), PHI, X, **kw).value
    c = transform("dagger-t", grid, DensityField.from_poly(f + g * 2), PHI, X, **kw).value
    np.testing.assert_allclose(c, a + 2 * b, atol=1e-12)


def test_smoothstep_shape():
    t = np.linspace(0, 1, 101)
    s = smoothstep(t)
    assert s[0] == 0 and s[-1] == pytest.approx(1)
    assert np.all(np.diff(s) >= -1e-15)


def test_near_boundary_error_mode(mesh):
    with pytest.raises(NearSingularityError):
        transform("cl", mesh, ONE, S, np.array([[0.0, 0.0, 1.001]]), opts=BoundaryOptions(near="error"))
    v = transform("cl", mesh, ONE, S, np.array([[0.0, 0.0, 0.99]]), opts=BoundaryOptions(near="refine")).value
    assert v[0, 0] == pytest.approx(1, abs=1e-4)


def test_bad_kinds(mesh, grid):
    with pytest.raises(TransformError):
        transform("zz", mesh, ONE, S, X)
    with pytest.raises(TransformError):
        transform("dagger-c", mesh, ONE, S, X, psi=S)
    with pytest.raises(TransformError):
        BoundaryOptions(near="maybe")


def test_result_json(mesh):
    r = transform("cl", mesh, ONE, S, X[:2])
    obj = r.to_json_obj()
    assert len(obj) == 2 and obj[0]["kind"] == "cl" and len(obj[0]["value"]) == 8
