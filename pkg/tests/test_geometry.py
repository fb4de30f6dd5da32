from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.special import elliprg

from lamejump.geometry import (Ball, Ellipsoid, GeometryError, HalfSpace, KochPrism, VolumeGrid, box_counts,
                               estimate_d_summability, estimate_marcinkiewicz, grid_domain, icosphere,
                               koch_polygon, mesh_for_domain, sphere_rule)


def test_koch_polygon_counts_and_perimeter():
    for k in range(4):
        P = koch_polygon(k)
        assert len(P) == 3 * 4 ** k
        per = np.sum(np.linalg.norm(np.roll(P, -1, axis=0) - P, axis=1))
        assert per == pytest.approx(3 * (4 / 3) ** k)


def test_koch_prism_area_and_inside():
    K = KochPrism(2)
    # snowflake area: (sqrt(3)/4) (1 + 1/3 sum_{j<k} (4/9)^j)
    area = math.sqrt(3) / 4 * (1 + sum(3 * 4 ** j / 9 ** (j + 1) for j in range(2)))
    assert K.cross_section_area == pytest.approx(area)
    assert K.inside(np.array([[0, 0, 0.5]]))[0]
    assert not K.inside(np.array([[0, 0, 1.5], [2, 0, 0.5]])).any()


def test_ellipsoid_area_against_carlson_integral():
    a = (1.0, 0.7, 0.5)
    mesh = mesh_for_domain(Ellipsoid(a), 4)
    exact = 4 * math.pi * a[0] * a[1] * a[2] * float(elliprg(a[0] ** -2, a[1] ** -2, a[2] ** -2))
    assert mesh.area == pytest.approx(exact, rel=1e-6)


def test_sphere_mesh_normals_and_area():
    mesh = mesh_for_domain(Ball(3, 2.0), 3)
    assert mesh.area == pytest.approx(16 * math.pi, rel=1e-8)
    np.testing.assert_allclose(mesh.normals, mesh.points / 2.0, atol=1e-12)


_DENSE = icosphere(5)[0]


@given(st.lists(st.floats(-1.5, 1.5), min_size=3, max_size=3))
def test_ellipsoid_distance_against_dense_surface(p):
    E = Ellipsoid((1.0, 0.7, 0.5))
    S = _DENSE * E.a
    ref = np.min(np.linalg.norm(S - np.array(p), axis=1))
    d = float(E.boundary_distance(np.array([p]))[0])
    assert d <= ref + 1e-12
    assert d == pytest.approx(ref, abs=5e-3)


def test_ellipsoid_distance_degenerate_center():
    E = Ellipsoid((1.0, 0.7, 0.5))
    assert float(E.boundary_distance(np.zeros((1, 3)))[0]) == pytest.approx(0.5)


def test_sphere_rule_integrates_polynomials():
    X, w = sphere_rule(3, 8)
    assert w.sum() == pytest.approx(4 * math.pi)
    assert np.sum(w * X[:, 0] ** 2) == pytest.approx(4 * math.pi / 3)
    assert np.sum(w * X[:, 0] ** 2 * X[:, 1] ** 2) == pytest.approx(4 * math.pi / 15)


def test_grid_volume_converges():
    errs = [abs(grid_domain(Ball(3), h, 1).volume - 4 * math.pi / 3) for h in (0.1, 0.05)]
    assert errs[1] < errs[0] < 0.02 * 4 * math.pi / 3


def test_grid_jsonl_roundtrip(tmp_path):
    g = grid_domain(Ball(3), 0.2)
    g.to_jsonl(tmp_path / "g.jsonl")
    h = VolumeGrid.from_jsonl(tmp_path / "g.jsonl")
    assert len(h) == len(g)
    assert h.volume == pytest.approx(g.volume)


def test_box_counting_plane_and_line():
    rng = np.random.default_rng(0)
    sq = np.column_stack([rng.random((200_000, 2)), np.zeros(200_000)])
    taus = np.geomspace(0.5, 0.005, 12)
    assert estimate_d_summability(sq, taus).slope == pytest.approx(2.0, abs=0.1)
    t = np.linspace(0, 1, 100_000)
    line = np.column_stack([t, 0.3 * t, np.zeros_like(t)])
    assert estimate_d_summability(line, taus).slope == pytest.approx(1.0, abs=0.05)


def test_box_counts_nonincreasing():
    P = KochPrism(2).boundary_samples(0.01, include_caps=False)[0]
    c = box_counts(P, np.geomspace(0.02, 0.5, 8))
    assert np.all(np.diff(c) <= 0)


def test_box_counting_preconditions():
    P = np.random.default_rng(0).random((1000, 3))
    with pytest.raises(GeometryError):
        estimate_d_summability(P, np.geomspace(0.1, 0.05, 5))
    with pytest.raises(GeometryError):
        estimate_d_summability(P, np.geomspace(1.0, 0.001, 5))


def test_marcinkiewicz_half_space():
    H = HalfSpace((0.0, 0.0, 0.0), (0.0, 0.0, 1.0))
    r = estimate_marcinkiewicz(H, np.zeros((2, 3)), 0.5, n_samples=100_000)
    assert r.m_plus == pytest.approx(1.0, abs=0.05)
    assert r.m_minus == pytest.approx(1.0, abs=0.05)
    assert r.plus[0].p_bounded is not None and r.plus[0].p_bounded < 1


def test_ball_boundary_samples_on_sphere():
    P, w = Ball(3).boundary_samples(0.05)
    np.testing.assert_allclose(np.linalg.norm(P, axis=1), 1.0)
    assert w.sum() == pytest.approx(4 * math.pi)
