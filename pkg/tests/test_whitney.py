from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lamejump.geometry import Ball
from lamejump.polyfield import LameParams, PolyField, StructuralSet, apply_lame, apply_M, random_polyfield
from lamejump.whitney import WhitneyError, WhitneyJet, whitney_extend

S = StructuralSet.standard(3)
SAMPLES = Ball(3).boundary_samples(0.1)[0]


@pytest.fixture(scope="module")
def linear_ext():
    P = PolyField(3, {((1, 0, 0), 0): 2, ((0, 1, 0), 3): -1, ((0, 0, 0), 1): 1})
    return P, whitney_extend(WhitneyJet.from_poly(P, SAMPLES, 0.9), "cube")


def test_jet_consistency_of_polynomial_is_finite():
    jet = WhitneyJet.from_poly(random_polyfield(3, 3, 1), SAMPLES, 0.9)
    c = jet.consistency(n_pairs=2000, seed=0, max_sep=0.3)
    assert 0 < c["C"] < np.inf and c["pairs"] > 0


def test_constant_jet_reproduced_exactly():
    v = np.arange(8, dtype=float)
    ext = whitney_extend(WhitneyJet.constant(v, SAMPLES, 0.5), "cube")
    X = np.random.default_rng(0).uniform(-1.2, 1.2, (50, 3))
    np.testing.assert_allclose(ext.evaluate(X), np.broadcast_to(v, (50, 8)), atol=1e-12)


def test_linear_jet_reproduced_exactly(linear_ext):
    P, ext = linear_ext
    X = np.random.default_rng(1).uniform(-1.2, 1.2, (50, 3))
    np.testing.assert_allclose(ext.evaluate(X), P.evaluate(X), atol=1e-12)


def test_extension_matches_jet_on_samples(linear_ext):
    P, ext = linear_ext
    np.testing.assert_allclose(ext.evaluate(SAMPLES[:20]), P.evaluate(SAMPLES[:20]), atol=1e-12)


@given(seed=st.integers(0, 1000))
def test_analytic_mode_is_exact(seed):
    P = random_polyfield(3, 3, seed)
    ext = whitney_extend(WhitneyJet.from_poly(P, SAMPLES[:50], 0.9), "analytic", poly=P)
    lam = LameParams(1, 1)
    X = np.random.default_rng(seed).normal(size=(5, 3))
    np.testing.assert_allclose(ext.evaluate(X), P.evaluate(X), atol=1e-12)
    np.testing.assert_allclose(ext.lame(X, S, S, lam), apply_lame(S, S, lam, P).evaluate(X), atol=1e-10)
    np.testing.assert_allclose(ext.apply_M(X, S, lam), apply_M(P, S, lam).evaluate(X), atol=1e-10)


def test_analytic_mode_rejects_mismatched_field():
    P = random_polyfield(3, 2, 1)
    jet = WhitneyJet.from_poly(P, SAMPLES[:20], 0.9)
    with pytest.raises(WhitneyError):
        whitney_extend(jet, "analytic", poly=P + PolyField.coordinate(1, 3))


def test_invalid_nu():
    with pytest.raises(WhitneyError):
        WhitneyJet.constant(np.ones(8), SAMPLES, 1.0)
