from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest
import sympy as sp
from conftest import frames, lame_params, polyfields
from hypothesis import given
from hypothesis import strategies as st

from lamejump.polyfield import (LameParams, LameParamsError, PolyField, StructuralSet, StructuralSetError, apply_lame,
                                apply_M, dirac_left, dirac_right, dirichlet_counterexample, laplacian,
                                partial_derivative, vanishes_on)


@given(data=st.data())
def test_dirac_squares_to_minus_laplacian(data):
    m = data.draw(st.sampled_from([3, 4]))
    phi = data.draw(frames(m))
    P = data.draw(polyfields(m, 4))
    assert (dirac_left(phi, dirac_left(phi, P)) + laplacian(P)).is_zero()
    assert (dirac_right(dirac_right(P, phi), phi) + laplacian(P)).is_zero()


@given(data=st.data())
def test_lame_factors_through_M(data):
    # L = phi_D (alpha (.) psi_D + beta psi_D (.)) = phi_D M
    phi, psi = data.draw(frames(3)), data.draw(frames(3))
    lam = data.draw(lame_params())
    P = data.draw(polyfields(3, 3))
    assert apply_lame(phi, psi, lam, P) == dirac_left(phi, apply_M(P, psi, lam))


@given(lam=lame_params())
def test_coefficient_identity(lam):
    mu, la = lam.mu, lam.lam
    assert (3 * mu + la) ** 2 - (mu + la) ** 2 == 4 * mu * (2 * mu + la)
    assert lam.c_left - lam.c_right == 1
    assert lam.alpha == (mu + la) / 2 and lam.beta == (3 * mu + la) / 2


def test_standard_frame_is_classical_elasticity():
    # sympy oracle: for vector fields and standard frames, L u = -(mu Lap u + (mu+lam) grad div u)
    S = StructuralSet.standard(3)
    mu, la = Fraction(1), Fraction(1, 2)
    u = PolyField(3, {((2, 1, 0), 1): 1, ((0, 1, 2), 2): 1, ((1, 0, 1), 4): 1, ((1, 1, 1), 1): 3})
    L = apply_lame(S, S, LameParams(mu, la), u)
    X = sp.symbols("x1 x2 x3")
    U = [X[0] ** 2 * X[1] + 3 * X[0] * X[1] * X[2], X[1] * X[2] ** 2, X[0] * X[2]]
    div = sum(sp.diff(U[i], X[i]) for i in range(3))
    rng = np.random.default_rng(0)
    for p in rng.normal(size=(5, 3)):
        sub = dict(zip(X, p))
        ref = [-float((sp.Rational(1) * sum(sp.diff(U[i], v, 2) for v in X)
                       + sp.Rational(3, 2) * sp.diff(div, X[i])).subs(sub)) for i in range(3)]
        val = L.evaluate(p[None])[0]
        np.testing.assert_allclose(val[[1, 2, 4]], ref, atol=1e-12)
        np.testing.assert_allclose(np.delete(val, [1, 2, 4]), 0, atol=1e-12)


def test_counterexample_is_exact_null_solution():
    ce = dirichlet_counterexample()
    assert ce.phi == StructuralSet.from_rows([[-1, 0, 0], [0, 1, 0], [0, 0, 1]])
    assert ce.lam.alpha == Fraction(1, 5) and ce.lam.beta == Fraction(3, 10)
    assert not ce.field.is_zero()
    assert apply_lame(ce.phi, ce.psi, ce.lam, ce.field).is_zero()
    assert vanishes_on(ce.field, ce.surface)
    # the standard frame does not annihilate it
    S = StructuralSet.standard(3)
    assert not apply_lame(S, S, ce.lam, ce.field).is_zero()


def test_vanishes_on_rejects_nondivisible():
    x1 = PolyField.coordinate(1, 3)
    assert not vanishes_on(x1, dirichlet_counterexample().surface)


@given(P=polyfields(3, 3))
def test_partial_derivative_matches_sympy(P):
    X = sp.symbols("x1 x2 x3")
    for mask in P.blades():
        expr = sum(c * X[0] ** p[0] * X[1] ** p[1] * X[2] ** p[2] for p, c in P.blade_polynomial(mask).items())
        d = partial_derivative(P, 2).blade_polynomial(mask)
        ref = sp.Poly(sp.diff(expr, X[1]), *X).as_dict() if expr != 0 else {}
        assert {k: v for k, v in d.items() if v} == {k: Fraction(int(v.p), int(v.q)) for k, v in ref.items()}


@given(P=polyfields(3, 3))
def test_json_roundtrip(P):
    assert PolyField.from_json(P.to_json()) == P


def test_invalid_lame_params():
    with pytest.raises(LameParamsError):
        LameParams(Fraction(0), Fraction(1))
    with pytest.raises(LameParamsError):
        LameParams(Fraction(3), Fraction(-2))


def test_non_orthonormal_frame_rejected():
    with pytest.raises(StructuralSetError):
        StructuralSet.from_rows([[1, 0, 0], [1, 1, 0], [0, 0, 1]])
