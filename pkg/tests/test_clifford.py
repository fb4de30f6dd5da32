from __future__ import annotations

import numpy as np
import pytest
from conftest import multivectors
from hypothesis import given
from hypothesis import strategies as st

from lamejump.clifford import (DimensionMismatchError, Multivector, blade_to_mask, conj_dense, embed_vectors, gp,
                               product_table)


def test_generators_square_to_minus_one():
    for m in (1, 3, 5):
        for j in range(1, m + 1):
            e = Multivector.basis_vector(j, m)
            assert e * e == Multivector.scalar(-1, m)


def test_generators_anticommute_and_blade_order():
    m = 4
    for i in range(1, m + 1):
        for j in range(i + 1, m + 1):
            ei, ej = Multivector.basis_vector(i, m), Multivector.basis_vector(j, m)
            assert ei * ej == Multivector.blade((i, j), m)
            assert ej * ei == -Multivector.blade((i, j), m)


def test_pseudoscalar_square_m3():
    # (e1 e2 e3)^2 = +1 in R_{0,3}
    e123 = Multivector.blade((1, 2, 3), 3)
    assert e123 * e123 == Multivector.scalar(1, 3)


def _quat(a, b):
    w1, x1, y1, z1 = a
    w2, x2, y2, z2 = b
    return np.array([w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2,
                     w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2,
                     w1 * y2 - x1 * z2 + y1 * w2 + z1 * x2,
                     w1 * z2 + x1 * y2 - y1 * x2 + z1 * w2])


def test_m2_matches_quaternions():
    # R_{0,2} is the quaternions with e1 -> i, e2 -> j, e12 -> k; Hamilton's product is an independent oracle
    rng = np.random.default_rng(0)
    perm = [0, blade_to_mask((1,), 2), blade_to_mask((2,), 2), blade_to_mask((1, 2), 2)]
    for _ in range(50):
        qa, qb = rng.normal(size=4), rng.normal(size=4)
        a, b = np.zeros(4), np.zeros(4)
        a[perm], b[perm] = qa, qb
        np.testing.assert_allclose(gp(a, b)[perm], _quat(qa, qb), atol=1e-12)


@pytest.mark.parametrize("m", [3, 4])
@given(data=st.data())
def test_axioms_exact(m, data):
    a, b, c = (data.draw(multivectors(m)) for _ in range(3))
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert (a * b).conjugate() == b.conjugate() * a.conjugate()
    assert a.conjugate().conjugate() == a
    assert a.norm_squared() == (a * a.conjugate())[0]


@given(data=st.data())
def test_dense_product_matches_exact(data):
    m = 3
    a, b = data.draw(multivectors(m)), data.draw(multivectors(m))
    np.testing.assert_allclose(gp(a.to_dense(), b.to_dense()), (a * b).to_dense(), atol=1e-12)
    np.testing.assert_allclose(conj_dense(a.to_dense()), a.conjugate().to_dense(), atol=0)


def test_product_table_is_a_signed_permutation():
    sign, index = product_table(4)
    assert set(np.unique(sign)) <= {-1, 1}
    for a in range(16):
        assert sorted(index[a]) == list(range(16))


def test_vector_square_is_minus_norm():
    rng = np.random.default_rng(1)
    x = rng.normal(size=(10, 3))
    v = embed_vectors(x)
    sq = gp(v, v)
    np.testing.assert_allclose(sq[:, 0], -np.sum(x * x, axis=1))
    np.testing.assert_allclose(sq[:, 1:], 0, atol=1e-14)


def test_dimension_mismatch_raises():
    with pytest.raises(DimensionMismatchError):
        Multivector.scalar(1, 3) * Multivector.scalar(1, 4)


def test_json_roundtrip():
    a = Multivector(3, {0: 1, 5: -2}, exact=True)
    assert Multivector.from_json(a.to_json()) == a
