from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lamejump.clifford import embed_vectors
from lamejump.fd import dirac_left_fd, gradient
from lamejump.kernels import SingularityError, cauchy_kernel, e1_kernel, pair_kernel, sigma
from lamejump.polyfield import StructuralSet
from lamejump.verify import kernel_identity_errors

PHI = StructuralSet.from_rows([["0", "-1", "0"], ["3/5", "0", "4/5"], ["-4/5", "0", "3/5"]])
PSI = StructuralSet.from_rows([["1", "0", "0"], ["0", "0", "1"], ["0", "-1", "0"]])

points = st.lists(st.floats(-2, 2), min_size=3, max_size=3).filter(lambda v: 0.3 < np.linalg.norm(v) < 3)


def test_sigma_values():
    assert sigma(3) == pytest.approx(4 * math.pi)
    assert sigma(4) == pytest.approx(2 * math.pi ** 2)
    assert sigma(2) == pytest.approx(2 * math.pi)


def test_cauchy_kernel_on_axis():
    K = cauchy_kernel(np.array([[2.0, 0, 0]]))[0]
    expected = np.zeros(8)
    expected[1] = -2.0 / (4 * math.pi * 8)
    np.testing.assert_allclose(K, expected, atol=1e-15)


@given(x=points, t=st.floats(0.5, 3))
def test_homogeneity(x, t):
    x = np.array([x])
    np.testing.assert_allclose(cauchy_kernel(t * x, PHI), t ** -2 * cauchy_kernel(x, PHI), rtol=1e-10, atol=1e-14)
    np.testing.assert_allclose(e1_kernel(t * x), e1_kernel(x) / t, rtol=1e-12)
    np.testing.assert_allclose(pair_kernel(t * x, PHI, PSI), pair_kernel(x, PHI, PSI) / t, rtol=1e-10, atol=1e-14)


@given(x=points)
def test_cauchy_is_dirac_of_e1(x):
    # K_phi = phi_D E_1, an independent route to the Cauchy kernel
    x = np.array(x)
    lhs = dirac_left_fd(lambda P: np.concatenate([e1_kernel(P)[:, None], np.zeros((len(P), 7))], axis=1),
                        x, PHI, 1e-3, 4)
    np.testing.assert_allclose(lhs, cauchy_kernel(x[None], PHI)[0], atol=1e-8)


@given(x=points)
def test_frame_covariance(x):
    x = np.array(x)
    K = cauchy_kernel(x[None], PHI)[0]
    r = np.linalg.norm(x)
    np.testing.assert_allclose(K, -embed_vectors(x, PHI.array) / (sigma(3) * r ** 3), atol=1e-14)


def test_kernel_identities_small_batch():
    err = kernel_identity_errors(n_points=4, n_frames=2, seed=3)
    assert err["pair"].max() < 1e-5 and err["cauchy"].max() < 1e-5 and err["e1"].max() < 1e-4


def test_gradient_of_e1():
    x = np.array([0.3, -0.7, 1.1])
    G = gradient(lambda P: e1_kernel(P)[:, None], x, 1e-3, 4)[:, 0]
    np.testing.assert_allclose(G, -x / (4 * math.pi * np.linalg.norm(x) ** 3), rtol=1e-8)


def test_origin_raises():
    with pytest.raises(SingularityError):
        cauchy_kernel(np.zeros((1, 3)))
    with pytest.raises(ValueError):
        e1_kernel(np.ones((1, 2)))
