"""
Checks shared by the command line and the test suite.

Exact checks return failure counts (zero means the identity held with
rational equality); numerical checks return arrays of relative errors.
"""

from __future__ import annotations

import random
from fractions import Fraction

import numpy as np

from .clifford import Multivector, gp
from .fd import _frame_vectors, dirac_left_fd, dirac_right_fd, gradient, hessian, lame_terms_from_hessian, laplacian_fd
from .kernels import cauchy_kernel, e1_kernel, pair_kernel
from .polyfield import (Counterexample, LameParams, PolyField, StructuralSet, apply_lame, dirac_left,
                        dirichlet_counterexample, laplacian, random_polyfield, vanishes_on)
from .transforms import DensityField, field_at


def random_multivector(m: int, rng: random.Random, max_num: int = 9, density: float = 0.5) -> Multivector:
    """Sparse multivector with small rational coefficients."""
    terms = {}
    for mask in range(1 << m):
        if rng.random() < density:
            terms[mask] = Fraction(rng.randint(-max_num, max_num), rng.randint(1, max_num))
    return Multivector(m, terms, exact=True)


def algebra_axioms(m: int, n: int, seed: int = 0) -> dict[str, int]:
    """Failure counts of the algebra axioms over ``n`` random exact triples."""
    rng = random.Random(seed)
    fails = {"associativity": 0, "distributivity": 0, "anti_involution": 0, "involution": 0, "norm": 0}
    for _ in range(n):
        a, b, c = (random_multivector(m, rng) for _ in range(3))
        ab = a * b
        fails["associativity"] += (ab * c) != (a * (b * c))
        fails["distributivity"] += (a * (b + c)) != (ab + a * c) or ((a + b) * c) != (a * c + b * c)
        fails["anti_involution"] += ab.conjugate() != b.conjugate() * a.conjugate()
        fails["involution"] += a.conjugate().conjugate() != a
        fails["norm"] += a.norm_squared() != (a * a.conjugate())[0]
    return fails


def factorization_failures(n: int, dims=(3, 4), max_degree: int = 4, seed: int = 0) -> dict:
    """Count of ``(phi, P)`` pairs where ``phi_D phi_D P + Delta P`` is not identically zero."""
    rng = random.Random(seed)
    fails, cases = 0, []
    for k in range(n):
        m = dims[k % len(dims)]
        phi = StructuralSet.random(m, rng)
        P = random_polyfield(m, rng.randint(0, max_degree), rng)
        ok = (dirac_left(phi, dirac_left(phi, P)) + laplacian(P)).is_zero()
        fails += not ok
        cases.append({"m": m, "degree": P.degree, "ok": ok})
    return {"failures": fails, "cases": cases}


def counterexample_check(ce: Counterexample | None = None) -> dict:
    """Exact null check of the generalized operator and boundary divisibility."""
    ce = ce or dirichlet_counterexample()
    L = apply_lame(ce.phi, ce.psi, ce.lam, ce.field)
    return {"lame_is_zero": L.is_zero(), "n_terms": len(L.terms), "vanishes_on_surface": vanishes_on(ce.field, ce.surface)}


def _rel(v: np.ndarray, scale: float) -> float:
    return float(np.linalg.norm(v) / scale) if scale > 0 else float(np.linalg.norm(v))


def kernel_identity_errors(n_points: int = 20, n_frames: int = 5, m: int = 3, seed: int = 0,
                           h: float = 1e-3, order: int = 4, r_range=(0.5, 2.0)) -> dict[str, np.ndarray]:
    """Finite-difference residuals of the kernel relations at random points.

    ``pair``: ``psi_D K_{phi,psi} = K_phi`` relative to ``|K_phi|``.
    ``cauchy``: ``phi_D K_phi = 0`` relative to ``sum_j |phi_j d_j K_phi|``.
    ``e1``: ``Delta E_1 = 0`` relative to ``sum_j |d_jj E_1|``.
    """
    rng = np.random.default_rng(seed)
    srng = random.Random(seed)
    out = {"pair": [], "cauchy": [], "e1": []}
    e1 = lambda X: e1_kernel(X)[:, None]  # noqa: E731
    for _ in range(n_frames):
        phi, psi = StructuralSet.random(m, srng), StructuralSet.random(m, srng)
        kp = lambda X: pair_kernel(X, phi, psi)  # noqa: E731
        kc = lambda X: cauchy_kernel(X, phi)  # noqa: E731
        u = rng.normal(size=(n_points, m))
        X = u / np.linalg.norm(u, axis=1, keepdims=True) * rng.uniform(*r_range, size=(n_points, 1))
        for x in X:
            K = cauchy_kernel(x[None], phi)[0]
            out["pair"].append(_rel(dirac_left_fd(kp, x, psi, h, order) - K, float(np.linalg.norm(K))))
            G = gradient(kc, x, h, order)
            terms = gp(_frame_vectors(phi, m), G)
            out["cauchy"].append(_rel(terms.sum(axis=0), float(np.linalg.norm(terms, axis=-1).sum())))
            H = hessian(e1, x, h, order)
            out["e1"].append(_rel(np.trace(H), float(np.abs(np.diagonal(H[..., 0])).sum())))
    return {k: np.array(v) for k, v in out.items()}


TEODORESCU_IDENTITIES = ("left", "pair", "dagger", "commutation", "M_dagger")


def teodorescu_identity_errors(grid, f: PolyField, phi: StructuralSet, psi: StructuralSet, lam: LameParams,
                               points: np.ndarray, h: float = 1e-3, order: int = 2) -> dict[str, np.ndarray]:
    """Relative finite-difference residuals of the volume-transform identities.

    ``left``: ``phi_D T^l f = f``; ``pair``: ``phi_D psi_D T_pair f = f``;
    ``dagger``: ``L T^dagger f = f``; ``commutation``: ``psi_D T_infra f = (T_pair f) psi_D``;
    ``M_dagger``: ``M T^dagger f = T^l f``.
    """
    m = f.dim
    dens = DensityField.from_poly(f)
    P, Q = _frame_vectors(phi, m), _frame_vectors(psi, m)
    a, b = float(lam.alpha), float(lam.beta)
    n = 1 << m
    out = {k: [] for k in TEODORESCU_IDENTITIES}
    for x in np.atleast_2d(points):
        F = field_at(("tl", "pair-t", "infra-t", "dagger-t"), grid, dens, phi, psi, lam)
        H = hessian(F, x, h, order).reshape(m, m, 4, n)
        G = gradient(F, x, h, order).reshape(m, 4, n)
        fx = f.evaluate(x[None])[0]
        nf = float(np.linalg.norm(fx))
        out["left"].append(_rel(gp(P, G[:, 0]).sum(axis=0) - fx, nf))
        pp = sum(gp(gp(P[i], Q[j]), H[i, j, 1]) for i in range(m) for j in range(m))
        out["pair"].append(_rel(pp - fx, nf))
        sw, hm = lame_terms_from_hessian(H[:, :, 3], phi, psi)
        out["dagger"].append(_rel(a * sw + b * hm - fx, nf))
        lhs = gp(Q, G[:, 2]).sum(axis=0)
        out["commutation"].append(_rel(lhs - gp(G[:, 1], Q).sum(axis=0), float(np.linalg.norm(lhs))))
        Mv = a * gp(G[:, 3], Q).sum(axis=0) + b * gp(Q, G[:, 3]).sum(axis=0)
        tl = F(x[None]).reshape(4, n)[0]
        out["M_dagger"].append(_rel(Mv - tl, float(np.linalg.norm(tl))))
    return {k: np.array(v) for k, v in out.items()}


def interior_points(n: int, radius: float, m: int = 3, seed: int = 0) -> np.ndarray:
    """Seeded uniform points in the ball of the given radius."""
    rng = np.random.default_rng(seed)
    u = rng.normal(size=(n, m))
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    return u * (radius * rng.random((n, 1)) ** (1 / m))


def empirical_order(hs, errors) -> float:
    """Log-log slope of error against grid spacing."""
    return float(np.polyfit(np.log(np.asarray(hs, float)), np.log(np.asarray(errors, float)), 1)[0])


__all__ = [
    "random_multivector", "algebra_axioms", "factorization_failures", "counterexample_check",
    "kernel_identity_errors", "teodorescu_identity_errors", "TEODORESCU_IDENTITIES", "interior_points",
    "empirical_order", "dirac_right_fd", "laplacian_fd",
]
