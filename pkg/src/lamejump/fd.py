"""
Finite-difference stencils for multivector-valued fields.

Every helper takes ``func: (P, m) -> (P, 2**m)`` and evaluates the whole
stencil in one batched call, so quadrature-backed fields can share nodes
across the stencil.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from .clifford import embed_vectors, gp
from .polyfield import LameParams, StructuralSet

Field = Callable[[np.ndarray], np.ndarray]

_FIRST = {
    2: (np.array([-1.0, 1.0]), np.array([-0.5, 0.5])),
    4: (np.array([-2.0, -1.0, 1.0, 2.0]), np.array([1.0, -8.0, 8.0, -1.0]) / 12.0),
}
_SECOND = {
    2: (np.array([-1.0, 0.0, 1.0]), np.array([1.0, -2.0, 1.0])),
    4: (np.array([-2.0, -1.0, 0.0, 1.0, 2.0]), np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0),
}


def gradient(func: Field, x: np.ndarray, h: float, order: int = 2) -> np.ndarray:
    """Central-difference partials, shape ``(m, 2**m)``."""
    x = np.asarray(x, dtype=float)
    m = x.shape[0]
    offs, wts = _FIRST[order]
    pts = [x + o * h * np.eye(m)[j] for j in range(m) for o in offs]
    vals = func(np.array(pts)).reshape(m, len(offs), -1)
    return np.einsum("k,jkn->jn", wts, vals) / h


def hessian(func: Field, x: np.ndarray, h: float, order: int = 2) -> np.ndarray:
    """Central-difference second partials, shape ``(m, m, 2**m)``."""
    x = np.asarray(x, dtype=float)
    m = x.shape[0]
    I = np.eye(m)
    so, sw = _SECOND[order]
    fo, fw = _FIRST[order]
    pts = []
    for j in range(m):
        pts.extend(x + o * h * I[j] for o in so)
    pairs = [(i, j) for i in range(m) for j in range(i + 1, m)]
    for i, j in pairs:
        for a in fo:
            for b in fo:
                pts.append(x + a * h * I[i] + b * h * I[j])
    vals = func(np.array(pts))
    n = vals.shape[-1]
    H = np.zeros((m, m, n))
    pos = 0
    for j in range(m):
        H[j, j] = sw @ vals[pos : pos + len(so)] / h**2
        pos += len(so)
    W = np.outer(fw, fw).ravel()
    for i, j in pairs:
        block = vals[pos : pos + len(fo) ** 2]
        H[i, j] = H[j, i] = W @ block / h**2
        pos += len(fo) ** 2
    return H


def _frame_vectors(frame: StructuralSet, m: int) -> np.ndarray:
    return embed_vectors(np.eye(m), frame.array)


def dirac_left_fd(func: Field, x, phi: StructuralSet, h: float, order: int = 2) -> np.ndarray:
    G = gradient(func, x, h, order)
    return gp(_frame_vectors(phi, G.shape[0]), G).sum(axis=0)


def dirac_right_fd(func: Field, x, psi: StructuralSet, h: float, order: int = 2) -> np.ndarray:
    G = gradient(func, x, h, order)
    return gp(G, _frame_vectors(psi, G.shape[0])).sum(axis=0)


def laplacian_fd(func: Field, x, h: float, order: int = 2) -> np.ndarray:
    return np.trace(hessian(func, x, h, order), axis1=0, axis2=1)


def lame_terms_from_hessian(H: np.ndarray, phi: StructuralSet, psi: StructuralSet) -> tuple[np.ndarray, np.ndarray]:
    """``(phi_D F psi_D, phi_D psi_D F)`` assembled from second partials."""
    m = H.shape[0]
    P = _frame_vectors(phi, m)
    Q = _frame_vectors(psi, m)
    sandwich = np.zeros(H.shape[-1])
    harmonic = np.zeros(H.shape[-1])
    for i in range(m):
        for j in range(m):
            sandwich += gp(gp(P[i], H[i, j]), Q[j])
            harmonic += gp(gp(P[i], Q[j]), H[i, j])
    return sandwich, harmonic


def lame_fd(func: Field, x, phi, psi, lam: LameParams, h: float, order: int = 2) -> np.ndarray:
    sandwich, harmonic = lame_terms_from_hessian(hessian(func, x, h, order), phi, psi)
    return float(lam.alpha) * sandwich + float(lam.beta) * harmonic


def M_fd(func: Field, x, psi: StructuralSet, lam: LameParams, h: float, order: int = 2) -> np.ndarray:
    G = gradient(func, x, h, order)
    Q = _frame_vectors(psi, G.shape[0])
    return float(lam.alpha) * gp(G, Q).sum(axis=0) + float(lam.beta) * gp(Q, G).sum(axis=0)
