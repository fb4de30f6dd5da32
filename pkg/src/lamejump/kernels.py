"""
Fundamental solutions used by the transforms (dimension m >= 3).

All kernels are vectorized over leading axes: ``x`` has shape ``(..., m)``
and multivector-valued results have shape ``(..., 2**m)``.
"""

from __future__ import annotations

import math

import numpy as np

from .clifford import embed_vectors, gp
from .polyfield import StructuralSet


class SingularityError(ValueError):
    pass


def sigma(m: int) -> float:
    """Surface area of the unit sphere S^{m-1}: ``2 pi^{m/2} / Gamma(m/2)``."""
    if m < 2:
        raise ValueError(f"sigma needs m >= 2, got {m}")
    return 2.0 * math.pi ** (m / 2) / math.gamma(m / 2)


def _radius(x: np.ndarray) -> tuple[np.ndarray, int]:
    x = np.asarray(x, dtype=float)
    m = x.shape[-1]
    if m < 3:
        raise ValueError(f"kernels are defined for m > 2, got m={m}")
    r = np.linalg.norm(x, axis=-1)
    if np.any(r == 0.0):
        raise SingularityError("kernel evaluated at the origin")
    return r, m


def e1_kernel(x: np.ndarray) -> np.ndarray:
    """Fundamental solution of ``-Delta``: ``1 / ((m-2) sigma_m |x|^{m-2})``."""
    r, m = _radius(x)
    return 1.0 / ((m - 2) * sigma(m) * r ** (m - 2))


def _frame_array(frame: StructuralSet | np.ndarray | None, m: int) -> np.ndarray:
    if frame is None:
        return np.eye(m)
    return frame.array if isinstance(frame, StructuralSet) else np.asarray(frame, dtype=float)


def cauchy_kernel(x: np.ndarray, phi: StructuralSet | np.ndarray | None = None) -> np.ndarray:
    """Clifford-Cauchy kernel ``K_phi(x) = -x_phi / (sigma_m |x|^m)`` (pure grade 1)."""
    r, m = _radius(x)
    xphi = embed_vectors(x, _frame_array(phi, m))
    return -xphi / (sigma(m) * r[..., None] ** m)


def frame_pair_sum(phi, psi, m: int) -> np.ndarray:
    """Dense ``sum_j psi_j phi_j`` (grades 0 and 2)."""
    P = embed_vectors(np.eye(m), _frame_array(phi, m))
    Q = embed_vectors(np.eye(m), _frame_array(psi, m))
    return gp(Q, P).sum(axis=0)


def pair_kernel(x: np.ndarray, phi=None, psi=None) -> np.ndarray:
    """Fundamental solution of ``phi_D psi_D (.)``.

    ``[(2-m)|x|^{-m} x_psi x_phi + |x|^{2-m} sum_j psi_j phi_j] / (2 sigma_m (2-m))``
    """
    r, m = _radius(x)
    xphi = embed_vectors(x, _frame_array(phi, m))
    xpsi = embed_vectors(x, _frame_array(psi, m))
    rr = r[..., None]
    num = (2 - m) * rr ** (-m) * gp(xpsi, xphi) + rr ** (2 - m) * frame_pair_sum(phi, psi, m)
    return num / (2 * sigma(m) * (2 - m))
