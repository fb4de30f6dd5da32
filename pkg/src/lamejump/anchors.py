"""
Registry of check anchors.

Every report record names one of these ids; the description says which
mathematical statement the record exercises.  The same table is rendered in
the README.
"""

from __future__ import annotations

ANCHORS: dict[str, str] = {
    "algebra.associativity": "geometric product is associative",
    "algebra.distributivity": "geometric product distributes over addition",
    "algebra.anti-involution": "conjugation reverses products and is an involution",
    "algebra.norm": "squared norm equals the scalar part of a times its conjugate",
    "dirac.factorization": "a structural Dirac operator squares to minus the Laplacian",
    "lame.null-solution": "explicit nonzero polynomial annihilated by the generalized Lame-Navier operator",
    "lame.boundary-vanishing": "the null solution vanishes on the ellipsoid boundary (exact divisibility)",
    "kernel.cauchy": "the Cauchy kernel is left monogenic away from the origin",
    "kernel.pair": "psi-Dirac of the pair kernel is the phi-Cauchy kernel",
    "kernel.e1": "the E1 kernel is harmonic away from the origin",
    "teodorescu.left-inverse": "phi-Dirac inverts the left Teodorescu transform",
    "teodorescu.pair-inverse": "the second-order Dirac pair inverts the pair Teodorescu transform",
    "teodorescu.dagger-inverse": "the Lame-Navier operator inverts the dagger Teodorescu transform",
    "teodorescu.commutation": "psi-Dirac of the infra transform equals the pair transform right-multiplied by psi-Dirac",
    "teodorescu.M-dagger": "the first-order factor M maps the dagger transform to the left Teodorescu transform",
    "teodorescu.convergence": "volume identity residuals decrease under grid refinement",
    "borel-pompeiu.interior": "boundary and volume terms reproduce f inside the domain",
    "borel-pompeiu.exterior": "the same assembly vanishes outside the domain",
    "borel-pompeiu.constant": "constant data reproduce exactly through the coefficient identity",
    "cauchy.representation": "boundary-only representation of null solutions",
    "jump.smooth.F": "the boundary-integral solution jumps by f across a smooth boundary",
    "jump.smooth.MF": "M applied to the solution jumps by f1 across a smooth boundary",
    "jump.smooth.decay": "the smooth-case solution and M of it decay at infinity",
    "jump.smooth.residual": "the smooth-case solution is a null solution off the boundary",
    "jump.fractal.hypothesis": "Holder exponent exceeds the estimated summability dimension over m",
    "jump.fractal.lp": "the volume density has a finite empirical L^p norm",
    "jump.fractal.F": "the extension-minus-volume solution jumps by the trace of the extension",
    "jump.fractal.MF": "M applied to the fractal-case solution jumps by M of the extension",
    "jump.fractal.decay": "the fractal-case solution decays away from the domain",
    "jump.fractal.residual": "the fractal-case solution is a null solution away from the boundary",
    "whitney.consistency": "sampled jet consistency constant of the first-order Whitney data",
    "whitney.growth": "second derivatives of the extension grow at most like dist^(nu-1)",
    "geometry.box-count": "box-counting slope of the boundary sample cloud",
    "geometry.box-count-monotone": "box counts are nonincreasing in the box size",
    "geometry.marcinkiewicz": "local distance-integrability exponent on each side of the boundary",
    "geometry.mesh-area": "panel weights sum to the analytic surface area",
    "geometry.grid-volume": "cell weights sum to the domain volume",
    "transform.evaluation": "direct quadrature of a named transform at given points",
}


def check_anchor(anchor: str) -> str:
    if anchor not in ANCHORS:
        raise KeyError(f"unknown anchor {anchor!r}")
    return anchor
