"""
Clifford-analytic tools for generalized Lame-Navier systems.

Exact multivector and polynomial-field algebra, fundamental solutions,
boundary and volume transforms, jump-problem solvers for smooth and
fractal boundaries, geometry estimators, and the ``lamejump`` command line.
"""

from .clifford import Multivector, conjugate, embed_vectors, gp, product_table
from .jump import (BlowUpError, JumpProblemSpec, LadderParams, SolutionField, borel_pompeiu_reconstruct,
                   cauchy_represent, decay_check, pde_residual, solve_jump_fractal, solve_jump_smooth,
                   verify_jump)
from .kernels import cauchy_kernel, e1_kernel, pair_kernel, sigma
from .polyfield import (Counterexample, LameParams, PolyField, StructuralSet, apply_lame, apply_M, dirac_left,
                        dirac_right, dirichlet_counterexample, laplacian, random_polyfield)
from .transforms import KINDS, BoundaryOptions, DensityField, TransformResult, VolumeOptions, transform
from .whitney import ExtendedField, WhitneyJet, whitney_extend

__all__ = [
    "Multivector", "conjugate", "embed_vectors", "gp", "product_table",
    "BlowUpError", "JumpProblemSpec", "LadderParams", "SolutionField", "borel_pompeiu_reconstruct",
    "cauchy_represent", "decay_check", "pde_residual", "solve_jump_fractal", "solve_jump_smooth", "verify_jump",
    "cauchy_kernel", "e1_kernel", "pair_kernel", "sigma",
    "Counterexample", "LameParams", "PolyField", "StructuralSet", "apply_lame", "apply_M", "dirac_left",
    "dirac_right", "dirichlet_counterexample", "laplacian", "random_polyfield",
    "KINDS", "BoundaryOptions", "DensityField", "TransformResult", "VolumeOptions", "transform",
    "ExtendedField", "WhitneyJet", "whitney_extend",
]
