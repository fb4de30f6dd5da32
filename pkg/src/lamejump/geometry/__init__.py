"""Domains, boundary meshes, volume grids and boundary-geometry estimators."""

from .domains import (Ball, Domain, Ellipsoid, FractalDomain, GeometryError, HalfSpace, KochPrism,
                      build_koch_prism, koch_polygon)
from .estimators import (MarcinkiewiczReport, SideEstimate, SummabilityReport, box_counts,
                         estimate_d_summability, estimate_marcinkiewicz, sample_spacing)
from .surfaces import (BoundaryMesh, NearSingularityError, icosphere, mesh_ellipsoid, mesh_for_domain,
                       mesh_sphere, sphere_rule)
from .volume import VolumeGrid, grid_domain

__all__ = [
    "Ball", "Domain", "Ellipsoid", "FractalDomain", "GeometryError", "HalfSpace", "KochPrism",
    "build_koch_prism", "koch_polygon", "MarcinkiewiczReport", "SideEstimate", "SummabilityReport",
    "box_counts", "estimate_d_summability", "estimate_marcinkiewicz", "sample_spacing", "BoundaryMesh",
    "NearSingularityError", "icosphere", "mesh_ellipsoid", "mesh_for_domain", "mesh_sphere",
    "sphere_rule", "VolumeGrid", "grid_domain",
]
