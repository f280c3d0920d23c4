"""Stokes flow on overlapping non-matching triangle meshes, coupled with
Nitsche's method and stabilized on the overlap region."""

from .assembly import LinearSystem, StokesProblem, assemble_system
from .estimator import OverlappingMeshStokes
from .geometry import CutGeometry, build_cut_geometry, classify_cells, clip_triangle_triangle
from .mesh import MeshTransform, SimplicialMesh, build_structured_square_mesh, transform_mesh
from .linalg import condition_number, generalized_min_singular, solve

__all__ = [
    "CutGeometry",
    "LinearSystem",
    "MeshTransform",
    "OverlappingMeshStokes",
    "SimplicialMesh",
    "StokesProblem",
    "assemble_system",
    "build_cut_geometry",
    "build_structured_square_mesh",
    "classify_cells",
    "clip_triangle_triangle",
    "condition_number",
    "generalized_min_singular",
    "solve",
    "transform_mesh",
]

__version__ = "0.1.0"
