"""Compact-support RBF mesh deformation with multi-level greedy point selection."""

from .greedy import ConvergenceRecord, GreedyConfig, RbfLevel, greedy_level, run_multilevel
from .mesh_io import (
    DisplacementField,
    Mesh,
    MeshError,
    read_displacements,
    read_mesh,
    write_displacements,
    write_mesh,
)
from .pipeline import DeformationConfig, DeformationReport, deform
from .quality import QualityReport, orthogonality, signed_measures
from .rbf_kernel import (
    BasisFunction,
    ConditioningError,
    WeightSet,
    assemble_surface_matrix,
    eval_basis,
    eval_interpolant,
    solve_weights,
)
from .volume import DistanceIndex, WallFunction, build_distance_index, eval_wall_function, update_volume

__version__ = "0.1.0"
