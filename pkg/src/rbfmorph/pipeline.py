"""Full deformation: greedy levels, per-level tapered volume updates, accumulation."""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

import numpy as np

from .greedy import GreedyConfig, run_multilevel, write_convergence_csv
from .mesh_io import DisplacementField, Mesh, MeshError
from .quality import QualityReport, orthogonality
from .rbf_kernel import BasisFunction
from .volume import WallFunction, build_distance_index, update_volume

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DeformationConfig:
    """Deformation parameters.

    The RBF support radius is ``radius * reference_length`` (e.g. radius=2 with
    the chord as reference length).  ``fixed_markers`` are pinned to zero
    displacement by adding their nodes to every level's surface set.
    """

    kind: str = "C2"
    radius: float = 2.0
    reference_length: float = 1.0
    tolerance: float = 0.1
    max_levels: int = 5
    max_points_per_level: int = 5000
    volume_k: float = 5.0
    fixed_markers: tuple = ()
    quality: bool = True
    snap_surface: bool = True

    def __post_init__(self):
        if not self.radius * self.reference_length > 0:
            raise ValueError("support radius must be positive")
        if not self.volume_k > 0:
            raise ValueError(f"volume reduction factor must be positive, got {self.volume_k}")
        object.__setattr__(self, "fixed_markers", tuple(self.fixed_markers))

    @property
    def basis(self) -> BasisFunction:
        return BasisFunction(self.kind, self.radius * self.reference_length)

    @property
    def greedy(self) -> GreedyConfig:
        return GreedyConfig(self.tolerance, self.max_levels, self.max_points_per_level, self.basis)


@dataclass(frozen=True)
class LevelSummary:
    level: int
    control_points: int
    achieved_error: float
    seconds: float
    support_distance: float
    touched_nodes: int
    capped: bool


@dataclass
class DeformationReport:
    levels: list = field(default_factory=list)  # LevelSummary
    records: list = field(default_factory=list)  # ConvergenceRecord
    surface_max_error: float = 0.0
    surface_mean_error: float = 0.0
    fixed_max_displacement: float = 0.0
    quality_before: QualityReport | None = None
    quality_after: QualityReport | None = None
    seconds: float = 0.0
    n_surface: int = 0
    n_nodes: int = 0

    @property
    def total_control_points(self) -> int:
        return sum(lv.control_points for lv in self.levels)

    @property
    def any_capped(self) -> bool:
        return any(lv.capped for lv in self.levels)

    def as_dict(self) -> dict:
        out = {
            "nodes": self.n_nodes,
            "surface_nodes": self.n_surface,
            "levels": len(self.levels),
            "total_control_points": self.total_control_points,
            "surface_max_error": self.surface_max_error,
            "surface_mean_error": self.surface_mean_error,
            "fixed_max_displacement": self.fixed_max_displacement,
            "any_capped": self.any_capped,
            "seconds": self.seconds,
        }
        for lv in self.levels:
            p = f"level_{lv.level}_"
            out[p + "control_points"] = lv.control_points
            out[p + "error"] = lv.achieved_error
            out[p + "support_distance"] = lv.support_distance
            out[p + "touched_nodes"] = lv.touched_nodes
            out[p + "seconds"] = lv.seconds
            out[p + "capped"] = lv.capped
        for tag, q in (("before", self.quality_before), ("after", self.quality_after)):
            if q is not None:
                for key, value in q.summary().items():
                    out[f"quality_{tag}_{key}"] = value
        return out

    def write(self, path, include_timing: bool = True) -> None:
        """Write ``key: value`` lines."""
        with open(path, "w") as fh:
            for key, value in self.as_dict().items():
                if not include_timing and key.endswith("seconds"):
                    continue
                if isinstance(value, float):
                    value = repr(value)
                fh.write(f"{key}: {value}\n")

    def write_convergence(self, path) -> int:
        return write_convergence_csv(self.records, path)


def deform(mesh: Mesh, displacement: DisplacementField, config: DeformationConfig | None = None):
    """Deform ``mesh`` so the displacement marker follows ``displacement``.

    Returns ``(deformed_mesh, report)``.  Volume nodes move by the sum over
    levels of the wall-function-tapered level interpolants, evaluated in the
    undeformed configuration.  With ``snap_surface`` the marker nodes are set
    to exactly their prescribed displacement and fixed-marker nodes to exactly
    zero; the report's surface error is always the interpolation error.
    """
    config = config or DeformationConfig()
    t0 = time.perf_counter()
    marker = displacement.patch
    surface = mesh.marker_nodes(marker)
    if not np.array_equal(surface, displacement.indices):
        raise MeshError(f"displacement field does not match the nodes of marker {marker!r}")
    values = displacement.values
    if values.shape[1] != mesh.dim:
        raise MeshError(f"displacement has {values.shape[1]} components, mesh is {mesh.dim}D")

    fixed = []
    on_surface = set(surface.tolist())
    for name in config.fixed_markers:
        if name == marker:
            raise MeshError(f"marker {name!r} cannot be both deforming and fixed")
        for i in mesh.marker_nodes(name).tolist():
            if i not in on_surface:
                on_surface.add(i)
                fixed.append(i)
    fixed = np.array(fixed, dtype=np.int64)
    constrained = np.concatenate([surface, fixed])
    target = np.concatenate([values, np.zeros((len(fixed), mesh.dim))])

    basis = config.basis
    positions = mesh.nodes[constrained]
    levels, records = run_multilevel(positions, target, config.greedy)

    index = build_distance_index(mesh, marker)
    update = np.zeros_like(mesh.nodes)
    report = DeformationReport(records=records, n_surface=len(surface), n_nodes=mesh.n_nodes)
    for lv in levels:
        wf = WallFunction.for_target(config.volume_k, lv.target)
        touched, delta = update_volume(mesh, lv, index, wf, basis)
        update[touched] += delta
        report.levels.append(
            LevelSummary(lv.level, lv.n_control, lv.achieved_error, lv.elapsed,
                         wf.support_distance, len(index.within(wf.support_distance)),
                         lv.hit_limit)
        )
        logger.info("level %d: %d control points, error %.3e, %d nodes updated",
                    lv.level, lv.n_control, lv.achieved_error, len(touched))

    scale = float(np.linalg.norm(target, axis=1).max()) if len(target) else 0.0
    err = np.linalg.norm(levels[-1].residual, axis=1)
    if scale > 0:
        report.surface_max_error = float(err.max()) / scale
        report.surface_mean_error = float(err.mean()) / scale

    if config.snap_surface:
        update[surface] = values
        update[fixed] = 0.0
    if len(fixed):
        report.fixed_max_displacement = float(np.abs(update[fixed]).max())

    deformed = mesh.with_nodes(mesh.nodes + update)
    if config.quality:
        report.quality_before = orthogonality(mesh)
        report.quality_after = orthogonality(deformed)
    report.seconds = time.perf_counter() - t0
    return deformed, report
