"""Wall-distance volume reduction: only nodes near the moving surface are updated."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .greedy import RbfLevel
from .mesh_io import Mesh, MeshError
from .rbf_kernel import BasisFunction, evaluate


@dataclass(frozen=True)
class WallFunction:
    """Linear taper psi(xi) = 1 - xi on [0, 1), zero beyond; xi = d / D."""

    reduction_factor: float = 5.0
    support_distance: float = 0.0

    def __post_init__(self):
        if not self.reduction_factor > 0:
            raise ValueError(f"reduction factor must be positive, got {self.reduction_factor}")
        if self.support_distance < 0:
            raise ValueError(f"support distance must be >= 0, got {self.support_distance}")

    @classmethod
    def for_target(cls, reduction_factor: float, target) -> "WallFunction":
        """D = k * (largest displacement magnitude in ``target``)."""
        target = np.asarray(target, dtype=float)
        peak = float(np.linalg.norm(target, axis=1).max()) if len(target) else 0.0
        return cls(reduction_factor, reduction_factor * peak)

    def __call__(self, d):
        return eval_wall_function(self, d)


def eval_wall_function(wf: WallFunction, d):
    d = np.asarray(d, dtype=float)
    D = wf.support_distance
    if D == 0.0:
        out = np.where(d == 0.0, 1.0, 0.0)
    else:
        out = np.where(d < D, 1.0 - d / D, 0.0)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True, eq=False)
class DistanceIndex:
    """Distance from every mesh node to the nearest node of one marker."""

    distance: np.ndarray
    nearest: np.ndarray

    def within(self, D: float) -> np.ndarray:
        """Indices of nodes with distance strictly below ``D``."""
        return np.flatnonzero(self.distance < D)


def build_distance_index(mesh: Mesh, marker: str) -> DistanceIndex:
    """Exact nearest-surface-node distances via a k-d tree over the marker nodes."""
    surface = mesh.marker_nodes(marker)
    if len(surface) == 0:
        raise MeshError(f"marker {marker!r} has no nodes")
    tree = cKDTree(mesh.nodes[surface])
    dist, near = tree.query(mesh.nodes, k=1)
    dist = np.asarray(dist, dtype=float)
    dist[surface] = 0.0
    near = surface[np.asarray(near)]
    near[surface] = surface
    dist.setflags(write=False)
    near.setflags(write=False)
    return DistanceIndex(dist, near)


def update_volume(mesh: Mesh, level: RbfLevel, index: DistanceIndex, wf: WallFunction,
                  basis: BasisFunction, positions=None):
    """Tapered interpolant of one level on nodes with wall distance below D.

    Returns ``(node_indices, displacements)``; nodes not listed are untouched.
    ``positions`` defaults to the mesh coordinates (the undeformed snapshot).
    """
    nodes = mesh.nodes if positions is None else positions
    touched = index.within(wf.support_distance)
    if len(touched) == 0 or not np.any(level.weights.alpha):
        return np.empty(0, dtype=np.int64), np.empty((0, mesh.dim))
    psi = eval_wall_function(wf, index.distance[touched])
    values = evaluate(level.weights, basis, nodes[touched]) * psi[:, None]
    return touched, values
