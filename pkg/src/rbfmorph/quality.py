"""Mesh quality: face orthogonality angle and signed element measures.

The orthogonality angle of a face is the angle between the line joining the
two adjacent cell centroids and the face itself, i.e. ``90 - angle(normal,
centroid line)``.  90 degrees is ideal.  An element's score is the minimum over
its internal faces; elements with no internal face use the lines from their
centroid to their boundary-face centroids.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mesh_io import Mesh

# outward-oriented faces, VTK node ordering
FACES = {
    "triangle": ((0, 1), (1, 2), (2, 0)),
    "quadrilateral": ((0, 1), (1, 2), (2, 3), (3, 0)),
    "tetrahedron": ((0, 2, 1), (0, 1, 3), (1, 2, 3), (0, 3, 2)),
    "hexahedron": (
        (0, 3, 2, 1), (4, 5, 6, 7), (0, 1, 5, 4),
        (1, 2, 6, 5), (2, 3, 7, 6), (3, 0, 4, 7),
    ),
    "prism": ((0, 1, 2), (3, 5, 4), (0, 3, 4, 1), (1, 4, 5, 2), (2, 5, 3, 0)),
    "pyramid": ((0, 3, 2, 1), (0, 1, 4), (1, 2, 4), (2, 3, 4), (3, 0, 4)),
}

DEGENERATE = 1e-14


@dataclass(frozen=True, eq=False)
class QualityReport:
    orthogonality: np.ndarray  # degrees, per element
    measures: np.ndarray  # signed area / volume, per element
    degenerate: np.ndarray  # bool, element touches a zero-measure face

    @property
    def min_orthogonality(self) -> float:
        return float(self.orthogonality.min()) if len(self.orthogonality) else 90.0

    @property
    def mean_orthogonality(self) -> float:
        return float(self.orthogonality.mean()) if len(self.orthogonality) else 90.0

    @property
    def inverted_count(self) -> int:
        return int(np.count_nonzero(self.measures <= 0.0))

    def summary(self) -> dict:
        return {
            "elements": len(self.measures),
            "min_orthogonality_deg": self.min_orthogonality,
            "mean_orthogonality_deg": self.mean_orthogonality,
            "inverted_elements": self.inverted_count,
            "degenerate_elements": int(self.degenerate.sum()),
            "min_measure": float(self.measures.min()) if len(self.measures) else 0.0,
        }


def _face_vector(pts: np.ndarray) -> np.ndarray:
    """Area-weighted normal of one face (edge normal in 2D)."""
    if len(pts) == 2:
        dx, dy = pts[1] - pts[0]
        return np.array([dy, -dx])
    if len(pts) == 3:
        return 0.5 * np.cross(pts[1] - pts[0], pts[2] - pts[0])
    # quad: average of the two triangle normals, scaled to the quad area
    n1 = 0.5 * np.cross(pts[1] - pts[0], pts[2] - pts[0])
    n2 = 0.5 * np.cross(pts[2] - pts[0], pts[3] - pts[0])
    return n1 + n2


def _signed_measure(kind: str, pts: np.ndarray) -> float:
    if kind in ("triangle", "quadrilateral"):
        x, y = pts[:, 0], pts[:, 1]
        area = 0.0
        for a, b, c in ((0, 1, 2), (0, 2, 3))[: len(pts) - 2]:
            area += 0.5 * ((x[b] - x[a]) * (y[c] - y[a]) - (x[c] - x[a]) * (y[b] - y[a]))
        return area
    if kind == "tetrahedron":
        return float(np.linalg.det(pts[1:] - pts[0])) / 6.0
    # fan of tets from the vertex centroid over each outward triangle
    centre = pts.mean(axis=0)
    vol = 0.0
    for face in FACES[kind]:
        tris = [face] if len(face) == 3 else [(face[0], face[1], face[2]), (face[0], face[2], face[3])]
        for a, b, c in tris:
            vol += np.linalg.det(np.stack([pts[a], pts[b], pts[c]]) - centre) / 6.0
    return float(vol)


def signed_measures(mesh: Mesh) -> np.ndarray:
    """Signed area (2D) or volume (3D) of every element; <= 0 means inverted."""
    nodes = mesh.nodes
    return np.array(
        [_signed_measure(kind, nodes[list(conn)]) for kind, conn in mesh.elements], dtype=float
    )


def orthogonality(mesh: Mesh) -> QualityReport:
    nodes = mesh.nodes
    n_elem = len(mesh.elements)
    centroids = np.empty((n_elem, mesh.dim))
    owners = {}
    faces = []  # (element, face_key, face_nodes)
    for e, (kind, conn) in enumerate(mesh.elements):
        pts = nodes[list(conn)]
        centroids[e] = pts.mean(axis=0)
        for local in FACES[kind]:
            fnodes = tuple(conn[i] for i in local)
            key = frozenset(fnodes)
            owners.setdefault(key, []).append(e)
            faces.append((e, key, fnodes))

    internal = np.full(n_elem, 90.0)
    has_internal = np.zeros(n_elem, dtype=bool)
    boundary = np.full(n_elem, 90.0)
    degenerate = np.zeros(n_elem, dtype=bool)
    done = set()
    for e, key, fnodes in faces:
        pts = nodes[list(fnodes)]
        normal = _face_vector(pts)
        area = np.linalg.norm(normal)
        scale = max(np.ptp(pts, axis=0).max(), 1e-300) ** (mesh.dim - 1)
        shared = owners[key]
        if area <= DEGENERATE * scale:
            for o in shared:
                degenerate[o] = True
            continue
        if len(shared) >= 2:
            if key in done:
                continue
            done.add(key)
            a, b = shared[0], shared[1]
            line = centroids[b] - centroids[a]
            angle = _angle(normal / area, line)
            for o in (a, b):
                has_internal[o] = True
                internal[o] = min(internal[o], angle)
        else:
            line = pts.mean(axis=0) - centroids[e]
            boundary[e] = min(boundary[e], _angle(normal / area, line))

    score = np.where(has_internal, internal, boundary)
    score[degenerate] = 0.0
    return QualityReport(score, signed_measures(mesh), degenerate)


def _angle(unit_normal, line) -> float:
    # atan2 keeps full precision near 90 degrees, where arcsin does not
    if not np.any(line):
        return 0.0
    along = abs(float(unit_normal @ line))
    across = np.linalg.norm(np.cross(unit_normal, line)) if len(line) == 3 else abs(
        float(unit_normal[0] * line[1] - unit_normal[1] * line[0])
    )
    return float(np.degrees(np.arctan2(along, across)))
