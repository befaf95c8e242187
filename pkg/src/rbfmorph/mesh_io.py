"""Mesh model and file I/O.

The native format is an ASCII subset of the SU2 mesh format::

    NDIME= 2
    NELEM= 2
    5 0 1 2 0
    5 0 2 3 1
    NPOIN= 4
    0.0 0.0 0
    ...
    NMARK= 1
    MARKER_TAG= wall
    MARKER_ELEMS= 2
    3 0 1
    3 1 2

Element lines start with the VTK cell type id, followed by node indices and an
optional trailing element index.  VTK legacy ASCII output is write-only.
"""

from __future__ import annotations

import logging
import math
import os
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from scipy.spatial import cKDTree

logger = logging.getLogger(__name__)

# kind name -> (vtk id, node count)
ELEMENT_KINDS = {
    "line": (3, 2),
    "triangle": (5, 3),
    "quadrilateral": (9, 4),
    "tetrahedron": (10, 4),
    "hexahedron": (12, 8),
    "prism": (13, 6),
    "pyramid": (14, 5),
}
VTK_ID_TO_KIND = {vtk_id: kind for kind, (vtk_id, _) in ELEMENT_KINDS.items()}
SURFACE_KINDS = {2: ("line",), 3: ("triangle", "quadrilateral")}
VOLUME_KINDS = {
    2: ("triangle", "quadrilateral"),
    3: ("tetrahedron", "hexahedron", "prism", "pyramid"),
}

DUPLICATE_TOL = 1e-12


class MeshError(ValueError):
    """Raised for invalid meshes, displacement files, and parse failures."""

    def __init__(self, message, path=None, lineno=None):
        self.path = path
        self.lineno = lineno
        where = ""
        if path is not None and lineno is not None:
            where = f"{path}:{lineno}: "
        elif lineno is not None:
            where = f"line {lineno}: "
        super().__init__(where + message)


Element = tuple  # (kind: str, nodes: tuple[int, ...])


def _freeze(array):
    array = np.array(array, dtype=float)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class Mesh:
    """Unstructured mesh with named boundary markers.

    ``nodes`` is an ``(N_v, dim)`` float array; ``elements`` holds the volume
    elements as ``(kind, node_tuple)`` pairs; ``markers`` maps a boundary name
    to its boundary elements (lines in 2D, triangles/quads in 3D).
    """

    dim: int
    nodes: np.ndarray
    elements: tuple
    markers: Mapping[str, tuple] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "nodes", _freeze(self.nodes))
        object.__setattr__(
            self, "elements", tuple((k, tuple(int(i) for i in n)) for k, n in self.elements)
        )
        object.__setattr__(
            self,
            "markers",
            {
                name: tuple((k, tuple(int(i) for i in n)) for k, n in elems)
                for name, elems in self.markers.items()
            },
        )
        validate_mesh(self)

    @property
    def n_nodes(self) -> int:
        return self.nodes.shape[0]

    def marker_nodes(self, name: str) -> np.ndarray:
        """Unique node indices of a marker, in order of first appearance."""
        if name not in self.markers:
            raise MeshError(f"marker {name!r} not found (have {sorted(self.markers)})")
        seen = {}
        for _, nodes in self.markers[name]:
            for i in nodes:
                seen.setdefault(i, None)
        return np.fromiter(seen, dtype=np.int64, count=len(seen))

    def with_nodes(self, nodes) -> "Mesh":
        """Copy of this mesh with new coordinates and identical connectivity."""
        nodes = np.asarray(nodes, dtype=float)
        if nodes.shape != self.nodes.shape:
            raise MeshError(f"node array shape {nodes.shape} != {self.nodes.shape}")
        return Mesh(self.dim, nodes, self.elements, self.markers)

    def bounding_diagonal(self) -> float:
        if self.n_nodes == 0:
            return 0.0
        return float(np.linalg.norm(self.nodes.max(axis=0) - self.nodes.min(axis=0)))

    def __eq__(self, other):
        if not isinstance(other, Mesh):
            return NotImplemented
        return (
            self.dim == other.dim
            and self.nodes.shape == other.nodes.shape
            and np.array_equal(self.nodes, other.nodes)
            and self.elements == other.elements
            and self.markers == other.markers
        )

    __hash__ = None


def find_duplicate_nodes(nodes: np.ndarray):
    """Return ``(i, j)`` pairs (i < j) of nodes closer than 1e-12 of the bbox diagonal."""
    if len(nodes) < 2:
        return []
    diag = float(np.linalg.norm(nodes.max(axis=0) - nodes.min(axis=0)))
    tol = DUPLICATE_TOL * diag if diag > 0 else 0.0
    tree = cKDTree(nodes)
    return sorted(tree.query_pairs(r=tol, eps=0.0)) if tol > 0 else [
        (0, j) for j in range(1, len(nodes))
    ]


def validate_mesh(mesh: Mesh) -> None:
    if mesh.dim not in (2, 3):
        raise MeshError(f"dimension must be 2 or 3, got {mesh.dim}")
    if mesh.nodes.ndim != 2 or mesh.nodes.shape[1] != mesh.dim:
        raise MeshError(f"nodes must have shape (N, {mesh.dim}), got {mesh.nodes.shape}")
    if not np.all(np.isfinite(mesh.nodes)):
        raise MeshError("non-finite node coordinate")
    n = mesh.n_nodes
    groups = [("element", mesh.elements)] + [
        (f"marker {name!r} element", elems) for name, elems in mesh.markers.items()
    ]
    for what, elems in groups:
        for e, (kind, nodes) in enumerate(elems):
            if kind not in ELEMENT_KINDS:
                raise MeshError(f"{what} {e}: unknown element kind {kind!r}")
            if len(nodes) != ELEMENT_KINDS[kind][1]:
                raise MeshError(f"{what} {e}: {kind} needs {ELEMENT_KINDS[kind][1]} nodes")
            for i in nodes:
                if not 0 <= i < n:
                    raise MeshError(f"{what} {e}: node index {i} out of range (N_v={n})")
    dups = find_duplicate_nodes(mesh.nodes)
    if dups:
        i, j = dups[0]
        raise MeshError(f"duplicate nodes {i} and {j} at {mesh.nodes[i].tolist()}")


# ---------------------------------------------------------------------------
# SU2 ASCII


def _keyword(line):
    if "=" not in line:
        return None, None
    key, _, value = line.partition("=")
    return key.strip().upper(), value.strip()


def _ints(tokens, path, lineno):
    try:
        return [int(t) for t in tokens]
    except ValueError:
        raise MeshError(f"expected integers, got {' '.join(tokens)!r}", path, lineno) from None


def _parse_element(line, path, lineno, n_nodes_hint=None):
    tokens = line.split()
    values = _ints(tokens, path, lineno)
    if not values:
        raise MeshError("empty element line", path, lineno)
    vtk_id = values[0]
    kind = VTK_ID_TO_KIND.get(vtk_id)
    if kind is None:
        raise MeshError(f"unknown element kind (VTK id {vtk_id})", path, lineno)
    count = ELEMENT_KINDS[kind][1]
    if len(values) - 1 not in (count, count + 1):
        raise MeshError(
            f"{kind} needs {count} node indices, got {len(values) - 1}", path, lineno
        )
    return kind, tuple(values[1 : 1 + count])


def read_mesh(path, format: str = "su2-ascii") -> Mesh:
    """Read a mesh file.  Only ``su2-ascii`` is readable."""
    if format not in ("su2", "su2-ascii"):
        raise MeshError(f"unsupported read format {format!r}")
    path = os.fspath(path)
    with open(path) as fh:
        raw = fh.read().splitlines()
    lines = [(no, ln.split("%", 1)[0].strip()) for no, ln in enumerate(raw, start=1)]
    lines = [(no, ln) for no, ln in lines if ln]

    dim = None
    elements, elem_lines = [], []
    coords, coord_lines = None, []
    markers = {}
    seen_mark = False
    pos = 0

    def take(count, what, header_no):
        nonlocal pos
        block = lines[pos : pos + count]
        if len(block) < count:
            raise MeshError(f"{what}: expected {count} lines, file ended", path, header_no)
        if what in ("NELEM", "NPOIN", "MARKER_ELEMS"):
            for k, (no, ln) in enumerate(block):
                if "=" in ln:
                    raise MeshError(f"{what}: expected {count} lines, found {k}", path, no)
        pos += count
        return block

    while pos < len(lines):
        no, ln = lines[pos]
        key, value = _keyword(ln)
        pos += 1
        if key is None:
            raise MeshError(f"unexpected line {ln!r}", path, no)
        if key == "NDIME":
            dim = _ints(value.split()[:1], path, no)[0]
            if dim not in (2, 3):
                raise MeshError(f"NDIME must be 2 or 3, got {dim}", path, no)
        elif key == "NELEM":
            count = _ints(value.split()[:1], path, no)[0]
            for eno, eln in take(count, "NELEM", no):
                elements.append(_parse_element(eln, path, eno))
                elem_lines.append(eno)
        elif key == "NPOIN":
            if dim is None:
                raise MeshError("NPOIN before NDIME", path, no)
            count = _ints(value.split()[:1], path, no)[0]
            coords = np.empty((count, dim))
            for k, (pno, pln) in enumerate(take(count, "NPOIN", no)):
                tokens = pln.split()
                if len(tokens) < dim:
                    raise MeshError(f"expected {dim} coordinates", path, pno)
                try:
                    coords[k] = [float(t) for t in tokens[:dim]]
                except ValueError:
                    raise MeshError(f"non-numeric coordinate in {pln!r}", path, pno) from None
                coord_lines.append(pno)
        elif key == "NMARK":
            seen_mark = True
            n_mark = _ints(value.split()[:1], path, no)[0]
            for _ in range(n_mark):
                tag_no, tag_ln = take(1, "MARKER_TAG line", no)[0]
                tkey, tag = _keyword(tag_ln)
                if tkey != "MARKER_TAG" or not tag:
                    raise MeshError("expected MARKER_TAG=", path, tag_no)
                cnt_no, cnt_ln = take(1, "MARKER_ELEMS line", tag_no)[0]
                ckey, cval = _keyword(cnt_ln)
                if ckey != "MARKER_ELEMS":
                    raise MeshError("expected MARKER_ELEMS=", path, cnt_no)
                count = _ints(cval.split()[:1], path, cnt_no)[0]
                elems = []
                for mno, mln in take(count, "MARKER_ELEMS", cnt_no):
                    elems.append((_parse_element(mln, path, mno), mno))
                markers[tag] = elems
        else:
            logger.debug("%s:%d: ignoring keyword %s", path, no, key)

    if dim is None:
        raise MeshError("missing NDIME header", path, 1)
    if coords is None:
        raise MeshError("missing NPOIN section", path, 1)
    if not seen_mark or not markers:
        raise MeshError("no boundary markers (NMARK)", path, len(raw))

    n = len(coords)
    for (kind, nodes), eno in zip(elements, elem_lines):
        if kind not in VOLUME_KINDS[dim]:
            raise MeshError(f"{kind} is not a volume element in {dim}D", path, eno)
        for i in nodes:
            if not 0 <= i < n:
                raise MeshError(f"node index {i} out of range (NPOIN={n})", path, eno)
    for tag, elems in markers.items():
        for (kind, nodes), mno in elems:
            if kind not in SURFACE_KINDS[dim]:
                raise MeshError(f"{kind} is not a boundary element in {dim}D", path, mno)
            for i in nodes:
                if not 0 <= i < n:
                    raise MeshError(f"node index {i} out of range (NPOIN={n})", path, mno)
    if not np.all(np.isfinite(coords)):
        raise MeshError("non-finite coordinate", path, coord_lines[0] if coord_lines else 1)
    dups = find_duplicate_nodes(coords)
    if dups:
        i, j = dups[0]
        raise MeshError(f"duplicate node {j} coincides with node {i}", path, coord_lines[j])

    return Mesh(
        dim,
        coords,
        tuple(elements),
        {tag: tuple(e for e, _ in elems) for tag, elems in markers.items()},
    )


def _fmt(x: float) -> str:
    return repr(float(x))


def _write_su2(mesh: Mesh, fh) -> None:
    fh.write(f"NDIME= {mesh.dim}\n")
    fh.write(f"NELEM= {len(mesh.elements)}\n")
    for e, (kind, nodes) in enumerate(mesh.elements):
        fh.write(f"{ELEMENT_KINDS[kind][0]} {' '.join(map(str, nodes))} {e}\n")
    fh.write(f"NPOIN= {mesh.n_nodes}\n")
    for i, row in enumerate(mesh.nodes):
        fh.write(" ".join(_fmt(x) for x in row) + f" {i}\n")
    fh.write(f"NMARK= {len(mesh.markers)}\n")
    for tag, elems in mesh.markers.items():
        fh.write(f"MARKER_TAG= {tag}\n")
        fh.write(f"MARKER_ELEMS= {len(elems)}\n")
        for kind, nodes in elems:
            fh.write(f"{ELEMENT_KINDS[kind][0]} {' '.join(map(str, nodes))}\n")


def _write_vtk(mesh: Mesh, fh, cell_data=None, point_data=None, title="rbfmorph mesh"):
    fh.write("# vtk DataFile Version 3.0\n")
    fh.write(title.splitlines()[0][:255] + "\n")
    fh.write("ASCII\nDATASET UNSTRUCTURED_GRID\n")
    fh.write(f"POINTS {mesh.n_nodes} double\n")
    pad = 3 - mesh.dim
    for row in mesh.nodes:
        fh.write(" ".join(_fmt(x) for x in row) + " 0.0" * pad + "\n")
    size = sum(len(nodes) + 1 for _, nodes in mesh.elements)
    fh.write(f"CELLS {len(mesh.elements)} {size}\n")
    for _, nodes in mesh.elements:
        fh.write(f"{len(nodes)} {' '.join(map(str, nodes))}\n")
    fh.write(f"CELL_TYPES {len(mesh.elements)}\n")
    for kind, _ in mesh.elements:
        fh.write(f"{ELEMENT_KINDS[kind][0]}\n")
    _write_vtk_arrays(fh, "CELL_DATA", len(mesh.elements), cell_data)
    _write_vtk_arrays(fh, "POINT_DATA", mesh.n_nodes, point_data)


def _write_vtk_arrays(fh, section, count, arrays):
    if not arrays:
        return
    fh.write(f"{section} {count}\n")
    for name, values in arrays.items():
        values = np.asarray(values, dtype=float)
        if values.shape[0] != count:
            raise MeshError(f"{section} array {name!r} has {values.shape[0]} entries, need {count}")
        name = name.replace(" ", "_")
        if values.ndim == 1:
            fh.write(f"SCALARS {name} double 1\nLOOKUP_TABLE default\n")
            for v in values:
                fh.write(_fmt(v) + "\n")
        else:
            fh.write(f"VECTORS {name} double\n")
            pad = 3 - values.shape[1]
            for row in values:
                fh.write(" ".join(_fmt(v) for v in row) + " 0.0" * pad + "\n")


def write_mesh(
    mesh: Mesh,
    path,
    format: str = "su2-ascii",
    cell_data: Mapping[str, Sequence[float]] | None = None,
    point_data: Mapping[str, Sequence] | None = None,
) -> None:
    """Write ``mesh`` as ``su2-ascii`` or ``vtk-legacy-ascii``.

    Coordinates use ``repr`` (17 significant digits), so an SU2 round trip is
    bitwise.  ``cell_data``/``point_data`` are only written for VTK output.
    """
    fmt = {"su2": "su2-ascii", "vtk": "vtk-legacy-ascii"}.get(format, format)
    path = os.fspath(path)
    try:
        fh = open(path, "w")
    except OSError as exc:
        raise MeshError(f"cannot write {path}: {exc.strerror}") from exc
    with fh:
        if fmt == "su2-ascii":
            _write_su2(mesh, fh)
        elif fmt == "vtk-legacy-ascii":
            _write_vtk(mesh, fh, cell_data, point_data)
        else:
            raise MeshError(f"unsupported write format {format!r}")


# ---------------------------------------------------------------------------
# displacements


@dataclass(frozen=True, eq=False)
class DisplacementField:
    """Prescribed displacement of every node on one marker.

    ``indices`` follows the marker's node order; ``values`` is ``(N_s, dim)``.
    """

    patch: str
    indices: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        idx = np.array(self.indices, dtype=np.int64)
        vals = np.array(self.values, dtype=float)
        if vals.ndim != 2 or vals.shape[0] != idx.shape[0]:
            raise MeshError(f"values shape {vals.shape} does not match {idx.shape[0]} indices")
        if not np.all(np.isfinite(vals)):
            raise MeshError("non-finite displacement component")
        idx.setflags(write=False)
        vals.setflags(write=False)
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "values", vals)

    @classmethod
    def zeros(cls, mesh: Mesh, marker: str) -> "DisplacementField":
        idx = mesh.marker_nodes(marker)
        return cls(marker, idx, np.zeros((len(idx), mesh.dim)))

    @classmethod
    def from_mapping(cls, mesh: Mesh, marker: str, entries: Mapping[int, Sequence[float]]):
        idx = mesh.marker_nodes(marker)
        where = {int(i): k for k, i in enumerate(idx)}
        vals = np.zeros((len(idx), mesh.dim))
        for node, vec in entries.items():
            if int(node) not in where:
                raise MeshError(f"node {node} not on marker {marker!r}")
            vals[where[int(node)]] = vec
        return cls(marker, idx, vals)

    @property
    def entries(self) -> dict:
        return {int(i): tuple(v) for i, v in zip(self.indices, self.values)}

    def max_magnitude(self) -> float:
        if len(self.values) == 0:
            return 0.0
        return float(np.linalg.norm(self.values, axis=1).max())


def read_displacements(path, mesh: Mesh, marker: str) -> DisplacementField:
    """Read ``node_index dx dy [dz]`` lines; marker nodes not listed get zero."""
    path = os.fspath(path)
    idx = mesh.marker_nodes(marker)
    where = {int(i): k for k, i in enumerate(idx)}
    vals = np.zeros((len(idx), mesh.dim))
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            tokens = line.split()
            if len(tokens) != mesh.dim + 1:
                raise MeshError(
                    f"expected 'node_index' plus {mesh.dim} components, got {len(tokens)} tokens",
                    path,
                    lineno,
                )
            try:
                node = int(tokens[0])
                vec = [float(t) for t in tokens[1:]]
            except ValueError:
                raise MeshError(f"non-numeric token in {line!r}", path, lineno) from None
            if not all(math.isfinite(v) for v in vec):
                raise MeshError("non-finite displacement", path, lineno)
            if node not in where:
                raise MeshError(f"node {node} not on marker {marker!r}", path, lineno)
            vals[where[node]] = vec
    return DisplacementField(marker, idx, vals)


def write_displacements(field: DisplacementField, path) -> None:
    with open(os.fspath(path), "w") as fh:
        fh.write(f"# displacements for marker {field.patch}\n")
        for i, vec in zip(field.indices, field.values):
            fh.write(f"{i} " + " ".join(_fmt(v) for v in vec) + "\n")
