"""Analytic benchmark meshes and displacement fields.

``gen_airfoil_mesh`` builds a quadrilateral O-grid around a NACA0012 profile.
The displacement generators reproduce the sinusoidal airfoil/wing benchmarks
and a synthetic horned ice shape.
"""

from __future__ import annotations

import numpy as np
from scipy.optimize import brentq
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import dijkstra

from .mesh_io import DisplacementField, Mesh, MeshError

AIRFOIL_MARKER = "airfoil"
FARFIELD_MARKER = "farfield"

# sinusoidal benchmark defaults: (amplitude, wavenumber)
SIN_AIRFOIL = (0.01, 15.0)
SIN_WING = (0.03, 4.0)


def naca0012_half_thickness(x):
    """Closed-trailing-edge NACA 4-digit thickness for t/c = 0.12 (chord 1)."""
    x = np.asarray(x, dtype=float)
    return 0.6 * (
        0.2969 * np.sqrt(x) - 0.1260 * x - 0.3516 * x**2 + 0.2843 * x**3 - 0.1036 * x**4
    )


def airfoil_profile(n: int, chord: float = 1.0) -> np.ndarray:
    """``n`` profile points, counter-clockwise from the trailing edge.

    Cosine spacing clusters points at both edges; node ``n // 2`` is the
    leading edge when ``n`` is even.
    """
    theta = 2.0 * np.pi * np.arange(n) / n
    x = 0.5 * (1.0 + np.cos(theta))
    y = np.sign(np.sin(theta)) * naca0012_half_thickness(x)
    y[np.isclose(np.sin(theta), 0.0, atol=1e-15)] = 0.0
    return chord * np.column_stack([x, y])


def _layer_offsets(layers: int, total: float, first: float) -> np.ndarray:
    """Geometric offsets 0 = d_0 < d_1 = first < ... < d_layers = total."""
    if first * layers >= total:
        return np.linspace(0.0, total, layers + 1)
    ratio = brentq(lambda q: first * (q**layers - 1.0) / (q - 1.0) - total, 1.0 + 1e-12, 100.0)
    return first * (ratio ** np.arange(layers + 1) - 1.0) / (ratio - 1.0)


def gen_airfoil_mesh(
    chord: float = 1.0,
    radial_layers: int = 32,
    circumferential: int = 64,
    farfield: float = 25.0,
    first_layer: float = 2e-3,
) -> Mesh:
    """Quadrilateral O-grid around NACA0012 with the far field ``farfield`` chords away.

    ``circumferential`` nodes per ring, ``radial_layers + 1`` rings; markers
    ``airfoil`` (inner ring) and ``farfield`` (outer ring).  Grid lines leave
    the wall along the surface normal and blend into a circle centred at
    mid-chord.
    """
    n, m = int(circumferential), int(radial_layers)
    if n < 8 or m < 8:
        raise MeshError(f"circumferential and radial counts must be >= 8, got ({n}, {m})")
    if n % 2:
        raise MeshError(f"circumferential count must be even, got {n}")
    profile = airfoil_profile(n, chord)
    tangent = np.roll(profile, -1, axis=0) - np.roll(profile, 1, axis=0)
    normal = np.column_stack([tangent[:, 1], -tangent[:, 0]])
    normal /= np.linalg.norm(normal, axis=1)[:, None]

    theta = 2.0 * np.pi * np.arange(n) / n
    centre = np.array([0.5 * chord, 0.0])
    radius = farfield * chord
    outer = centre + radius * np.column_stack([np.cos(theta), np.sin(theta)])
    offsets = _layer_offsets(m, radius, first_layer * chord)

    rings = []
    for k, d in enumerate(offsets):
        w = (d / radius) ** 2 if k < m else 1.0
        rings.append((1.0 - w) * (profile + d * normal) + w * outer)
    nodes = np.concatenate(rings)

    def nid(k, j):
        return k * n + (j % n)

    quads = [
        ("quadrilateral", (nid(k, j), nid(k + 1, j), nid(k + 1, j + 1), nid(k, j + 1)))
        for k in range(m)
        for j in range(n)
    ]
    # boundary edges oriented with the fluid on their left
    wall = [("line", (nid(0, j + 1), nid(0, j))) for j in range(n)]
    far = [("line", (nid(m, j), nid(m, j + 1))) for j in range(n)]
    return Mesh(2, nodes, quads, {AIRFOIL_MARKER: wall[::-1], FARFIELD_MARKER: far})


# ---------------------------------------------------------------------------
# displacement fields


def gen_sinusoidal_displacement(
    mesh: Mesh,
    marker: str,
    mode: str = "airfoil",
    amplitude: float | None = None,
    wavenumber: float | None = None,
    length: float = 1.0,
) -> DisplacementField:
    """dy = A sin(W pi x / c) (airfoil) or dy = A sin(W pi z / b) (wing).

    ``length`` is the chord (airfoil) or span (wing) used to normalize the
    coordinate.  Defaults: A=0.01, W=15 for the airfoil, A=0.03, W=4 for the wing.
    """
    if mode not in ("airfoil", "wing"):
        raise ValueError(f"mode must be 'airfoil' or 'wing', got {mode!r}")
    if mode == "wing" and mesh.dim != 3:
        raise MeshError("wing mode needs a 3D mesh")
    default_a, default_w = SIN_AIRFOIL if mode == "airfoil" else SIN_WING
    a = default_a if amplitude is None else amplitude
    w = default_w if wavenumber is None else wavenumber
    idx = mesh.marker_nodes(marker)
    coord = mesh.nodes[idx, 0 if mode == "airfoil" else 2] / length
    values = np.zeros((len(idx), mesh.dim))
    values[:, 1] = a * np.sin(w * np.pi * coord)
    return DisplacementField(marker, idx, values)


def _marker_edges(mesh: Mesh, marker: str):
    edges = []
    for kind, conn in mesh.markers[marker]:
        if kind != "line":
            raise MeshError(f"marker {marker!r} is not a 2D curve")
        edges.append(conn)
    return np.array(edges, dtype=np.int64).reshape(-1, 2)


def surface_normals(mesh: Mesh, marker: str) -> np.ndarray:
    """Unit node normals of a 2D marker, pointing into the meshed region."""
    if mesh.dim != 2:
        raise MeshError("surface normals are only implemented for 2D markers")
    idx = mesh.marker_nodes(marker)
    where = {int(i): k for k, i in enumerate(idx)}
    edges = _marker_edges(mesh, marker)

    node_elems = {}
    for e, (_, conn) in enumerate(mesh.elements):
        for i in conn:
            node_elems.setdefault(i, []).append(e)

    acc = np.zeros((len(idx), 2))
    for a, b in edges:
        pa, pb = mesh.nodes[a], mesh.nodes[b]
        t = pb - pa
        nrm = np.array([-t[1], t[0]])
        owners = set(node_elems.get(int(a), ())) & set(node_elems.get(int(b), ()))
        if owners:
            e = min(owners)
            centroid = mesh.nodes[list(mesh.elements[e][1])].mean(axis=0)
            if nrm @ (centroid - 0.5 * (pa + pb)) < 0:
                nrm = -nrm
        acc[where[int(a)]] += nrm
        acc[where[int(b)]] += nrm
    length = np.linalg.norm(acc, axis=1)
    length[length == 0] = 1.0
    return acc / length[:, None]


def arc_positions(mesh: Mesh, marker: str) -> np.ndarray:
    """Signed arc length along a 2D marker from its leading edge (minimum x).

    Distances follow the marker edges (shortest way round a closed curve);
    nodes above the leading edge get positive values, nodes below negative.
    """
    idx = mesh.marker_nodes(marker)
    where = {int(i): k for k, i in enumerate(idx)}
    edges = _marker_edges(mesh, marker)
    a = np.array([where[int(i)] for i in edges[:, 0]])
    b = np.array([where[int(i)] for i in edges[:, 1]])
    w = np.linalg.norm(mesh.nodes[edges[:, 0]] - mesh.nodes[edges[:, 1]], axis=1)
    graph = coo_matrix((w, (a, b)), shape=(len(idx), len(idx))).tocsr()
    pts = mesh.nodes[idx]
    le = int(np.argmin(pts[:, 0]))
    dist = dijkstra(graph, directed=False, indices=le)
    sign = np.where(pts[:, 1] >= pts[le, 1], 1.0, -1.0)
    return sign * dist


def horn_positions(center: float, width: float, horns: int, spacing: float | None = None):
    spacing = 6.0 * width if spacing is None else spacing
    return center + (np.arange(horns) - 0.5 * (horns - 1)) * spacing


def gen_ice_bump(
    mesh: Mesh,
    marker: str,
    center: float = 0.0,
    height: float = 0.02,
    width: float = 0.01,
    horns: int = 2,
    spacing: float | None = None,
) -> DisplacementField:
    """Horned ice shape: normal displacement height * sum exp(-(s - s_h)^2 / width^2).

    ``s`` is the signed arc length from the leading edge; horn centres are
    spread ``spacing`` apart (default ``6 * width``) around ``center``.  Each
    horn's contribution is cut to zero beyond ``5 * width``.
    """
    if width <= 0:
        raise ValueError(f"width must be positive, got {width}")
    if horns < 1:
        raise ValueError(f"need at least one horn, got {horns}")
    idx = mesh.marker_nodes(marker)
    if height == 0.0:
        return DisplacementField(marker, idx, np.zeros((len(idx), mesh.dim)))
    s = arc_positions(mesh, marker)
    magnitude = np.zeros(len(idx))
    for sh in horn_positions(center, width, horns, spacing):
        gap = np.abs(s - sh)
        magnitude += np.where(gap <= 5.0 * width, np.exp(-((gap / width) ** 2)), 0.0)
    values = height * magnitude[:, None] * surface_normals(mesh, marker)
    return DisplacementField(marker, idx, values)
