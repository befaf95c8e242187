import itertools

import numpy as np
import pytest

from rbfmorph.mesh_io import Mesh


def grid_mesh_2d(nx, ny, lx=1.0, ly=1.0, triangles=False):
    """Structured [0,lx]x[0,ly] grid; markers 'bottom' (y=0) and 'top' (y=ly)."""
    xs, ys = np.linspace(0, lx, nx + 1), np.linspace(0, ly, ny + 1)
    nodes = np.array([(x, y) for y in ys for x in xs])

    def nid(i, j):
        return j * (nx + 1) + i

    elements = []
    for j, i in itertools.product(range(ny), range(nx)):
        a, b, c, d = nid(i, j), nid(i + 1, j), nid(i + 1, j + 1), nid(i, j + 1)
        if triangles:
            elements += [("triangle", (a, b, c)), ("triangle", (a, c, d))]
        else:
            elements.append(("quadrilateral", (a, b, c, d)))
    bottom = [("line", (nid(i, 0), nid(i + 1, 0))) for i in range(nx)]
    top = [("line", (nid(i + 1, ny), nid(i, ny))) for i in range(nx)]
    left = [("line", (nid(0, j + 1), nid(0, j))) for j in range(ny)]
    right = [("line", (nid(nx, j), nid(nx, j + 1))) for j in range(ny)]
    return Mesh(2, nodes, elements,
                {"bottom": bottom, "top": top, "left": left, "right": right})


def box_mesh_3d(n, tets=False):
    """Unit cube of n^3 hexahedra (or 6n^3 tetrahedra); markers 'wall' (y=0), 'top' (y=1)."""
    g = np.linspace(0, 1, n + 1)
    nodes = np.array([(x, y, z) for z in g for y in g for x in g])

    def nid(i, j, k):
        return (k * (n + 1) + j) * (n + 1) + i

    elements = []
    for k, j, i in itertools.product(range(n), repeat=3):
        h = (nid(i, j, k), nid(i + 1, j, k), nid(i + 1, j + 1, k), nid(i, j + 1, k),
             nid(i, j, k + 1), nid(i + 1, j, k + 1), nid(i + 1, j + 1, k + 1), nid(i, j + 1, k + 1))
        if tets:
            for a, b, c in ((1, 2, 6), (2, 3, 6), (3, 7, 6), (7, 4, 6), (4, 5, 6), (5, 1, 6)):
                elements.append(("tetrahedron", (h[0], h[a], h[b], h[c])))
        else:
            elements.append(("hexahedron", h))
    wall = [("quadrilateral", (nid(i, 0, k), nid(i + 1, 0, k), nid(i + 1, 0, k + 1), nid(i, 0, k + 1)))
            for k in range(n) for i in range(n)]
    top = [("quadrilateral", (nid(i, n, k), nid(i, n, k + 1), nid(i + 1, n, k + 1), nid(i + 1, n, k)))
           for k in range(n) for i in range(n)]
    return Mesh(3, nodes, elements, {"wall": wall, "top": top})


@pytest.fixture
def unit_square():
    """Unit square split into two triangles; marker 'wall' has 2 edges."""
    nodes = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]
    elements = [("triangle", (0, 1, 2)), ("triangle", (0, 2, 3))]
    return Mesh(2, nodes, elements, {"wall": [("line", (0, 1)), ("line", (1, 2))]})


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[n])
