import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import box_mesh_3d, grid_mesh_2d
from rbfmorph.bench import gen_airfoil_mesh
from rbfmorph.mesh_io import (
    DisplacementField,
    Mesh,
    MeshError,
    read_displacements,
    read_mesh,
    write_displacements,
    write_mesh,
)

SQUARE_SU2 = """\
% unit square
NDIME= 2
NELEM= 2
5 0 1 2 0
5 0 2 3 1
NPOIN= 4
0.0 0.0 0
1.0 0.0 1
1.0 1.0 2
0.0 1.0 3
NMARK= 1
MARKER_TAG= wall
MARKER_ELEMS= 2
3 0 1
3 1 2
"""


def write(tmp_path, text, name="m.su2"):
    path = tmp_path / name
    path.write_text(text)
    return path


def test_read_minimal_square(tmp_path):
    mesh = read_mesh(write(tmp_path, SQUARE_SU2))
    assert mesh.dim == 2
    assert mesh.n_nodes == 4
    assert len(mesh.elements) == 2
    assert mesh.marker_nodes("wall").tolist() == [0, 1, 2]
    assert mesh.elements[0] == ("triangle", (0, 1, 2))


def test_index_out_of_range_names_line(tmp_path):
    text = SQUARE_SU2.replace("5 0 2 3 1", "5 0 2 99 1")
    with pytest.raises(MeshError, match="out of range") as err:
        read_mesh(write(tmp_path, text))
    assert err.value.lineno == 5


def test_unknown_element_kind(tmp_path):
    text = SQUARE_SU2.replace("5 0 1 2 0", "7 0 1 2 0")
    with pytest.raises(MeshError, match="unknown element kind") as err:
        read_mesh(write(tmp_path, text))
    assert err.value.lineno == 4


def test_duplicate_node_is_parse_error(tmp_path):
    text = SQUARE_SU2.replace("0.0 1.0 3", "1.0 1.0 3")
    with pytest.raises(MeshError, match="duplicate") as err:
        read_mesh(write(tmp_path, text))
    assert err.value.lineno == 10


@pytest.mark.parametrize(
    "text, message",
    [
        (SQUARE_SU2.replace("NDIME= 2", "NDIME= 4"), "NDIME"),
        (SQUARE_SU2.split("NMARK")[0], "marker"),
        (SQUARE_SU2.replace("NPOIN= 4", "NPOIN= 5"), "NPOIN"),
        (SQUARE_SU2.replace("1.0 0.0 1", "1.0 abc 1"), "non-numeric"),
        ("NELEM= 0\n", "NDIME"),
    ],
)
def test_malformed_headers(tmp_path, text, message):
    with pytest.raises(MeshError, match=message):
        read_mesh(write(tmp_path, text))


def test_square_roundtrip(tmp_path, unit_square):
    path = tmp_path / "sq.su2"
    write_mesh(unit_square, path)
    back = read_mesh(path)
    assert back == unit_square
    assert np.array_equal(back.nodes, unit_square.nodes)


def test_airfoil_roundtrip_bitwise(tmp_path):
    mesh = gen_airfoil_mesh(radial_layers=10, circumferential=48)
    path = tmp_path / "airfoil.su2"
    write_mesh(mesh, path)
    back = read_mesh(path)
    assert back == mesh
    assert back.marker_nodes("airfoil").tolist() == mesh.marker_nodes("airfoil").tolist()


def test_3d_roundtrip(tmp_path):
    mesh = box_mesh_3d(2)
    path = tmp_path / "box.su2"
    write_mesh(mesh, path, "su2")
    assert read_mesh(path) == mesh


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False), min_size=2, max_size=2))
def test_coordinate_roundtrip_property(tmp_path_factory, offset):
    mesh = grid_mesh_2d(3, 2)
    nodes = mesh.nodes * np.pi + np.array(offset)
    moved = mesh.with_nodes(nodes)
    path = tmp_path_factory.mktemp("rt") / "m.su2"
    write_mesh(moved, path)
    assert np.array_equal(read_mesh(path).nodes, moved.nodes)


def test_marker_order_preserved(tmp_path):
    text = SQUARE_SU2.replace("3 0 1\n3 1 2", "3 2 1\n3 1 0")
    mesh = read_mesh(write(tmp_path, text))
    assert mesh.marker_nodes("wall").tolist() == [2, 1, 0]


def test_vtk_tetra_cell_types(tmp_path):
    mesh = box_mesh_3d(1, tets=True)
    path = tmp_path / "box.vtk"
    write_mesh(mesh, path, "vtk-legacy-ascii", cell_data={"q": np.arange(6.0)})
    text = path.read_text().splitlines()
    assert text[3] == "DATASET UNSTRUCTURED_GRID"
    i = text.index("CELL_TYPES 6")
    assert text[i + 1 : i + 7] == ["10"] * 6
    assert "CELL_DATA 6" in text
    assert "SCALARS q double 1" in text


def test_vtk_2d_pads_z(tmp_path, unit_square):
    path = tmp_path / "sq.vtk"
    write_mesh(unit_square, path, "vtk")
    lines = path.read_text().splitlines()
    i = lines.index("POINTS 4 double")
    assert lines[i + 2].split() == ["1.0", "0.0", "0.0"]


def test_unwritable_path(unit_square, tmp_path):
    with pytest.raises(MeshError, match="cannot write"):
        write_mesh(unit_square, tmp_path / "missing-dir" / "x.su2")


def test_mesh_invariants():
    with pytest.raises(MeshError, match="out of range"):
        Mesh(2, [(0, 0), (1, 0), (0, 1)], [("triangle", (0, 1, 5))], {})
    with pytest.raises(MeshError, match="duplicate"):
        Mesh(2, [(0, 0), (1, 0), (0, 0)], [("triangle", (0, 1, 2))], {})
    with pytest.raises(MeshError, match="unknown element kind"):
        Mesh(2, [(0, 0), (1, 0), (0, 1)], [("hexagon", (0, 1, 2))], {})


def test_mesh_is_immutable(unit_square):
    with pytest.raises(ValueError):
        unit_square.nodes[0, 0] = 5.0


# displacements


def test_empty_displacement_file_is_zero(tmp_path, unit_square):
    field = read_displacements(write(tmp_path, "", "d.txt"), unit_square, "wall")
    assert field.indices.tolist() == [0, 1, 2]
    assert not field.values.any()


def test_displacement_line_parse(tmp_path):
    mesh = grid_mesh_2d(5, 2)
    field = read_displacements(write(tmp_path, "5 0.01 -0.002\n", "d.txt"), mesh, "bottom")
    assert field.entries[5] == (0.01, -0.002)
    assert field.entries[0] == (0.0, 0.0)


def test_displacement_interior_node_rejected(tmp_path):
    mesh = grid_mesh_2d(5, 2)
    with pytest.raises(MeshError, match="not on marker") as err:
        read_displacements(write(tmp_path, "# c\n\n8 0.1 0.1\n", "d.txt"), mesh, "bottom")
    assert err.value.lineno == 3


@pytest.mark.parametrize("line", ["1 0.1 abc", "1 0.1", "x 0.1 0.2", "1 nan 0.0"])
def test_displacement_bad_tokens(tmp_path, line):
    mesh = grid_mesh_2d(5, 2)
    with pytest.raises(MeshError):
        read_displacements(write(tmp_path, line + "\n", "d.txt"), mesh, "bottom")


def test_displacement_roundtrip(tmp_path, rng):
    mesh = grid_mesh_2d(6, 3)
    idx = mesh.marker_nodes("bottom")
    field = DisplacementField("bottom", idx, rng.normal(size=(len(idx), 2)))
    path = tmp_path / "d.txt"
    write_displacements(field, path)
    back = read_displacements(path, mesh, "bottom")
    assert np.array_equal(back.values, field.values)


def test_unknown_marker(unit_square):
    with pytest.raises(MeshError, match="not found"):
        unit_square.marker_nodes("farfield")
