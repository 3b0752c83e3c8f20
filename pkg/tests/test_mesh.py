"""Mesh family construction, topology invariants, and the ASCII format."""

import numpy as np
import pytest

from pcurl import mesh as pm


def test_fan_counts():
    m = pm.disk_mesh(0)
    assert m.n_vertices == 9
    assert m.n_triangles == 8
    assert m.n_edges == 16
    assert m.boundary_edge.sum() == 8
    assert (~m.boundary_edge).sum() == 8
    # Euler characteristic of a disk
    assert m.n_vertices - m.n_edges + m.n_triangles == 1


def test_refinement_counts():
    m = pm.disk_mesh(0)
    for _ in range(3):
        nv, nt, ne = m.n_vertices, m.n_triangles, m.n_edges
        m = pm.refine_uniform(m)
        assert m.n_vertices == nv + ne
        assert m.n_triangles == 4 * nt
        assert m.n_edges == 2 * ne + 3 * nt
        assert m.n_vertices - m.n_edges + m.n_triangles == 1


def test_level_counts_closed_form():
    # level 2: 81 vertices, 128 triangles, 208 edges
    m = pm.disk_mesh(2)
    assert (m.n_vertices, m.n_triangles, m.n_edges) == (81, 128, 208)


def test_areas_positive_and_approach_disk():
    prev = 0.0
    for level in range(4):
        m = pm.disk_mesh(level)
        assert np.all(m.areas > 0.0)
        total = m.areas.sum()
        assert total > prev  # boundary projection only adds area
        assert total < np.pi
        prev = total
    assert abs(prev - np.pi) / np.pi < 5.0e-3


def test_boundary_vertices_on_circle():
    m = pm.disk_mesh(3)
    r = np.linalg.norm(m.vertices[m.boundary_vertex_mask()], axis=1)
    assert np.max(np.abs(r - 1.0)) < 1.0e-14


def test_mesh_size_halves_per_level():
    sizes = [pm.disk_mesh(level).mesh_size() for level in range(5)]
    ratios = np.array(sizes[1:]) / np.array(sizes[:-1])
    assert np.all(ratios > 0.45)
    assert np.all(ratios < 0.56)


def test_shape_regularity_uniform_in_level():
    for level in range(5):
        assert pm.disk_mesh(level).shape_regularity() >= 0.3


def test_h_k_is_inscribed_diameter():
    # right triangle (0,0)-(1,0)-(0,1): inradius (2 - sqrt(2))/2
    m = pm.TriMesh([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], [[0, 1, 2]])
    assert m.areas[0] == pytest.approx(0.5)
    assert m.h_k[0] == pytest.approx(2.0 - np.sqrt(2.0), rel=1.0e-14)


def test_edges_sorted_lexicographically():
    m = pm.disk_mesh(2)
    assert np.all(m.edges[:, 0] < m.edges[:, 1])
    keys = m.edges[:, 0] * m.n_vertices + m.edges[:, 1]
    assert np.all(np.diff(keys) > 0)


def test_edge_signs_close_each_triangle():
    # signed global edge vectors traverse the triangle boundary, so they sum to 0
    m = pm.disk_mesh(2)
    vec = m.vertices[m.edges[:, 1]] - m.vertices[m.edges[:, 0]]
    loop = np.einsum("tk,tkd->td", m.tri_edge_signs, vec[m.tri_edges])
    assert np.max(np.abs(loop)) < 1.0e-14


def test_edge_lengths():
    m = pm.disk_mesh(1)
    ev = m.vertices[m.edges]
    assert np.allclose(m.h_f, np.linalg.norm(ev[:, 1] - ev[:, 0], axis=1))


def test_edge_triangle_adjacency():
    m = pm.disk_mesh(2)
    for e in range(m.n_edges):
        owners = [t for t in range(m.n_triangles) if e in m.tri_edges[t]]
        listed = [t for t in m.edge_tris[e] if t >= 0]
        assert sorted(owners) == sorted(listed)
        assert m.boundary_edge[e] == (len(owners) == 1)


def test_negative_area_rejected():
    with pytest.raises(pm.MeshValidationError, match="triangle 0 has negative area"):
        pm.TriMesh([[0.0, 0.0], [0.0, 1.0], [1.0, 0.0]], [[0, 1, 2]])


def test_nonmanifold_edge_rejected():
    verts = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0], [-1.0, 1.0]]
    tris = [[0, 1, 2], [1, 3, 2], [1, 2, 4]]
    with pytest.raises(pm.MeshValidationError, match=r"non-manifold edge \(1, 2\) shared by 3"):
        pm.TriMesh(verts, tris)


def test_index_range_rejected():
    with pytest.raises(pm.MeshValidationError, match="exceeds vertex count"):
        pm.TriMesh([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], [[0, 1, 3]])
    with pytest.raises(pm.MeshValidationError, match="negative vertex index"):
        pm.TriMesh([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], [[0, 1, -1]])


def test_io_roundtrip_exact(tmp_path):
    m = pm.disk_mesh(2)
    path = tmp_path / "disk2.mesh"
    pm.write_mesh(m, path)
    back = pm.read_mesh(path)
    # 17 significant digits round-trip float64 exactly
    assert np.array_equal(back.vertices, m.vertices)
    assert np.array_equal(back.triangles, m.triangles)
    assert np.array_equal(back.edges, m.edges)


def test_read_tolerates_blank_lines(tmp_path):
    path = tmp_path / "padded.mesh"
    path.write_text(
        "pcurlmesh 1\n\nvertices 3\n0 0\n\n1 0\n0 1\n\ntriangles 1\n0 1 2\n\n"
    )
    m = pm.read_mesh(path)
    assert m.n_triangles == 1


def _expect_format_error(tmp_path, text, match):
    path = tmp_path / "bad.mesh"
    path.write_text(text)
    with pytest.raises(pm.MeshFormatError, match=match) as exc:
        pm.read_mesh(path)
    assert str(path) in str(exc.value)


def test_read_bad_header(tmp_path):
    _expect_format_error(tmp_path, "trimesh 1\n", r"line 1: expected 'pcurlmesh 1'")


def test_read_bad_version(tmp_path):
    _expect_format_error(tmp_path, "pcurlmesh 9\n", r"line 1: unsupported format version")


def test_read_bad_vertex_count(tmp_path):
    _expect_format_error(
        tmp_path, "pcurlmesh 1\nvertices many\n", r"line 2: bad vertex count"
    )


def test_read_bad_coordinate(tmp_path):
    _expect_format_error(
        tmp_path,
        "pcurlmesh 1\nvertices 1\n0.0 north\ntriangles 0\n",
        r"line 3: bad coordinate",
    )


def test_read_truncated(tmp_path):
    _expect_format_error(
        tmp_path,
        "pcurlmesh 1\nvertices 3\n0 0\n1 0\n",
        r"unexpected end of file",
    )


def test_read_bad_triangle_index(tmp_path):
    _expect_format_error(
        tmp_path,
        "pcurlmesh 1\nvertices 3\n0 0\n1 0\n0 1\ntriangles 1\n0 1 two\n",
        r"line 7: bad vertex index",
    )


def test_read_trailing_content(tmp_path):
    _expect_format_error(
        tmp_path,
        "pcurlmesh 1\nvertices 3\n0 0\n1 0\n0 1\ntriangles 1\n0 1 2\nextra\n",
        r"line 8: trailing content",
    )


def test_read_validates_mesh(tmp_path):
    path = tmp_path / "clockwise.mesh"
    path.write_text("pcurlmesh 1\nvertices 3\n0 0\n0 1\n1 0\ntriangles 1\n0 1 2\n")
    with pytest.raises(pm.MeshValidationError, match="negative area"):
        pm.read_mesh(path)
