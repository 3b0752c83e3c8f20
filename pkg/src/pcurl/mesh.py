"""Triangulations of the unit disk with deterministic edge numbering.

The mesh family starts from an 8-triangle fan around the origin and refines
uniformly 1-to-4, projecting boundary midpoints back onto the unit circle so
every boundary vertex stays on the circle.  Edges are stored as sorted vertex
pairs (v_lo < v_hi) in lexicographic order, which fixes the degree-of-freedom
numbering independent of construction history.
"""

import numpy as np

FORMAT_HEADER = "pcurlmesh"
FORMAT_VERSION = 1


class MeshError(Exception):
    """Base class for mesh construction and I/O failures."""


class MeshFormatError(MeshError):
    """Raised on malformed mesh files; the message names the offending line."""


class MeshValidationError(MeshError):
    """Raised when vertex/triangle arrays violate mesh invariants."""


class TriMesh:
    """Conforming triangulation with derived edge topology.

    Parameters
    ----------
    vertices : (nv, 2) float array
        Vertex coordinates.
    triangles : (nt, 3) int array
        Vertex indices per triangle, counter-clockwise.

    Attributes
    ----------
    edges : (ne, 2) int array
        Unique vertex pairs with ``edges[i, 0] < edges[i, 1]``, sorted
        lexicographically.
    tri_edges : (nt, 3) int array
        Global edge index of each local edge (v0,v1), (v1,v2), (v2,v0).
    tri_edge_signs : (nt, 3) int array
        +1 where the local traversal runs from v_lo to v_hi, else -1.
    edge_tris : (ne, 2) int array
        Adjacent triangle indices; -1 in the second slot on the boundary.
    boundary_edge : (ne,) bool array
    areas : (nt,) float array
        Signed areas, strictly positive.
    h_k : (nt,) float array
        Inscribed-circle diameter per triangle.
    h_f : (ne,) float array
        Edge lengths.
    """

    def __init__(self, vertices, triangles):
        vertices = np.ascontiguousarray(vertices, dtype=np.float64)
        triangles = np.ascontiguousarray(triangles, dtype=np.int64)
        if vertices.ndim != 2 or vertices.shape[1] != 2:
            raise MeshValidationError("vertices must be an (nv, 2) array")
        if triangles.ndim != 2 or triangles.shape[1] != 3:
            raise MeshValidationError("triangles must be an (nt, 3) array")
        if triangles.size and triangles.max() >= len(vertices):
            raise MeshValidationError("triangle index exceeds vertex count")
        if triangles.size and triangles.min() < 0:
            raise MeshValidationError("negative vertex index")
        self.vertices = vertices
        self.triangles = triangles
        self._cache = {}
        self._build_geometry()
        self._build_topology()

    # geometry ---------------------------------------------------------------

    def _build_geometry(self):
        p0 = self.vertices[self.triangles[:, 0]]
        p1 = self.vertices[self.triangles[:, 1]]
        p2 = self.vertices[self.triangles[:, 2]]
        d1 = p1 - p0
        d2 = p2 - p0
        areas = 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])
        bad = np.nonzero(areas <= 0.0)[0]
        if bad.size:
            t = int(bad[0])
            raise MeshValidationError(
                f"triangle {t} has negative area (vertices {tuple(self.triangles[t])})"
            )
        self.areas = areas
        # inscribed-circle diameter: 2 * area / semi-perimeter
        a = np.linalg.norm(p1 - p2, axis=1)
        b = np.linalg.norm(p2 - p0, axis=1)
        c = np.linalg.norm(p0 - p1, axis=1)
        self.h_k = 4.0 * areas / (a + b + c)

    # topology ---------------------------------------------------------------

    def _build_topology(self):
        tris = self.triangles
        nt = len(tris)
        raw = np.stack(
            [tris[:, [0, 1]], tris[:, [1, 2]], tris[:, [2, 0]]], axis=1
        ).reshape(-1, 2)
        lo = raw.min(axis=1)
        hi = raw.max(axis=1)
        keys = np.stack([lo, hi], axis=1)
        edges, inverse, counts = np.unique(
            keys, axis=0, return_inverse=True, return_counts=True
        )
        over = np.nonzero(counts > 2)[0]
        if over.size:
            e = int(over[0])
            raise MeshValidationError(
                f"non-manifold edge ({edges[e, 0]}, {edges[e, 1]}) "
                f"shared by {counts[e]} triangles"
            )
        self.edges = edges
        self.tri_edges = inverse.reshape(nt, 3)
        self.tri_edge_signs = np.where(raw[:, 0] == lo, 1, -1).reshape(nt, 3).astype(
            np.int64
        )
        self.boundary_edge = counts == 1

        edge_tris = np.full((len(edges), 2), -1, dtype=np.int64)
        slot = np.zeros(len(edges), dtype=np.int64)
        flat = self.tri_edges.ravel()
        for i, e in enumerate(flat):
            edge_tris[e, slot[e]] = i // 3
            slot[e] += 1
        self.edge_tris = edge_tris

        ev = self.vertices[edges]
        self.h_f = np.linalg.norm(ev[:, 1] - ev[:, 0], axis=1)

    # convenience ------------------------------------------------------------

    @property
    def n_vertices(self):
        return len(self.vertices)

    @property
    def n_triangles(self):
        return len(self.triangles)

    @property
    def n_edges(self):
        return len(self.edges)

    def boundary_edge_indices(self):
        return np.nonzero(self.boundary_edge)[0]

    def interior_edge_indices(self):
        return np.nonzero(~self.boundary_edge)[0]

    def boundary_vertex_mask(self):
        mask = np.zeros(self.n_vertices, dtype=bool)
        mask[self.edges[self.boundary_edge].ravel()] = True
        return mask

    def shape_regularity(self):
        """Minimum over triangles of inscribed diameter / longest edge."""
        longest = self.h_f[self.tri_edges].max(axis=1)
        return float(np.min(self.h_k / longest))

    def mesh_size(self):
        return float(self.h_k.max())


def disk_mesh(level):
    """Uniformly refined triangulation of the unit disk.

    Level 0 is the 8-triangle fan: origin plus 8 equispaced boundary vertices.
    Each level quarters the triangles and radially projects new boundary
    vertices to the circle.
    """
    if level < 0:
        raise ValueError("refinement level must be non-negative")
    angles = 2.0 * np.pi * np.arange(8) / 8.0
    verts = np.vstack([[0.0, 0.0], np.stack([np.cos(angles), np.sin(angles)], axis=1)])
    tris = np.array([[0, 1 + k, 1 + (k + 1) % 8] for k in range(8)], dtype=np.int64)
    mesh = TriMesh(verts, tris)
    for _ in range(level):
        mesh = refine_uniform(mesh)
    return mesh


def refine_uniform(mesh):
    """Split every triangle into four via edge midpoints.

    Midpoints of boundary edges are projected onto the unit circle, so this
    routine is specific to the disk family.  New vertices are appended in
    global edge order, making the refinement deterministic.
    """
    mid = 0.5 * (mesh.vertices[mesh.edges[:, 0]] + mesh.vertices[mesh.edges[:, 1]])
    on_boundary = mesh.boundary_edge
    norms = np.linalg.norm(mid[on_boundary], axis=1)
    mid[on_boundary] /= norms[:, None]
    vertices = np.vstack([mesh.vertices, mid])

    nv = mesh.n_vertices
    m01 = nv + mesh.tri_edges[:, 0]
    m12 = nv + mesh.tri_edges[:, 1]
    m20 = nv + mesh.tri_edges[:, 2]
    v0, v1, v2 = mesh.triangles.T
    children = np.empty((4 * mesh.n_triangles, 3), dtype=np.int64)
    children[0::4] = np.stack([v0, m01, m20], axis=1)
    children[1::4] = np.stack([v1, m12, m01], axis=1)
    children[2::4] = np.stack([v2, m20, m12], axis=1)
    children[3::4] = np.stack([m01, m12, m20], axis=1)
    return TriMesh(vertices, children)


def write_mesh(mesh, path):
    """Write the ASCII mesh format; floats carry 17 significant digits."""
    with open(path, "w", encoding="ascii") as fh:
        fh.write(f"{FORMAT_HEADER} {FORMAT_VERSION}\n")
        fh.write(f"vertices {mesh.n_vertices}\n")
        for x, y in mesh.vertices:
            fh.write(f"{x:.17g} {y:.17g}\n")
        fh.write(f"triangles {mesh.n_triangles}\n")
        for v0, v1, v2 in mesh.triangles:
            fh.write(f"{v0} {v1} {v2}\n")


def read_mesh(path):
    """Parse the ASCII mesh format and validate the resulting mesh.

    Raises
    ------
    MeshFormatError
        On malformed input; the message names the 1-based line number.
    MeshValidationError
        When the arrays parse but violate mesh invariants.
    """
    with open(path, "r", encoding="ascii") as fh:
        lines = fh.read().splitlines()

    def fail(lineno, why):
        raise MeshFormatError(f"{path}: line {lineno}: {why}")

    idx = 0

    def next_line():
        nonlocal idx
        while idx < len(lines) and not lines[idx].strip():
            idx += 1
        if idx >= len(lines):
            fail(len(lines), "unexpected end of file")
        idx += 1
        return idx, lines[idx - 1].split()

    lineno, tok = next_line()
    if len(tok) != 2 or tok[0] != FORMAT_HEADER:
        fail(lineno, f"expected '{FORMAT_HEADER} {FORMAT_VERSION}' header")
    if tok[1] != str(FORMAT_VERSION):
        fail(lineno, f"unsupported format version {tok[1]!r}")

    lineno, tok = next_line()
    if len(tok) != 2 or tok[0] != "vertices":
        fail(lineno, "expected 'vertices N'")
    try:
        nv = int(tok[1])
    except ValueError:
        fail(lineno, f"bad vertex count {tok[1]!r}")
    if nv < 0:
        fail(lineno, "vertex count must be non-negative")

    vertices = np.empty((nv, 2))
    for i in range(nv):
        lineno, tok = next_line()
        if len(tok) != 2:
            fail(lineno, "expected 'x y'")
        try:
            vertices[i] = [float(tok[0]), float(tok[1])]
        except ValueError:
            fail(lineno, f"bad coordinate in {tok!r}")

    lineno, tok = next_line()
    if len(tok) != 2 or tok[0] != "triangles":
        fail(lineno, "expected 'triangles M'")
    try:
        nt = int(tok[1])
    except ValueError:
        fail(lineno, f"bad triangle count {tok[1]!r}")
    if nt < 0:
        fail(lineno, "triangle count must be non-negative")

    triangles = np.empty((nt, 3), dtype=np.int64)
    for i in range(nt):
        lineno, tok = next_line()
        if len(tok) != 3:
            fail(lineno, "expected 'v0 v1 v2'")
        try:
            triangles[i] = [int(tok[0]), int(tok[1]), int(tok[2])]
        except ValueError:
            fail(lineno, f"bad vertex index in {tok!r}")

    while idx < len(lines):
        if lines[idx].strip():
            fail(idx + 1, "trailing content after triangle block")
        idx += 1

    return TriMesh(vertices, triangles)
