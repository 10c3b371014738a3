"""Uniform triangulations of the unit square with edge adjacency and
boundary classification.

Edges carry one fixed global orientation: the tangent runs from the lower
vertex index to the higher one, and the unit normal is that tangent rotated
by -90 degrees.  Per-triangle outward normals are recovered through the
sign table ``tri_edge_signs``, which keeps jump terms across edges
well-defined and reproducible.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "SIDES",
    "SIDE_NORMALS",
    "Mesh",
    "BoundaryConfig",
    "build_uniform_mesh",
    "classify_boundary",
    "edge_weight",
    "boundary_side",
    "dump_mesh",
]

SIDES = ("bottom", "right", "top", "left")

# outward unit normals of the unit square, by side
SIDE_NORMALS = {
    "bottom": np.array([0.0, -1.0]),
    "right": np.array([1.0, 0.0]),
    "top": np.array([0.0, 1.0]),
    "left": np.array([-1.0, 0.0]),
}

_SIDE_TOL = 1e-12


class Mesh:
    """Immutable triangle mesh with full edge/element adjacency.

    Attributes
    ----------
    vertices : (V, 2) float array
    triangles : (T, 3) int array, counter-clockwise vertex triples
    edges : (E, 2) int array, each row a sorted vertex pair (lo, hi)
    edge_tris : tuple of 1- or 2-tuples, triangles adjacent to each edge
    tri_edges : (T, 3) int array, edge index of local edge (v_i, v_{i+1})
    tri_edge_signs : (T, 3) int array, +1 where the global edge normal
        already points out of the triangle, -1 otherwise
    h_tri : (T,) triangle diameters (longest edge)
    h : max diameter over the partition
    """

    def __init__(self, vertices, triangles):
        vertices = np.array(vertices, dtype=float)
        triangles = np.array(triangles, dtype=int)
        if vertices.ndim != 2 or vertices.shape[1] != 2:
            raise ValueError("vertices must be an array of 2D points")
        if triangles.ndim != 2 or triangles.shape[1] != 3:
            raise ValueError("triangles must be vertex index triples")
        self.vertices = vertices
        self.triangles = triangles

        v = vertices
        d1 = v[triangles[:, 1]] - v[triangles[:, 0]]
        d2 = v[triangles[:, 2]] - v[triangles[:, 0]]
        cross = d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]
        if np.any(cross <= 0.0):
            raise ValueError("triangles must be counter-clockwise with positive area")
        self.tri_areas = 0.5 * cross
        self.tri_centroids = v[triangles].mean(axis=1)

        edge_index: dict[tuple[int, int], int] = {}
        edge_list: list[tuple[int, int]] = []
        adjacency: list[list[int]] = []
        tri_edges = np.zeros_like(triangles)
        for t in range(len(triangles)):
            for loc in range(3):
                a = triangles[t, loc]
                b = triangles[t, (loc + 1) % 3]
                key = (a, b) if a < b else (b, a)
                e = edge_index.get(key)
                if e is None:
                    e = len(edge_list)
                    edge_index[key] = e
                    edge_list.append(key)
                    adjacency.append([])
                adjacency[e].append(t)
                tri_edges[t, loc] = e
        if any(len(adj) > 2 for adj in adjacency):
            raise ValueError("non-manifold mesh: an edge with more than 2 triangles")
        self.edges = np.array(edge_list, dtype=int)
        self.edge_tris = tuple(tuple(adj) for adj in adjacency)
        self.tri_edges = tri_edges

        tangents = v[self.edges[:, 1]] - v[self.edges[:, 0]]
        self.edge_lengths = np.hypot(tangents[:, 0], tangents[:, 1])
        self.edge_normals = (
            np.column_stack([tangents[:, 1], -tangents[:, 0]])
            / self.edge_lengths[:, None]
        )
        self.edge_midpoints = 0.5 * (v[self.edges[:, 0]] + v[self.edges[:, 1]])

        # per-triangle outward sign of the global edge normal
        mids = self.edge_midpoints[tri_edges]             # (T, 3, 2)
        normals = self.edge_normals[tri_edges]            # (T, 3, 2)
        towards = mids - self.tri_centroids[:, None, :]
        dots = np.einsum("tlc,tlc->tl", normals, towards)
        self.tri_edge_signs = np.where(dots > 0.0, 1, -1)

        self.h_tri = self.edge_lengths[tri_edges].max(axis=1)
        self.h = float(self.h_tri.max())

        counts = np.array([len(adj) for adj in adjacency])
        self.is_boundary_edge = counts == 1
        self.boundary_edges = np.nonzero(self.is_boundary_edge)[0]

        for arr in (self.vertices, self.triangles, self.edges, self.tri_edges,
                    self.tri_edge_signs, self.edge_lengths, self.edge_normals,
                    self.edge_midpoints, self.tri_areas, self.tri_centroids,
                    self.h_tri, self.is_boundary_edge, self.boundary_edges):
            arr.setflags(write=False)

    @property
    def n_vertices(self):
        return len(self.vertices)

    @property
    def n_triangles(self):
        return len(self.triangles)

    @property
    def n_edges(self):
        return len(self.edges)

    def tri_vertices(self, t):
        """Coordinates (3, 2) of triangle t."""
        return self.vertices[self.triangles[t]]

    def outward_normal(self, t, e):
        """Unit normal of edge e pointing out of triangle t."""
        loc = np.nonzero(self.tri_edges[t] == e)[0]
        if loc.size == 0:
            raise ValueError(f"edge {e} is not an edge of triangle {t}")
        return self.tri_edge_signs[t, loc[0]] * self.edge_normals[e]


class BoundaryConfig:
    """Independent membership flags of each boundary edge in Gamma_d and
    Gamma_n.  Both flags may be set on the same edge (the Cauchy case)."""

    def __init__(self, mesh, in_gamma_d, in_gamma_n):
        in_gamma_d = np.array(in_gamma_d, dtype=bool)
        in_gamma_n = np.array(in_gamma_n, dtype=bool)
        if in_gamma_d.shape != (mesh.n_edges,) or in_gamma_n.shape != (mesh.n_edges,):
            raise ValueError("flags must be given for every edge")
        interior = ~mesh.is_boundary_edge
        if np.any(in_gamma_d & interior) or np.any(in_gamma_n & interior):
            raise ValueError("boundary flags set on an interior edge")
        self.mesh = mesh
        self.in_gamma_d = in_gamma_d
        self.in_gamma_n = in_gamma_n
        in_gamma_d.setflags(write=False)
        in_gamma_n.setflags(write=False)

    @property
    def gamma_d_edges(self):
        return np.nonzero(self.in_gamma_d)[0]

    @property
    def gamma_n_edges(self):
        return np.nonzero(self.in_gamma_n)[0]

    @property
    def gamma_n_complement_edges(self):
        """Boundary edges not in Gamma_n."""
        return np.nonzero(self.mesh.is_boundary_edge & ~self.in_gamma_n)[0]

    @property
    def gamma_d_complement_edges(self):
        """Boundary edges not in Gamma_d."""
        return np.nonzero(self.mesh.is_boundary_edge & ~self.in_gamma_d)[0]


def build_uniform_mesh(n):
    """Uniform triangulation of (0,1)^2 with 2*n^2 triangles.

    Each of the n x n sub-squares is split along the negative-slope
    diagonal (top-left to bottom-right corner).
    """
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise ValueError("refinement level n must be a positive integer")
    coords = np.linspace(0.0, 1.0, n + 1)
    xg, yg = np.meshgrid(coords, coords)        # row-major in j (y), then i (x)
    vertices = np.column_stack([xg.ravel(), yg.ravel()])

    def vid(i, j):
        return j * (n + 1) + i

    triangles = []
    for j in range(n):
        for i in range(n):
            v00 = vid(i, j)
            v10 = vid(i + 1, j)
            v01 = vid(i, j + 1)
            v11 = vid(i + 1, j + 1)
            # negative-slope diagonal v01 -- v10
            triangles.append((v00, v10, v01))
            triangles.append((v10, v11, v01))
    mesh = Mesh(vertices, triangles)
    assert abs(mesh.tri_areas.sum() - 1.0) < 1e-12
    return mesh


def boundary_side(mesh, e):
    """Side of the unit square ('bottom'/'right'/'top'/'left') that
    boundary edge e lies on."""
    if not mesh.is_boundary_edge[e]:
        raise ValueError(f"edge {e} is not a boundary edge")
    pts = mesh.vertices[mesh.edges[e]]
    for side, (axis, value) in {
        "bottom": (1, 0.0), "right": (0, 1.0), "top": (1, 1.0), "left": (0, 0.0),
    }.items():
        if np.all(np.abs(pts[:, axis] - value) < _SIDE_TOL):
            return side
    raise ValueError(
        f"boundary edge {e} does not lie on an axis-aligned side of the unit square"
    )


def classify_boundary(mesh, dirichlet_sides, neumann_sides):
    """Flag every boundary edge lying on a named side of the square.

    dirichlet_sides / neumann_sides are iterables over
    {'bottom', 'right', 'top', 'left'}; they may overlap (Cauchy data).
    """
    d_sides = frozenset(dirichlet_sides)
    n_sides = frozenset(neumann_sides)
    for side in d_sides | n_sides:
        if side not in SIDES:
            raise ValueError(f"unknown side {side!r}; expected one of {SIDES}")
    if not d_sides and not n_sides:
        raise ValueError("no boundary data anywhere: Gamma_d and Gamma_n both empty")
    in_gamma_d = np.zeros(mesh.n_edges, dtype=bool)
    in_gamma_n = np.zeros(mesh.n_edges, dtype=bool)
    for e in mesh.boundary_edges:
        side = boundary_side(mesh, e)
        in_gamma_d[e] = side in d_sides
        in_gamma_n[e] = side in n_sides
    return BoundaryConfig(mesh, in_gamma_d, in_gamma_n)


def edge_weight(mesh, e):
    """Mesh weight of an edge in the residual norms: the max diameter of
    the adjacent triangles (the single one, on boundary edges)."""
    if not 0 <= e < mesh.n_edges:
        raise ValueError(f"edge index {e} out of range")
    return float(max(mesh.h_tri[t] for t in mesh.edge_tris[e]))


def dump_mesh(mesh, config=None):
    """Plain-text dump: vertices (x y), triangles (i j k), edges
    (i j boundary_flag gd_flag gn_flag).  Used by golden-file tests."""
    lines = [f"vertices {mesh.n_vertices}"]
    for x, y in mesh.vertices:
        lines.append(f"{x:.17g} {y:.17g}")
    lines.append(f"triangles {mesh.n_triangles}")
    for i, j, k in mesh.triangles:
        lines.append(f"{i} {j} {k}")
    lines.append(f"edges {mesh.n_edges}")
    for e in range(mesh.n_edges):
        i, j = mesh.edges[e]
        b = int(mesh.is_boundary_edge[e])
        gd = int(config.in_gamma_d[e]) if config is not None else 0
        gn = int(config.in_gamma_n[e]) if config is not None else 0
        lines.append(f"{i} {j} {b} {gd} {gn}")
    return "\n".join(lines) + "\n"
