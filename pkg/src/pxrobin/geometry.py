"""Structured triangulations of rectangles with volume and edge quadrature.

Meshes are immutable after construction: every operation here is a pure
function of its inputs, so meshes can be shared freely between threads.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import MeshError

# Side tags for boundary edges, in the order the closed loop is emitted.
SIDE_BOTTOM = "bottom"
SIDE_RIGHT = "right"
SIDE_TOP = "top"
SIDE_LEFT = "left"


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """Pointwise integration rule on a reference element.

    ``points`` are barycentric triples for triangle rules and parametric
    coordinates in [0, 1] for edge rules.  Weights sum to the reference
    measure: 1/2 for the unit triangle, 1 for the unit segment.
    """

    kind: str
    degree: int
    points: np.ndarray
    weights: np.ndarray


def triangle_quadrature(degree):
    """Symmetric rule on the reference triangle, exact to ``degree``.

    Supported degrees: 1 (centroid), 2 (edge midpoints), 4 (6-point rule).
    """
    if degree == 1:
        pts = np.array([[1 / 3, 1 / 3, 1 / 3]])
        wts = np.array([0.5])
    elif degree == 2:
        pts = np.array([[0.5, 0.5, 0.0], [0.0, 0.5, 0.5], [0.5, 0.0, 0.5]])
        wts = np.full(3, 1 / 6)
    elif degree == 4:
        a, b = 0.445948490915965, 0.108103018168070
        c, d = 0.091576213509771, 0.816847572980459
        wa, wc = 0.223381589678011, 0.109951743655322
        pts = np.array(
            [
                [b, a, a], [a, b, a], [a, a, b],
                [d, c, c], [c, d, c], [c, c, d],
            ]
        )
        wts = 0.5 * np.array([wa, wa, wa, wc, wc, wc])
    else:
        raise ValueError(f"unsupported triangle quadrature degree {degree}; use 1, 2 or 4")
    return QuadratureRule("triangle", degree, pts, wts)


def edge_quadrature(degree):
    """Gauss rule on the reference segment [0, 1], exact to ``degree``.

    Supported degrees: 1 (midpoint), 3 (two-point Gauss).
    """
    if degree == 1:
        pts = np.array([0.5])
        wts = np.array([1.0])
    elif degree == 3:
        r = np.sqrt(3.0) / 6.0
        pts = np.array([0.5 - r, 0.5 + r])
        wts = np.array([0.5, 0.5])
    else:
        raise ValueError(f"unsupported edge quadrature degree {degree}; use 1 or 3")
    return QuadratureRule("edge", degree, pts, wts)


@dataclass(frozen=True, eq=False)
class Mesh:
    """Conforming triangulation of a rectangle.

    ``vertices``: (V, 2) coordinates; ``triangles``: (T, 3) vertex indices,
    counterclockwise; ``boundary_edges``: (B, 2) vertex indices forming the
    closed boundary loop, counterclockwise; ``boundary_sides``: tag per edge.
    ``h`` is the longest edge in the mesh.
    """

    vertices: np.ndarray
    triangles: np.ndarray
    boundary_edges: np.ndarray
    boundary_sides: tuple
    h: float
    extent: tuple = field(default=None)

    @property
    def num_vertices(self):
        return self.vertices.shape[0]

    @property
    def num_triangles(self):
        return self.triangles.shape[0]

    def triangle_areas(self):
        """Signed areas of all triangles (positive for valid meshes)."""
        p = self.vertices[self.triangles]
        d1 = p[:, 1] - p[:, 0]
        d2 = p[:, 2] - p[:, 0]
        return 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])

    def edge_lengths(self):
        """Lengths of the boundary edges."""
        p = self.vertices[self.boundary_edges]
        return np.linalg.norm(p[:, 1] - p[:, 0], axis=1)


def build_rect_mesh(x0, y0, x1, y1, nx, ny):
    """Triangulate [x0,x1] x [y0,y1] with an nx-by-ny grid of split cells.

    Vertices are numbered row-major (x fastest); every cell is split along
    the diagonal from its lower-left to its upper-right corner, which keeps
    the construction fully deterministic.  Produces 2*nx*ny triangles,
    (nx+1)*(ny+1) vertices and 2*(nx+ny) boundary edges.
    """
    if not (x1 > x0 and y1 > y0):
        raise ValueError(f"empty extent: ({x0},{y0})-({x1},{y1})")
    nx, ny = int(nx), int(ny)
    if nx < 1 or ny < 1:
        raise ValueError(f"subdivision counts must be positive, got nx={nx}, ny={ny}")

    xs = np.linspace(x0, x1, nx + 1)
    ys = np.linspace(y0, y1, ny + 1)
    xx, yy = np.meshgrid(xs, ys)
    vertices = np.column_stack([xx.ravel(), yy.ravel()])

    def vid(i, j):
        return i * (nx + 1) + j

    tris = np.empty((2 * nx * ny, 3), dtype=np.int64)
    t = 0
    for i in range(ny):
        for j in range(nx):
            bl, br = vid(i, j), vid(i, j + 1)
            tl, tr = vid(i + 1, j), vid(i + 1, j + 1)
            tris[t] = (bl, br, tr)
            tris[t + 1] = (bl, tr, tl)
            t += 2

    edges = []
    sides = []
    for j in range(nx):
        edges.append((vid(0, j), vid(0, j + 1)))
        sides.append(SIDE_BOTTOM)
    for i in range(ny):
        edges.append((vid(i, nx), vid(i + 1, nx)))
        sides.append(SIDE_RIGHT)
    for j in range(nx, 0, -1):
        edges.append((vid(ny, j), vid(ny, j - 1)))
        sides.append(SIDE_TOP)
    for i in range(ny, 0, -1):
        edges.append((vid(i, 0), vid(i - 1, 0)))
        sides.append(SIDE_LEFT)

    dx, dy = (x1 - x0) / nx, (y1 - y0) / ny
    h = float(np.hypot(dx, dy))
    mesh = Mesh(
        vertices=vertices,
        triangles=tris,
        boundary_edges=np.array(edges, dtype=np.int64),
        boundary_sides=tuple(sides),
        h=h,
        extent=(float(x0), float(y0), float(x1), float(y1)),
    )
    _check_mesh(mesh)
    return mesh


def _check_mesh(mesh):
    """Validate orientation and edge incidence counts."""
    areas = mesh.triangle_areas()
    if np.any(areas <= 0):
        raise MeshError("triangle with nonpositive signed area")
    counts = {}
    for tri in mesh.triangles:
        for a, b in ((tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])):
            key = (min(a, b), max(a, b))
            counts[key] = counts.get(key, 0) + 1
    for a, b in mesh.boundary_edges:
        if counts.get((min(a, b), max(a, b)), 0) != 1:
            raise MeshError(f"boundary edge ({a},{b}) not incident to exactly one triangle")
    interior = sum(1 for c in counts.values() if c == 2)
    boundary = sum(1 for c in counts.values() if c == 1)
    if boundary != len(mesh.boundary_edges):
        raise MeshError("boundary edge list does not cover the mesh boundary")
    if interior + boundary != len(counts):
        raise MeshError("edge shared by more than two triangles")


def elem_gradients(mesh):
    """Constant gradients of the three P1 shape functions on each triangle.

    Returns an array of shape (T, 3, 2); row ``t, i`` is the gradient of the
    hat function of local vertex ``i`` on triangle ``t``.  The three rows of
    each triangle sum to zero (partition of unity), and interpolating an
    affine function reproduces its gradient exactly.
    """
    p = mesh.vertices[mesh.triangles]
    areas = mesh.triangle_areas()
    tiny = 1e-14 * mesh.h ** 2
    if np.any(areas < tiny):
        raise MeshError(f"degenerate triangle: area below {tiny:g}")
    grads = np.empty((mesh.num_triangles, 3, 2))
    for i in range(3):
        a = p[:, (i + 1) % 3]
        b = p[:, (i + 2) % 3]
        grads[:, i, 0] = a[:, 1] - b[:, 1]
        grads[:, i, 1] = b[:, 0] - a[:, 0]
    grads /= (2.0 * areas)[:, None, None]
    return grads


def volume_quad_points(mesh, rule):
    """Physical coordinates of a triangle rule on every triangle, (T, Q, 2)."""
    p = mesh.vertices[mesh.triangles]
    return np.einsum("qk,tkd->tqd", rule.points, p)


def edge_quad_points(mesh, rule):
    """Physical coordinates of an edge rule on every boundary edge, (E, Q, 2)."""
    p = mesh.vertices[mesh.boundary_edges]
    t = rule.points
    return (1.0 - t)[None, :, None] * p[:, None, 0, :] + t[None, :, None] * p[:, None, 1, :]


def export_mesh_csv(mesh, path):
    """Write the mesh as sectioned CSV: vertices, triangles, boundary edges."""
    with open(path, "w", encoding="ascii") as f:
        f.write("# vertices\n")
        for i, (x, y) in enumerate(mesh.vertices):
            f.write(f"{i},{x:.17g},{y:.17g}\n")
        f.write("# triangles\n")
        for i, (a, b, c) in enumerate(mesh.triangles):
            f.write(f"{i},{a},{b},{c}\n")
        f.write("# boundary_edges\n")
        for i, (a, b) in enumerate(mesh.boundary_edges):
            f.write(f"{i},{a},{b}\n")
