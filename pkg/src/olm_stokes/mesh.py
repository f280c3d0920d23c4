"""Triangle meshes: storage, connectivity, structured generation and rigid motions."""

from dataclasses import dataclass

import numpy as np

# local facet i is opposite local vertex i
_LOCAL_FACETS = ((1, 2), (2, 0), (0, 1))


class SimplicialMesh:
    """Immutable 2D triangle mesh with facet connectivity built eagerly.

    Parameters
    ----------
    vertices : array-like of shape (nv, 2)
    cells : array-like of shape (nc, 3)
        Vertex indices, counter-clockwise.

    Attributes
    ----------
    facets : ndarray of shape (nf, 2)
        Sorted vertex pairs.
    facet_cells : ndarray of shape (nf, 2)
        Incident cells, ``-1`` in the second slot for exterior facets.
    facet_local : ndarray of shape (nf, 2)
        Local facet number inside each incident cell.
    cell_facets : ndarray of shape (nc, 3)
    boundary_facet_ids : ndarray
    """

    def __init__(self, vertices, cells):
        vertices = np.array(vertices, dtype=float)
        cells = np.array(cells, dtype=np.int64)
        if vertices.ndim != 2 or vertices.shape[1] != 2:
            raise ValueError("vertices must have shape (nv, 2)")
        if cells.ndim != 2 or cells.shape[1] != 3:
            raise ValueError("cells must have shape (nc, 3)")
        if cells.size and (cells.min() < 0 or cells.max() >= len(vertices)):
            raise ValueError("cell vertex index out of range")

        self.vertices = vertices
        self.cells = cells
        self.vertices.setflags(write=False)
        self.cells.setflags(write=False)

        p = vertices[cells]
        e1 = p[:, 1] - p[:, 0]
        e2 = p[:, 2] - p[:, 0]
        signed = 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])
        if np.any(signed <= 0.0):
            bad = int(np.flatnonzero(signed <= 0.0)[0])
            raise ValueError(f"cell {bad} is degenerate or clockwise")
        self.cell_areas = signed
        d01 = np.linalg.norm(p[:, 1] - p[:, 0], axis=1)
        d12 = np.linalg.norm(p[:, 2] - p[:, 1], axis=1)
        d20 = np.linalg.norm(p[:, 0] - p[:, 2], axis=1)
        self.cell_diameters = np.maximum(np.maximum(d01, d12), d20)

        self._build_facets()
        self._build_barycentric_maps()

    def _build_facets(self):
        nc = len(self.cells)
        pairs = np.concatenate([self.cells[:, list(lf)] for lf in _LOCAL_FACETS])
        pairs.sort(axis=1)
        owner = np.tile(np.arange(nc), 3)
        local = np.repeat(np.arange(3), nc)
        facets, inverse = np.unique(pairs, axis=0, return_inverse=True)
        inverse = inverse.ravel()
        nf = len(facets)

        facet_cells = np.full((nf, 2), -1, dtype=np.int64)
        facet_local = np.full((nf, 2), -1, dtype=np.int64)
        # stable order so the lower cell id lands in slot 0
        order = np.lexsort((owner, inverse))
        counts = np.bincount(inverse, minlength=nf)
        if np.any(counts > 2):
            raise ValueError("non-manifold mesh: facet shared by more than two cells")
        starts = np.concatenate([[0], np.cumsum(counts)[:-1]])
        slot = np.arange(len(order)) - starts[inverse[order]]
        facet_cells[inverse[order], slot] = owner[order]
        facet_local[inverse[order], slot] = local[order]

        cell_facets = np.empty((nc, 3), dtype=np.int64)
        cell_facets[owner, local] = inverse

        self.facets = facets
        self.facet_cells = facet_cells
        self.facet_local = facet_local
        self.cell_facets = cell_facets
        self.boundary_facet_ids = np.flatnonzero(counts == 1)
        self.facet_lengths = np.linalg.norm(
            self.vertices[facets[:, 1]] - self.vertices[facets[:, 0]], axis=1
        )

    def _build_barycentric_maps(self):
        # lambda_i(x) = bary_const[c, i] + bary_grad[c, i] . x
        p = self.vertices[self.cells]
        mat = np.concatenate([np.ones((len(p), 3, 1)), p], axis=2)
        inv = np.linalg.inv(mat)
        self.bary_const = inv[:, 0, :].copy()
        self.bary_grad = np.transpose(inv[:, 1:, :], (0, 2, 1)).copy()

    @property
    def n_vertices(self):
        return len(self.vertices)

    @property
    def n_cells(self):
        return len(self.cells)

    @property
    def h_max(self):
        return float(self.cell_diameters.max())

    @property
    def h_min(self):
        return float(self.cell_diameters.min())

    def cell_points(self, cell):
        return self.vertices[self.cells[cell]]

    def barycentric(self, cells, points):
        """Barycentric coordinates of ``points[k]`` in ``cells[k]``, shape (n, 3)."""
        cells = np.asarray(cells)
        points = np.asarray(points, dtype=float)
        return self.bary_const[cells] + np.einsum("kij,kj->ki", self.bary_grad[cells], points)

    def boundary_vertices(self):
        return np.unique(self.facets[self.boundary_facet_ids])

    def bounding_box(self):
        return self.vertices.min(axis=0), self.vertices.max(axis=0)

    def total_area(self):
        return float(self.cell_areas.sum())

    def __repr__(self):
        return f"SimplicialMesh(n_vertices={self.n_vertices}, n_cells={self.n_cells})"


@dataclass(frozen=True)
class MeshTransform:
    """Rotation by ``rotation_angle`` about ``center`` followed by ``translation``."""

    rotation_angle: float = 0.0
    center: tuple = (0.0, 0.0)
    translation: tuple = (0.0, 0.0)

    @property
    def matrix(self):
        c, s = np.cos(self.rotation_angle), np.sin(self.rotation_angle)
        return np.array([[c, -s], [s, c]])

    def apply(self, points):
        points = np.asarray(points, dtype=float)
        center = np.asarray(self.center, dtype=float)
        return (points - center) @ self.matrix.T + center + np.asarray(self.translation, dtype=float)


def build_structured_square_mesh(corner_min, corner_max, nx, ny):
    """Split each of ``nx * ny`` rectangles into two triangles along the
    lower-left to upper-right diagonal."""
    nx, ny = int(nx), int(ny)
    if nx < 1 or ny < 1:
        raise ValueError("nx and ny must be >= 1")
    x0, y0 = map(float, corner_min)
    x1, y1 = map(float, corner_max)
    if not (x0 < x1 and y0 < y1):
        raise ValueError("degenerate box: corner_min must be < corner_max componentwise")

    xs = np.linspace(x0, x1, nx + 1)
    ys = np.linspace(y0, y1, ny + 1)
    X, Y = np.meshgrid(xs, ys)
    vertices = np.column_stack([X.ravel(), Y.ravel()])

    i, j = np.meshgrid(np.arange(nx), np.arange(ny))
    ll = (j * (nx + 1) + i).ravel()
    lr = ll + 1
    ul = ll + nx + 1
    ur = ul + 1
    lower = np.column_stack([ll, lr, ur])
    upper = np.column_stack([ll, ur, ul])
    cells = np.empty((2 * nx * ny, 3), dtype=np.int64)
    cells[0::2] = lower
    cells[1::2] = upper
    return SimplicialMesh(vertices, cells)


def transform_mesh(mesh, t):
    return SimplicialMesh(t.apply(mesh.vertices), mesh.cells)


def cell_diameter(mesh, cell):
    if not 0 <= cell < mesh.n_cells:
        raise IndexError(f"cell index {cell} out of range")
    p = mesh.cell_points(cell)
    return float(max(np.linalg.norm(p[a] - p[b]) for a, b in _LOCAL_FACETS))


def boundary_facets(mesh):
    return mesh.boundary_facet_ids.copy()


def read_mesh(path):
    """Read the plain ASCII format: ``nv nc``, then vertex lines, then cell lines."""
    with open(path) as fh:
        tokens = fh.read().split()
    nv, nc = int(tokens[0]), int(tokens[1])
    data = tokens[2:]
    if len(data) != 2 * nv + 3 * nc:
        raise ValueError(f"{path}: expected {2 * nv + 3 * nc} values, found {len(data)}")
    vertices = np.array(data[: 2 * nv], dtype=float).reshape(nv, 2)
    cells = np.array(data[2 * nv :], dtype=np.int64).reshape(nc, 3)
    return SimplicialMesh(vertices, cells)


def write_mesh(mesh, path):
    with open(path, "w") as fh:
        fh.write(f"{mesh.n_vertices} {mesh.n_cells}\n")
        for x, y in mesh.vertices.tolist():
            fh.write(f"{x!r} {y!r}\n")
        for a, b, c in mesh.cells:
            fh.write(f"{a} {b} {c}\n")
