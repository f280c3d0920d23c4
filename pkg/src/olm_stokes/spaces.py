"""Continuous P1 spaces and the composite velocity/pressure numbering."""

import numpy as np

from .geometry import EPS_GEOM


class ScalarP1Space:
    """Vertex-based P1 space on a subset of cells of ``mesh``.

    Only vertices touched by ``cells`` carry a degree of freedom; they are
    numbered in increasing vertex order.
    """

    def __init__(self, mesh, cells=None):
        self.mesh = mesh
        self.cells = np.arange(mesh.n_cells) if cells is None else np.asarray(cells, dtype=np.int64)
        self.vertices = np.unique(mesh.cells[self.cells])
        self.vertex_to_dof = np.full(mesh.n_vertices, -1, dtype=np.int64)
        self.vertex_to_dof[self.vertices] = np.arange(len(self.vertices))

    @property
    def n_dofs(self):
        return len(self.vertices)

    def cell_dofs(self, cells):
        dofs = self.vertex_to_dof[self.mesh.cells[cells]]
        if np.any(dofs < 0):
            raise ValueError("cell is not part of this space")
        return dofs

    def dof_coordinates(self):
        return self.mesh.vertices[self.vertices]

    def interpolate(self, fn):
        """Nodal values of a vectorized ``fn(points)``."""
        return np.asarray(fn(self.dof_coordinates()), dtype=float)


def eval_basis(space, cell, p, eps=EPS_GEOM):
    """Values and gradients of the three hat functions of ``cell`` at ``p``."""
    mesh = space.mesh
    lam = mesh.bary_const[cell] + mesh.bary_grad[cell] @ np.asarray(p, dtype=float)
    if lam.min() < -eps:
        raise ValueError(f"point {p} is outside cell {cell}")
    return lam, mesh.bary_grad[cell].copy()


class CompositeStokesSpace:
    """Direct sum of P1 velocity/pressure spaces on both meshes.

    Global blocks are ordered ``[u1, p1, u2, p2]``; velocity components are
    interleaved per vertex inside a block, i.e. ``offset + 2 * dof + comp``.
    """

    def __init__(self, background, overlapping, active_cells):
        self.bg = ScalarP1Space(background, active_cells)
        self.ov = ScalarP1Space(overlapping)
        n1, n2 = self.bg.n_dofs, self.ov.n_dofs
        sizes = [2 * n1, n1, 2 * n2, n2]
        starts = np.concatenate([[0], np.cumsum(sizes)])
        self.offsets = dict(zip(("u1", "p1", "u2", "p2"), starts[:4].tolist()))
        self.block_sizes = dict(zip(("u1", "p1", "u2", "p2"), sizes))
        self.total_dofs = int(starts[-1])

    def block_slice(self, name):
        start = self.offsets[name]
        return slice(start, start + self.block_sizes[name])

    def velocity_dofs(self, which, scalar_dofs, comp):
        return self.offsets["u" + which] + 2 * np.asarray(scalar_dofs) + comp

    def pressure_dofs(self, which, scalar_dofs):
        return self.offsets["p" + which] + np.asarray(scalar_dofs)

    def pressure_indices(self):
        return np.concatenate(
            [np.arange(self.total_dofs)[self.block_slice("p1")], np.arange(self.total_dofs)[self.block_slice("p2")]]
        )

    def velocity_indices(self):
        return np.concatenate(
            [np.arange(self.total_dofs)[self.block_slice("u1")], np.arange(self.total_dofs)[self.block_slice("u2")]]
        )

    def constant_pressure_vector(self):
        v = np.zeros(self.total_dofs)
        v[self.pressure_indices()] = 1.0
        return v / np.linalg.norm(v)

    def split(self, x):
        """Return ``(u1, p1, u2, p2)`` with velocities shaped (n, 2)."""
        x = np.asarray(x)
        return (
            x[self.block_slice("u1")].reshape(-1, 2),
            x[self.block_slice("p1")],
            x[self.block_slice("u2")].reshape(-1, 2),
            x[self.block_slice("p2")],
        )

    def join(self, u1, p1, u2, p2):
        return np.concatenate([np.ravel(u1), np.ravel(p1), np.ravel(u2), np.ravel(p2)])

    def interpolate(self, u, p):
        """Nodal interpolant of vectorized ``u(points) -> (n, 2)`` and ``p``."""
        return self.join(self.bg.interpolate(u), self.bg.interpolate(p), self.ov.interpolate(u), self.ov.interpolate(p))


def boundary_velocity_dofs(space, bg):
    """Background velocity dofs (both components) on the outer boundary."""
    verts = bg.boundary_vertices()
    dofs = space.bg.vertex_to_dof[verts]
    if np.any(dofs < 0):
        raise ValueError("boundary vertex without an active dof; interface touches the outer boundary")
    dofs = np.sort(dofs)
    return np.sort(np.concatenate([space.velocity_dofs("1", dofs, 0), space.velocity_dofs("1", dofs, 1)]))
