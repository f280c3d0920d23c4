"""Assembly of the stabilized Nitsche overlapping-mesh Stokes system.

The bilinear form is

    A_h = a_h(u, v) + b_h(v, p) + b_h(u, q) + s_h(u, v) - S_h(u, p; v, q)

with P1 velocity and pressure on both meshes.  Interface averages are
one-sided, ``<v> = v_2``, and jumps are ``[v] = v_2 - v_1``.
"""

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.sparse as sp

from .geometry import (
    build_cut_geometry,
    full_cell_quadrature,
    interface_quadrature,
    omega1_quadrature,
    overlap_quadrature,
)
from .spaces import CompositeStokesSpace, boundary_velocity_dofs

BULK_DEGREE = 2
INTERFACE_DEGREE = 2
STAB_DEGREE = 2


def _zero_field(x):
    return np.zeros((len(x), 2))


@dataclass
class StokesProblem:
    """Data and method parameters.

    ``f`` and ``g`` are vectorized: they map points of shape (n, 2) to
    vectors of shape (n, 2).  ``alpha`` is kept for completeness; with P1
    elements the Laplacian terms it multiplies vanish cellwise.
    """

    f: Callable = _zero_field
    g: Callable = _zero_field
    gamma: float = 10.0
    delta: float = 0.05
    alpha: int = 1
    beta: int = 1

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError("gamma must be positive")
        if not self.delta > 0:
            raise ValueError("delta must be positive")
        if self.alpha not in (-1, 0, 1):
            raise ValueError("alpha must be one of -1, 0, 1")
        if self.beta not in (-1, 1):
            raise ValueError("beta must be -1 or 1")


@dataclass
class LinearSystem:
    matrix: sp.csr_matrix
    rhs: np.ndarray
    nullspace: np.ndarray
    space: CompositeStokesSpace = field(repr=False)
    constrained_dofs: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.int64))
    constrained_values: np.ndarray = field(default_factory=lambda: np.empty(0))

    @property
    def free_dofs(self):
        mask = np.ones(len(self.rhs), dtype=bool)
        mask[self.constrained_dofs] = False
        return np.flatnonzero(mask)

    def reduced_matrix(self):
        """Matrix with the Dirichlet rows and columns deleted."""
        free = self.free_dofs
        return self.matrix[free][:, free]

    def reduced_nullspace(self):
        v = self.nullspace[self.free_dofs]
        return v / np.linalg.norm(v)


class _Triplets:
    def __init__(self, n):
        self.n = n
        self.rows, self.cols, self.vals = [], [], []

    def add(self, rows, cols, vals):
        """Add local blocks: ``rows`` (k, a), ``cols`` (k, b), ``vals`` (k, a, b)."""
        r = np.broadcast_to(rows[:, :, None], vals.shape)
        c = np.broadcast_to(cols[:, None, :], vals.shape)
        self.rows.append(r.ravel())
        self.cols.append(c.ravel())
        self.vals.append(vals.ravel())

    def add_symmetric_pair(self, rows, cols, vals):
        self.add(rows, cols, vals)
        self.add(cols, rows, np.transpose(vals, (0, 2, 1)))

    def tocsr(self):
        if not self.rows:
            return sp.csr_matrix((self.n, self.n))
        m = sp.coo_matrix(
            (np.concatenate(self.vals), (np.concatenate(self.rows), np.concatenate(self.cols))),
            shape=(self.n, self.n),
        ).tocsr()
        m.sum_duplicates()
        m.sort_indices()
        return m


def _basis_at(mesh, cells, points):
    lam = mesh.bary_const[cells] + np.einsum("kij,kj->ki", mesh.bary_grad[cells], points)
    return lam, mesh.bary_grad[cells]


def _velocity_rows(space, which, dofs, comp):
    return space.velocity_dofs(which, dofs, comp)


def _bulk_side(space, which, mesh, cells, points, weights, problem, out, rhs):
    sub = space.bg if which == "1" else space.ov
    dofs = sub.cell_dofs(cells)
    lam, grad = _basis_at(mesh, cells, points)
    w = weights[:, None, None]
    stiff = w * np.einsum("kid,kjd->kij", grad, grad)
    pdofs = space.pressure_dofs(which, dofs)
    fx = problem.f(points)
    for d in range(2):
        vrows = _velocity_rows(space, which, dofs, d)
        out.add(vrows, vrows, stiff)
        # b_h(v, p) = -(div v, p) and its transpose b_h(u, q)
        div = -w * grad[:, :, d][:, :, None] * lam[:, None, :]
        out.add_symmetric_pair(vrows, pdofs, div)
        np.add.at(rhs, vrows, weights[:, None] * fx[:, d][:, None] * lam)


def assemble_bulk(space, geom, problem, out=None, rhs=None):
    """Volume terms of a_h, b_h and the load (f, v) over Ω_1 ∪ Ω_2.

    Background integrals over ``T ∩ Ω_1`` use signed-weight quadrature:
    the full cell minus its overlap pieces.
    """
    out = out or _Triplets(space.total_dofs)
    rhs = np.zeros(space.total_dofs) if rhs is None else rhs
    q1 = omega1_quadrature(geom, BULK_DEGREE)
    _bulk_side(space, "1", geom.background, q1.bg_cells, q1.points, q1.weights, problem, out, rhs)
    ov = geom.overlapping
    pts, w, cells = full_cell_quadrature(ov, np.arange(ov.n_cells), BULK_DEGREE)
    _bulk_side(space, "2", ov, cells, pts, w, problem, out, rhs)
    return out, rhs


def _interface_basis(space, geom, q):
    lam1, _ = _basis_at(geom.background, q.bg_cells, q.points)
    lam2, grad2 = _basis_at(geom.overlapping, q.ov_cells, q.points)
    jump = np.concatenate([-lam1, lam2], axis=1)
    flux = np.concatenate([np.zeros_like(lam1), np.einsum("kid,kd->ki", grad2, q.normals)], axis=1)
    dofs1 = space.bg.cell_dofs(q.bg_cells)
    dofs2 = space.ov.cell_dofs(q.ov_cells)
    return jump, flux, lam2, dofs1, dofs2


def assemble_interface(space, geom, problem, out=None):
    """Nitsche coupling on Γ: consistency, symmetry, penalty and the
    pressure-average term ``(n·[v], <q>)``."""
    out = out or _Triplets(space.total_dofs)
    q = interface_quadrature(geom, INTERFACE_DEGREE)
    jump, flux, lam2, dofs1, dofs2 = _interface_basis(space, geom, q)
    w = q.weights[:, None, None]
    penalty = (problem.gamma / q.h)[:, None, None]
    jj = np.einsum("ki,kj->kij", jump, jump)
    fj = np.einsum("ki,kj->kij", flux, jump)
    local = w * (-fj - np.transpose(fj, (0, 2, 1)) + penalty * jj)
    p2 = space.pressure_dofs("2", dofs2)
    for d in range(2):
        vrows = np.concatenate(
            [_velocity_rows(space, "1", dofs1, d), _velocity_rows(space, "2", dofs2, d)], axis=1
        )
        out.add(vrows, vrows, local)
        coupling = w * (q.normals[:, d][:, None] * jump)[:, :, None] * lam2[:, None, :]
        out.add_symmetric_pair(vrows, p2, coupling)
    return out


def assemble_overlap_stabilization(space, geom, out=None):
    """s_h = (∇(u_1 - u_2), ∇(v_1 - v_2)) over the overlap region."""
    out = out or _Triplets(space.total_dofs)
    q = overlap_quadrature(geom, BULK_DEGREE)
    if len(q.weights) == 0:
        return out
    _, g1 = _basis_at(geom.background, q.bg_cells, q.points)
    _, g2 = _basis_at(geom.overlapping, q.ov_cells, q.points)
    diff = np.concatenate([g1, -g2], axis=1)
    local = q.weights[:, None, None] * np.einsum("kid,kjd->kij", diff, diff)
    dofs1 = space.bg.cell_dofs(q.bg_cells)
    dofs2 = space.ov.cell_dofs(q.ov_cells)
    for d in range(2):
        vrows = np.concatenate(
            [_velocity_rows(space, "1", dofs1, d), _velocity_rows(space, "2", dofs2, d)], axis=1
        )
        out.add(vrows, vrows, local)
    return out


def _least_squares_side(space, which, mesh, cells, problem, out, rhs):
    sub = space.bg if which == "1" else space.ov
    pts, w, qcells = full_cell_quadrature(mesh, cells, STAB_DEGREE)
    grad = mesh.bary_grad[qcells]
    h2 = mesh.cell_diameters[qcells] ** 2
    scale = problem.delta * problem.beta * h2 * w
    pdofs = space.pressure_dofs(which, sub.cell_dofs(qcells))
    out.add(pdofs, pdofs, -scale[:, None, None] * np.einsum("kid,kjd->kij", grad, grad))
    fx = problem.f(pts)
    np.add.at(rhs, pdofs, -scale[:, None] * np.einsum("kid,kd->ki", grad, fx))


def assemble_least_squares_stabilization(space, geom, problem, out=None, rhs=None):
    """-S_h and its load correction over full active background cells and
    all overlapping cells.  For P1 only the pressure-gradient part survives."""
    out = out or _Triplets(space.total_dofs)
    rhs = np.zeros(space.total_dofs) if rhs is None else rhs
    _least_squares_side(space, "1", geom.background, geom.t1_star_cells, problem, out, rhs)
    ov = geom.overlapping
    _least_squares_side(space, "2", ov, np.arange(ov.n_cells), problem, out, rhs)
    return out, rhs


def apply_dirichlet(system, space, bg, g):
    """Symmetric elimination of the outer-boundary velocity dofs."""
    dofs = boundary_velocity_dofs(space, bg)
    verts = space.bg.vertices[(dofs - space.offsets["u1"]) // 2]
    comps = (dofs - space.offsets["u1"]) % 2
    values = np.asarray(g(bg.vertices[verts]), dtype=float)[np.arange(len(dofs)), comps]

    A = system.matrix.tocsr()
    lifted = np.zeros(A.shape[0])
    lifted[dofs] = values
    rhs = system.rhs - A @ lifted
    keep = np.ones(A.shape[0])
    keep[dofs] = 0.0
    D = sp.diags(keep)
    A = (D @ A @ D + sp.diags(1.0 - keep)).tocsr()
    A.eliminate_zeros()
    A.sort_indices()
    rhs[dofs] = values
    return LinearSystem(A, rhs, system.nullspace, space, dofs, values)


def assemble_system(bg, ov, problem, with_sh=True, geom=None, apply_bc=True):
    """Assemble the full system; Dirichlet data is applied unless ``apply_bc`` is false."""
    geom = geom if geom is not None else build_cut_geometry(bg, ov)
    space = CompositeStokesSpace(bg, ov, geom.t1_star_cells)
    out = _Triplets(space.total_dofs)
    rhs = np.zeros(space.total_dofs)
    assemble_bulk(space, geom, problem, out, rhs)
    assemble_interface(space, geom, problem, out)
    if with_sh:
        assemble_overlap_stabilization(space, geom, out)
    assemble_least_squares_stabilization(space, geom, problem, out, rhs)
    system = LinearSystem(out.tocsr(), rhs, space.constant_pressure_vector(), space)
    if apply_bc:
        system = apply_dirichlet(system, space, bg, problem.g)
    return system
