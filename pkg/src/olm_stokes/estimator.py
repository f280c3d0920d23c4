"""Estimator-style front end for the overlapping-mesh Stokes solver."""

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .assembly import StokesProblem, assemble_system
from .geometry import build_cut_geometry, locate_points
from .linalg import solve
from .validation import check_choice, check_mesh, check_points, check_positive, check_vector_field


class OverlappingMeshStokes(BaseEstimator):
    """Stokes flow on a background mesh with an overlapping mesh on top.

    ``fit`` builds the cut geometry, assembles the Nitsche-coupled system
    and solves it; ``predict`` evaluates velocity and pressure at points,
    using the overlapping mesh wherever it covers the point.

    Parameters
    ----------
    gamma : float, default=10.0
        Nitsche penalty.
    delta : float, default=0.05
        Weight of the cellwise least-squares pressure stabilization.
    alpha : {-1, 0, 1}, default=1
        Sign in front of the velocity Laplacian of the test function;
        without effect for linear elements.
    beta : {-1, 1}, default=1
    with_sh : bool, default=True
        Include the gradient penalty on the overlap region.

    Attributes
    ----------
    geometry_ : CutGeometry
    system_ : LinearSystem
    space_ : CompositeStokesSpace
    coef_ : ndarray
        Solution vector in the global dof numbering.
    residual_ : float
    """

    def __init__(self, gamma=10.0, delta=0.05, alpha=1, beta=1, with_sh=True):
        self.gamma = gamma
        self.delta = delta
        self.alpha = alpha
        self.beta = beta
        self.with_sh = with_sh

    def _problem(self, f, g):
        return StokesProblem(
            f=check_vector_field(f, "f"),
            g=check_vector_field(g, "g"),
            gamma=check_positive(self.gamma, "gamma"),
            delta=check_positive(self.delta, "delta"),
            alpha=check_choice(self.alpha, "alpha", (-1, 0, 1)),
            beta=check_choice(self.beta, "beta", (-1, 1)),
        )

    def fit(self, background, overlapping, f=None, g=None):
        check_mesh(background, "background")
        check_mesh(overlapping, "overlapping")
        problem = self._problem(f, g)
        self.geometry_ = build_cut_geometry(background, overlapping)
        self.system_ = assemble_system(
            background, overlapping, problem, with_sh=bool(self.with_sh), geom=self.geometry_
        )
        self.space_ = self.system_.space
        result = solve(self.system_)
        self.coef_ = result.x
        self.residual_ = result.residual
        self.n_dofs_ = self.space_.total_dofs
        return self

    def fields(self):
        """Nodal ``(u1, p1, u2, p2)``; velocities have shape (n, 2)."""
        check_is_fitted(self, "coef_")
        return self.space_.split(self.coef_)

    def predict(self, X):
        """Velocity and pressure at points, shape (n, 3): ``[ux, uy, p]``.

        Points outside the domain get NaN.
        """
        check_is_fitted(self, "coef_")
        X = check_points(X)
        out = np.full((len(X), 3), np.nan)
        u1, p1, u2, p2 = self.fields()
        geom = self.geometry_
        for mesh, sub, u, p, cells in (
            (geom.overlapping, self.space_.ov, u2, p2, None),
            (geom.background, self.space_.bg, u1, p1, geom.t1_star_cells),
        ):
            todo = np.flatnonzero(np.isnan(out[:, 0]))
            if not len(todo):
                break
            found = locate_points(mesh, X[todo])
            if cells is not None:
                found[~np.isin(found, cells)] = -1
            hit = found >= 0
            idx, c = todo[hit], found[hit]
            lam = mesh.barycentric(c, X[idx])
            dofs = sub.cell_dofs(c)
            out[idx, :2] = np.einsum("ki,kic->kc", lam, u[dofs])
            out[idx, 2] = np.einsum("ki,ki->k", lam, p[dofs])
        return out
