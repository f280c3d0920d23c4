"""Direct solves with a pinned pressure dof and dense spectral diagnostics."""

import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

log = logging.getLogger(__name__)

EPS_NULL = 1e-9
RESIDUAL_TOL = 1e-10


class SolverError(RuntimeError):
    pass


@dataclass
class SolveResult:
    x: np.ndarray
    residual: float
    pinned_dof: int


def _as_csr(matrix):
    return matrix.tocsr() if sp.issparse(matrix) else sp.csr_matrix(np.asarray(matrix, dtype=float))


def solve(system, pin=None):
    """Solve ``system`` with one pressure dof fixed to zero.

    ``pin`` selects the pressure dof (default: the first one).  The relative
    residual is measured against the unpinned system.
    """
    A = _as_csr(system.matrix)
    b = np.asarray(system.rhs, dtype=float)
    null = getattr(system, "nullspace", None)
    if pin is None and null is not None and np.any(null != 0):
        pin = int(np.flatnonzero(null)[0])

    if pin is not None:
        keep = np.ones(A.shape[0])
        keep[pin] = 0.0
        D = sp.diags(keep)
        e = np.zeros(A.shape[0])
        e[pin] = 1.0
        A_solve = (D @ A @ D + sp.diags(e)).tocsc()
        b_solve = b * keep
    else:
        A_solve, b_solve = A.tocsc(), b

    try:
        lu = spla.splu(A_solve)
    except RuntimeError as exc:
        raise SolverError(f"factorization failed for system of size {A.shape[0]}: {exc}") from exc
    x = lu.solve(b_solve)
    if not np.all(np.isfinite(x)):
        raise SolverError("factorization produced non-finite values; matrix is singular beyond the pressure mode")

    bnorm = np.linalg.norm(b)
    residual = float(np.linalg.norm(A @ x - b) / (bnorm if bnorm > 0 else 1.0))
    if residual > RESIDUAL_TOL:
        log.warning("relative residual %.3e exceeds %.0e", residual, RESIDUAL_TOL)
    return SolveResult(x, residual, -1 if pin is None else pin)


@dataclass
class Spectrum:
    abs_max: float
    abs_min_nonzero: float
    n_zero: int

    @property
    def kappa(self):
        return self.abs_max / self.abs_min_nonzero


def spectrum_summary(matrix, eps_null=EPS_NULL):
    A = matrix.toarray() if sp.issparse(matrix) else np.asarray(matrix, dtype=float)
    asym = np.abs(A - A.T).max()
    if asym > 1e-10 * max(np.abs(A).max(), 1e-300):
        raise ValueError(f"matrix is not symmetric (max asymmetry {asym:.3e})")
    lam = np.abs(sla.eigvalsh(0.5 * (A + A.T)))
    top = lam.max()
    zero = lam < eps_null * top
    if zero.all():
        raise SolverError("matrix has no nonzero eigenvalue")
    return Spectrum(float(top), float(lam[~zero].min()), int(zero.sum()))


def condition_number(matrix, nullspace=None, eps_null=EPS_NULL):
    """Ratio of the largest to the smallest nonzero eigenvalue modulus.

    Eigenvalues below ``eps_null * max|λ|`` count as zero; more of them than
    the nullspace dimension signals a broken assembly.
    """
    expected = 0 if nullspace is None else np.atleast_2d(nullspace).shape[0]
    spectrum = spectrum_summary(matrix, eps_null)
    if spectrum.n_zero > expected:
        raise SolverError(f"{spectrum.n_zero} zero eigenvalues found, expected at most {expected}")
    return spectrum.kappa


def _deflation_basis(m, nullspace):
    """Orthonormal basis of the M-orthogonal complement of ``nullspace``."""
    z = np.atleast_2d(np.asarray(nullspace, dtype=float))
    return sla.null_space(z @ m)


def generalized_min_singular(a, m, nullspace=None):
    """Smallest generalized singular value of symmetric ``a`` in the
    ``m``-inner product, i.e. ``min |λ|`` of the pencil ``a x = λ m x``,
    after deflating ``nullspace``."""
    A = a.toarray() if sp.issparse(a) else np.asarray(a, dtype=float)
    M = m.toarray() if sp.issparse(m) else np.asarray(m, dtype=float)
    A = 0.5 * (A + A.T)
    M = 0.5 * (M + M.T)
    if nullspace is not None:
        Z = _deflation_basis(M, nullspace)
        A = Z.T @ A @ Z
        M = Z.T @ M @ Z
    try:
        lam = sla.eigvalsh(A, M)
    except np.linalg.LinAlgError as exc:
        raise ValueError("norm matrix is not positive definite on the given subspace") from exc
    return float(np.abs(lam).min())
