import numpy as np
import pytest
import scipy.sparse as sp

from olm_stokes.assembly import LinearSystem, StokesProblem, assemble_system
from olm_stokes.experiments import box_mesh_pair
from olm_stokes.linalg import (
    SolverError,
    condition_number,
    generalized_min_singular,
    solve,
    spectrum_summary,
)


class _Plain:
    def __init__(self, matrix, rhs, nullspace=None):
        self.matrix, self.rhs, self.nullspace = matrix, rhs, nullspace


def test_identity_system():
    b = np.array([1.0, -2.0, 3.0])
    np.testing.assert_allclose(solve(_Plain(sp.identity(3), b)).x, b)


def test_two_by_two():
    res = solve(_Plain(np.array([[2.0, 1.0], [1.0, 2.0]]), np.array([3.0, 3.0])))
    np.testing.assert_allclose(res.x, [1.0, 1.0], atol=1e-15)
    assert res.residual <= 1e-15
    assert res.pinned_dof == -1


def test_singular_without_pin_raises():
    with pytest.raises(SolverError):
        solve(_Plain(sp.csr_matrix(np.array([[1.0, 0.0], [0.0, 0.0]])), np.array([1.0, 0.0])))


def test_pin_choice_only_shifts_pressure(patch_solution):
    bg, ov = box_mesh_pair(5, 3, 0.3)
    sol = patch_solution
    system = assemble_system(bg, ov, StokesProblem(f=sol.f, g=sol.u))
    space = system.space
    p = space.pressure_indices()
    a = solve(system).x
    b = solve(system, pin=int(p[-1])).x
    v = space.velocity_indices()
    np.testing.assert_allclose(a[v], b[v], atol=1e-10)
    shift = a[p] - b[p]
    assert np.ptp(shift) <= 1e-10


def test_permutation_invariance():
    rng = np.random.default_rng(1)
    m = rng.random((6, 6))
    m = m + m.T + 6 * np.eye(6)
    b = rng.random(6)
    perm = rng.permutation(6)
    x = solve(_Plain(m, b)).x
    y = solve(_Plain(m[np.ix_(perm, perm)], b[perm])).x
    np.testing.assert_allclose(y, x[perm], atol=1e-13)


def test_condition_number_examples():
    assert condition_number(np.diag([4.0, 2.0, 1.0])) == pytest.approx(4.0)
    assert condition_number(np.diag([3.0, 0.0, 1.0]), nullspace=np.array([0.0, 1.0, 0.0])) == pytest.approx(3.0)
    with pytest.raises(SolverError):
        condition_number(np.diag([3.0, 0.0, 1.0]))


def test_condition_number_rejects_asymmetric():
    with pytest.raises(ValueError):
        condition_number(np.array([[1.0, 2.0], [0.0, 1.0]]))


def test_indefinite_spectrum_uses_moduli():
    spectrum = spectrum_summary(np.diag([-5.0, 1.0, 0.5]))
    assert spectrum.kappa == pytest.approx(10.0)
    assert spectrum.n_zero == 0


def test_assembled_matrix_has_one_zero_eigenvalue():
    bg, ov = box_mesh_pair(5, 3, 0.21)
    system = assemble_system(bg, ov, StokesProblem())
    spectrum = spectrum_summary(system.reduced_matrix())
    assert spectrum.n_zero == 1
    assert condition_number(system.reduced_matrix(), system.reduced_nullspace()) == pytest.approx(spectrum.kappa)


def test_generalized_examples():
    assert generalized_min_singular(np.eye(3), np.eye(3)) == pytest.approx(1.0)
    assert generalized_min_singular(np.diag([2.0, 1.0]), np.eye(2)) == pytest.approx(1.0)
    assert generalized_min_singular(np.diag([2.0, -3.0]), np.diag([4.0, 1.0])) == pytest.approx(0.5)


def test_generalized_deflation():
    a = np.diag([0.0, 2.0, 3.0])
    assert generalized_min_singular(a, np.eye(3), nullspace=np.array([1.0, 0.0, 0.0])) == pytest.approx(2.0)
    # deflation in the M inner product with a non-diagonal M
    m = np.array([[2.0, 0.5, 0.0], [0.5, 1.0, 0.0], [0.0, 0.0, 1.0]])
    got = generalized_min_singular(a, m, nullspace=np.array([1.0, 0.0, 0.0]))
    assert got > 0.5


def test_generalized_rejects_indefinite_norm():
    with pytest.raises(ValueError):
        generalized_min_singular(np.eye(2), np.diag([1.0, -1.0]))


def test_linear_system_reduction(coarse_box_pair):
    system = assemble_system(*coarse_box_pair, StokesProblem())
    assert isinstance(system, LinearSystem)
    n_free = len(system.free_dofs)
    assert system.reduced_matrix().shape == (n_free, n_free)
    assert np.linalg.norm(system.reduced_nullspace()) == pytest.approx(1.0)
