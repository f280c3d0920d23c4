"""Input validation helpers shared by the estimator and the drivers."""

import numbers

import numpy as np
from sklearn.utils.validation import check_array

from .mesh import SimplicialMesh


def check_mesh(mesh, name="mesh"):
    if not isinstance(mesh, SimplicialMesh):
        raise TypeError(f"{name} must be a SimplicialMesh, got {type(mesh).__name__}")
    if mesh.n_cells == 0:
        raise ValueError(f"{name} has no cells")
    return mesh


def check_points(X):
    """Validate an array of 2D points, shape (n, 2)."""
    X = check_array(X, dtype=np.float64, ensure_2d=True)
    if X.shape[1] != 2:
        raise ValueError(f"expected points of shape (n, 2), got {X.shape}")
    return X


def check_vector_field(fn, name):
    """Wrap a vectorized field and check that it returns shape (n, 2)."""
    if fn is None:
        return lambda x: np.zeros((len(x), 2))
    if not callable(fn):
        raise TypeError(f"{name} must be callable")
    probe = np.asarray(fn(np.array([[0.5, 0.5], [0.25, 0.75]])), dtype=float)
    if probe.shape != (2, 2):
        raise ValueError(f"{name} must map (n, 2) points to (n, 2) vectors, got shape {probe.shape}")
    return fn


def check_positive(value, name):
    if not isinstance(value, numbers.Real) or not value > 0:
        raise ValueError(f"{name} must be a positive number, got {value!r}")
    return float(value)


def check_choice(value, name, choices):
    if value not in choices:
        raise ValueError(f"{name} must be one of {choices}, got {value!r}")
    return value


def check_inner_box_parameter(l):
    if not 0.2 < l < 0.5:
        raise ValueError(f"inner box parameter must lie in (0.2, 0.5), got {l}")
    return float(l)
