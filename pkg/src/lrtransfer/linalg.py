"""Dense matrix/vector operations used by the model and theory code.

Matrices are 2-d float64 numpy arrays, vectors 1-d.  These wrappers add
shape validation and give the rest of the package a single place that
touches the underlying BLAS; everything else stays expressed in terms
of this small surface.
"""

import numpy as np

from .rng import RngStream

Matrix = np.ndarray
Vector = np.ndarray


def _check_matrix(a: np.ndarray, name: str = "matrix") -> np.ndarray:
    a = np.asarray(a)
    if a.ndim != 2:
        raise ValueError(f"{name} must be 2-d, got shape {a.shape}")
    return a


def _check_vector(v: np.ndarray, name: str = "vector") -> np.ndarray:
    v = np.asarray(v)
    if v.ndim != 1:
        raise ValueError(f"{name} must be 1-d, got shape {v.shape}")
    return v


def sample_gaussian_matrix(rows: int, cols: int, std: float, rng: RngStream) -> Matrix:
    """rows x cols matrix of N(0, std^2) entries, row-major fill order."""
    if rows < 0 or cols < 0:
        raise ValueError("matrix dimensions must be non-negative")
    return rng.gaussians(rows * cols, std=std).reshape(rows, cols)


def sample_gaussian_vector(n: int, std: float, rng: RngStream) -> Vector:
    if n < 0:
        raise ValueError("vector length must be non-negative")
    return rng.gaussians(n, std=std)


def matvec(a: Matrix, v: Vector) -> Vector:
    a = _check_matrix(a)
    v = _check_vector(v)
    if a.shape[1] != v.shape[0]:
        raise ValueError(f"matvec shape mismatch: {a.shape} @ {v.shape}")
    return a @ v


def matmul(a: Matrix, b: Matrix) -> Matrix:
    a = _check_matrix(a, "left operand")
    b = _check_matrix(b, "right operand")
    if a.shape[1] != b.shape[0]:
        raise ValueError(f"matmul shape mismatch: {a.shape} @ {b.shape}")
    return a @ b


def dot(u: Vector, v: Vector) -> float:
    u = _check_vector(u)
    v = _check_vector(v)
    if u.shape != v.shape:
        raise ValueError(f"dot shape mismatch: {u.shape} vs {v.shape}")
    return float(u @ v)


def sq_norm(v: Vector) -> float:
    v = _check_vector(v)
    return float(v @ v)


def outer(u: Vector, v: Vector) -> Matrix:
    u = _check_vector(u)
    v = _check_vector(v)
    return np.outer(u, v)
