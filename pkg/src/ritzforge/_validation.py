"""Input coercion and structural predicates shared by all modules."""

import numpy as np

from .exceptions import ArgumentError, StructureError


def as_complex_matrix(a, name="matrix"):
    """Return ``a`` as a finite 2-D complex128 array (copy)."""
    arr = np.array(a, dtype=np.complex128, copy=True)
    if arr.ndim != 2:
        raise StructureError(f"{name} must be 2-D, got shape {arr.shape}")
    if arr.size == 0:
        raise StructureError(f"{name} must be nonempty")
    if not np.all(np.isfinite(arr)):
        raise ArgumentError(f"{name} has non-finite entries")
    return arr


def as_complex_vector(b, name="vector"):
    arr = np.array(b, dtype=np.complex128, copy=True).reshape(-1)
    if arr.size == 0:
        raise ArgumentError(f"{name} must have length >= 1")
    if not np.all(np.isfinite(arr)):
        raise ArgumentError(f"{name} has non-finite entries")
    return arr


def check_square(a, name="matrix"):
    a = as_complex_matrix(a, name)
    if a.shape[0] != a.shape[1]:
        raise StructureError(f"{name} must be square, got shape {a.shape}")
    return a


def is_upper_triangular(a, tol=0.0):
    return bool(np.all(np.abs(np.tril(a, -1)) <= tol))


def is_upper_hessenberg(a, tol=0.0):
    return bool(np.all(np.abs(np.tril(a, -2)) <= tol))


def is_irreducible_hessenberg(a, tol=0.0, sub_tol=0.0):
    """Upper Hessenberg with every subdiagonal magnitude above ``sub_tol``."""
    if not is_upper_hessenberg(a, tol):
        return False
    return bool(np.all(np.abs(np.diag(a, -1)) > sub_tol))


def is_unitary(a, tol):
    n = a.shape[0]
    return a.shape == (n, n) and np.linalg.norm(a.conj().T @ a - np.eye(n)) <= tol


def check_unimodular(values, length, name, tol=1e-12):
    """Coerce a sign list to complex and check ``|v| = 1`` and its length."""
    arr = as_complex_vector(values, name)
    if arr.size != length:
        raise ArgumentError(f"{name} must have length {length}, got {arr.size}")
    bad = np.flatnonzero(np.abs(np.abs(arr) - 1.0) > tol)
    if bad.size:
        raise ArgumentError(f"{name}[{bad[0] + 1}] is not unimodular")
    return arr
