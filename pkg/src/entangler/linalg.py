"""Small dense complex linear-algebra kernel.

Vectors and matrices are plain ``numpy`` arrays of dtype ``complex128``.
Composite indices follow the first-factor-major convention ``i*n + j``
everywhere, so :func:`kron`, :func:`reshape` and the product-state
coordinates ``x_i * y_j`` line up.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

TOL_ORTHO = 1e-10
TOL_RANK = 1e-12


class RankDeficientError(np.linalg.LinAlgError):
    """Raised when a matrix is too close to singular for a unitary QR factor."""


def as_vector(v) -> np.ndarray:
    arr = np.asarray(v, dtype=np.complex128)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError(f"expected a non-empty 1-d vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("vector has non-finite entries")
    return arr


def as_matrix(M) -> np.ndarray:
    arr = np.asarray(M, dtype=np.complex128)
    if arr.ndim != 2 or arr.size == 0:
        raise ValueError(f"expected a non-empty 2-d matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("matrix has non-finite entries")
    return arr


def kron(a, b) -> np.ndarray:
    """Tensor product of two vectors; entry ``i*len(b) + j`` is ``a[i]*b[j]``."""
    a = as_vector(a)
    b = as_vector(b)
    return np.outer(a, b).reshape(-1)


def reshape(v, m: int, n: int) -> np.ndarray:
    """Matricize a length ``m*n`` vector into an ``m x n`` matrix (row-major)."""
    v = as_vector(v)
    if v.size != m * n:
        raise ValueError(f"cannot reshape vector of length {v.size} to {m}x{n}")
    return v.reshape(m, n)


def flatten(M) -> np.ndarray:
    return as_matrix(M).reshape(-1)


@dataclass(frozen=True)
class SvdResult:
    left_vectors: np.ndarray  # columns
    singular_values: np.ndarray
    right_vectors: np.ndarray  # columns; M = sum_k s_k u_k v_k^dagger

    def reconstruct(self) -> np.ndarray:
        return (self.left_vectors * self.singular_values) @ self.right_vectors.conj().T


def svd(M) -> SvdResult:
    """Thin SVD with singular values in descending order.

    Raises ``numpy.linalg.LinAlgError`` if LAPACK fails to converge.
    """
    M = as_matrix(M)
    u, s, vh = np.linalg.svd(M, full_matrices=False)
    return SvdResult(u, s, vh.conj().T)


def max_deviation_from_identity(G) -> float:
    G = np.asarray(G)
    return float(np.max(np.abs(G - np.eye(G.shape[0]))))


def unitarity_error(U) -> float:
    """``max |U^dagger U - I|`` entrywise."""
    U = np.asarray(U)
    return max_deviation_from_identity(U.conj().T @ U)


def qr_unitary(M) -> np.ndarray:
    """Unitary QR factor with the convention that ``R`` has a positive real diagonal.

    With that convention the factor is unique, which is what makes QR of a
    Ginibre matrix Haar distributed.
    """
    M = as_matrix(M)
    if M.shape[0] != M.shape[1]:
        raise ValueError(f"qr_unitary needs a square matrix, got {M.shape}")
    q, r = np.linalg.qr(M)
    d = np.diag(r)
    scale = np.max(np.abs(d))
    if scale == 0 or np.min(np.abs(d)) <= TOL_RANK * scale:
        raise RankDeficientError("matrix is numerically rank deficient")
    return q * (d / np.abs(d))
