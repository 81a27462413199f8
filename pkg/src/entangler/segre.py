"""Exact existence criterion and the algebraic product-state test.

The existence decision is integer arithmetic only. Product states are the
image of the Segre map ``([x], [y]) -> [x_i y_j]``; a state lies on it
exactly when every 2x2 minor of its ``m x n`` matricization vanishes.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from . import linalg
from .states import DEFAULT_RANK_TOL, BipartiteDims, ProductPair, PureState


@dataclass(frozen=True)
class ExistenceVerdict:
    dims: BipartiteDims
    exists: bool
    segre_dim: int
    ambient_dim: int
    intersection_excess: int

    def as_dict(self) -> dict:
        return {
            "m": self.dims.m,
            "n": self.dims.n,
            "exists": self.exists,
            "segre_dim": self.segre_dim,
            "ambient_dim": self.ambient_dim,
            "intersection_excess": self.intersection_excess,
        }


def exists_universal_entangler(dims: BipartiteDims) -> ExistenceVerdict:
    """Decide whether some unitary on ``C^m (x) C^n`` sends every product state
    to an entangled state.

    Two copies of the product variety (dimension ``m+n-2``) inside
    projective space of dimension ``mn-1`` must meet when
    ``2(m+n-2) - (mn-1) = 1 - (m-2)(n-2)`` is non-negative. Otherwise a
    generic unitary keeps them apart.
    """
    m, n = dims.m, dims.n
    excess = 2 * dims.segre_dim - dims.ambient_dim
    exists = min(m, n) >= 3 and (m, n) != (3, 3)
    # the three formulations are algebraically equivalent for positive m, n
    if exists != (excess < 0) or exists != (dims.criterion >= 2):
        raise AssertionError(f"existence criterion disagrees with itself at {dims}")
    return ExistenceVerdict(dims, exists, dims.segre_dim, dims.ambient_dim, excess)


def segre_embed(pair: ProductPair) -> PureState:
    return PureState.normalized(pair.vector(), pair.dims)


def max_minor(M) -> float:
    """Largest ``|M[i,j] M[k,l] - M[i,l] M[k,j]|`` over all 2x2 minors."""
    M = linalg.as_matrix(M)
    m, n = M.shape
    if m < 2 or n < 2:
        return 0.0
    rows = np.array(list(combinations(range(m), 2)))
    cols = np.array(list(combinations(range(n), 2)))
    i, k = rows[:, 0][:, None], rows[:, 1][:, None]
    j, l = cols[:, 0][None, :], cols[:, 1][None, :]
    minors = M[i, j] * M[k, l] - M[i, l] * M[k, j]
    return float(np.max(np.abs(minors)))


def is_product(psi: PureState, tol: float = DEFAULT_RANK_TOL) -> bool:
    if tol <= 0:
        raise ValueError("tol must be positive")
    return max_minor(psi.matrix()) <= tol
