"""Bipartite pure states, Schmidt decomposition and entanglement measures."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg

TOL_NORM = 1e-10
DEFAULT_RANK_TOL = 1e-9


@dataclass(frozen=True)
class BipartiteDims:
    m: int
    n: int

    def __post_init__(self):
        for name in ("m", "n"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)) or value < 1:
                raise ValueError(f"{name} must be a positive integer, got {value!r}")
            object.__setattr__(self, name, int(value))

    @property
    def total(self) -> int:
        return self.m * self.n

    @property
    def segre_dim(self) -> int:
        return self.m + self.n - 2

    @property
    def ambient_dim(self) -> int:
        return self.m * self.n - 1

    @property
    def criterion(self) -> int:
        return (self.m - 2) * (self.n - 2)

    def swapped(self) -> "BipartiteDims":
        return BipartiteDims(self.n, self.m)


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=np.complex128)
    arr.flags.writeable = False
    return arr


def _check_unit(v: np.ndarray, what: str) -> None:
    norm = np.linalg.norm(v)
    if abs(norm - 1.0) > TOL_NORM:
        raise ValueError(f"{what} must have unit norm, got {norm!r}")


def phase_fix(v, tol: float = 1e-14) -> np.ndarray:
    """Rotate the global phase so the first entry with ``|v_k| > tol`` is real positive."""
    v = np.asarray(v, dtype=np.complex128)
    nz = np.flatnonzero(np.abs(v) > tol)
    if nz.size == 0:
        return v.copy()
    z = v[nz[0]]
    out = v * (abs(z) / z)
    out[nz[0]] = abs(z)
    return out


@dataclass(frozen=True)
class PureState:
    amplitudes: np.ndarray
    dims: BipartiteDims

    def __post_init__(self):
        amps = linalg.as_vector(self.amplitudes)
        if amps.size != self.dims.total:
            raise ValueError(
                f"state has {amps.size} amplitudes but dims {self.dims.m}x{self.dims.n}"
            )
        _check_unit(amps, "state")
        object.__setattr__(self, "amplitudes", _frozen(amps))

    @classmethod
    def normalized(cls, amplitudes, dims: BipartiteDims) -> "PureState":
        amps = linalg.as_vector(amplitudes)
        norm = np.linalg.norm(amps)
        if norm == 0:
            raise ValueError("cannot normalize the zero vector")
        return cls(amps / norm, dims)

    def matrix(self) -> np.ndarray:
        return linalg.reshape(self.amplitudes, self.dims.m, self.dims.n)


@dataclass(frozen=True)
class ProductPair:
    left: np.ndarray
    right: np.ndarray

    def __post_init__(self):
        left = linalg.as_vector(self.left)
        right = linalg.as_vector(self.right)
        _check_unit(left, "left factor")
        _check_unit(right, "right factor")
        object.__setattr__(self, "left", _frozen(left))
        object.__setattr__(self, "right", _frozen(right))

    @classmethod
    def normalized(cls, left, right) -> "ProductPair":
        left = linalg.as_vector(left)
        right = linalg.as_vector(right)
        return cls(left / np.linalg.norm(left), right / np.linalg.norm(right))

    @property
    def dims(self) -> BipartiteDims:
        return BipartiteDims(self.left.size, self.right.size)

    def vector(self) -> np.ndarray:
        return linalg.kron(self.left, self.right)

    def canonical(self) -> "ProductPair":
        """Same point of the product manifold with both factors phase-fixed."""
        return ProductPair(phase_fix(self.left), phase_fix(self.right))


@dataclass(frozen=True)
class SchmidtDecomposition:
    coefficients: np.ndarray
    left_basis: np.ndarray  # columns
    right_basis: np.ndarray  # columns; psi = sum_k c_k left_k (x) right_k

    def reconstruct(self) -> np.ndarray:
        # right_basis already holds the (unconjugated) second factors
        return np.einsum("k,ik,jk->ij", self.coefficients, self.left_basis,
                         self.right_basis).reshape(-1)


def random_unit_vector(k: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.standard_normal(k) + 1j * rng.standard_normal(k)
    return v / np.linalg.norm(v)


def random_state(dims: BipartiteDims, rng: np.random.Generator) -> PureState:
    return PureState(random_unit_vector(dims.total, rng), dims)


def random_product_pair(dims: BipartiteDims, rng: np.random.Generator) -> ProductPair:
    return ProductPair(random_unit_vector(dims.m, rng), random_unit_vector(dims.n, rng))


def schmidt(psi: PureState) -> SchmidtDecomposition:
    res = linalg.svd(psi.matrix())
    # M = U S V^dagger, so psi[i*n+j] = sum_k s_k U[i,k] conj(V[j,k])
    return SchmidtDecomposition(res.singular_values, res.left_vectors,
                                res.right_vectors.conj())


def schmidt_coefficients(psi: PureState) -> np.ndarray:
    return np.linalg.svd(psi.matrix(), compute_uv=False)


def schmidt_rank(psi: PureState, tol: float = DEFAULT_RANK_TOL) -> int:
    if tol <= 0:
        raise ValueError("tol must be positive")
    return int(np.count_nonzero(schmidt_coefficients(psi) > tol))


def entropy_entanglement(psi: PureState) -> float:
    """Entanglement entropy in bits, ``-sum p log2 p`` with ``p = lambda_k**2``."""
    p = schmidt_coefficients(psi) ** 2
    p = p[p > 0]
    return float(max(0.0, -np.sum(p * np.log2(p))))


def geometric_entanglement(psi: PureState) -> float:
    lam1 = schmidt_coefficients(psi)[0]
    return float(max(0.0, 1.0 - lam1 * lam1))


def nearest_product(psi: PureState) -> tuple[ProductPair, float]:
    """Closest product state to ``psi`` and its overlap ``max |<a(x)b|psi>|``.

    The maximizer is the leading Schmidt pair and the maximum is the
    leading Schmidt coefficient.
    """
    dec = schmidt(psi)
    pair = ProductPair(dec.left_basis[:, 0], dec.right_basis[:, 0])
    return pair, float(dec.coefficients[0])


def overlap(pair: ProductPair, psi: PureState) -> float:
    return float(abs(np.vdot(pair.vector(), psi.amplitudes)))
