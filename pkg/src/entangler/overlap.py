"""Maximal product overlap of a bipartite unitary.

For a unitary ``U`` on ``C^m (x) C^n`` the maximal product overlap is

    Lambda(U) = max |<a (x) b| U |c (x) d>|

over unit vectors ``a, c`` in ``C^m`` and ``b, d`` in ``C^n``. It equals 1
exactly when ``U`` maps some product state to a product state, so
``Lambda(U) < 1`` says ``U`` is a universal entangler and ``1 - Lambda**2``
is the smallest geometric entanglement it can output.

The estimate is a multistart alternating maximization. For fixed input
``(c, d)`` the best output pair is the leading Schmidt pair of
``U (c (x) d)``; for fixed output the best input is the leading Schmidt pair
of ``U^dagger (a (x) b)``. Each half-step is an exact argmax, so every
restart climbs monotonically to a local maximum.
"""
from __future__ import annotations

import enum
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from . import linalg
from .states import (
    BipartiteDims,
    ProductPair,
    PureState,
    entropy_entanglement,
    nearest_product,
    schmidt_coefficients,
)

# restarts are processed in fixed-size blocks so results never depend on how
# blocks are spread over workers
BLOCK_SIZE = 16
MONOTONE_SLACK = 1e-12
TIE_TOL = 1e-12
THREADS_ENV = "ENTANGLER_THREADS"


class NotUnitaryError(ValueError):
    pass


class MonotonicityError(RuntimeError):
    """An alternating half-step decreased the overlap beyond rounding slack."""


def resolve_threads(threads: int | None = None) -> int:
    if threads is None:
        threads = int(os.environ.get(THREADS_ENV, "1") or 1)
    if threads < 1:
        raise ValueError("threads must be >= 1")
    return threads


def fresh_seed() -> int:
    return int(np.random.SeedSequence().generate_state(1, np.uint64)[0] >> np.uint64(1))


@dataclass(frozen=True)
class UnitaryGate:
    matrix: np.ndarray
    dims: BipartiteDims

    def __post_init__(self):
        M = linalg.as_matrix(self.matrix)
        k = self.dims.total
        if M.shape != (k, k):
            raise ValueError(f"gate for {self.dims.m}x{self.dims.n} must be {k}x{k}, got {M.shape}")
        err = linalg.unitarity_error(M)
        if not err < linalg.TOL_ORTHO:
            raise NotUnitaryError(f"matrix is not unitary: max|U^dagger U - I| = {err:.3e}")
        M = M.copy()
        M.flags.writeable = False
        object.__setattr__(self, "matrix", M)

    def adjoint(self) -> "UnitaryGate":
        return UnitaryGate(self.matrix.conj().T, self.dims)

    def apply(self, pair: ProductPair) -> PureState:
        return PureState.normalized(self.matrix @ pair.vector(), self.dims)


def identity_gate(dims: BipartiteDims) -> UnitaryGate:
    return UnitaryGate(np.eye(dims.total), dims)


def swap_gate(d: int) -> UnitaryGate:
    k = d * d
    P = np.zeros((k, k))
    for i in range(d):
        for j in range(d):
            P[j * d + i, i * d + j] = 1.0
    return UnitaryGate(P, BipartiteDims(d, d))


def cnot_gate() -> UnitaryGate:
    P = np.eye(4)[[0, 1, 3, 2]]
    return UnitaryGate(P, BipartiteDims(2, 2))


def local_gate(A, B) -> UnitaryGate:
    A = linalg.as_matrix(A)
    B = linalg.as_matrix(B)
    return UnitaryGate(np.kron(A, B), BipartiteDims(A.shape[0], B.shape[0]))


@dataclass(frozen=True)
class OptimizerConfig:
    restarts: int = 64
    max_iters: int = 10_000
    conv_tol: float = 1e-12
    witness_tol: float = 1e-6
    gap_tol: float = 1e-4
    seed: int | None = None
    # converged restarts needed for a universal-entangler verdict;
    # None means half the restart budget (rounded up)
    min_converged: int | None = None

    def __post_init__(self):
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if not self.conv_tol > 0:
            raise ValueError("conv_tol must be positive")
        if not 0 < self.witness_tol <= self.gap_tol < 1:
            raise ValueError("need 0 < witness_tol <= gap_tol < 1")

    @property
    def required_converged(self) -> int:
        if self.min_converged is None:
            return (self.restarts + 1) // 2
        return self.min_converged

    def seeded(self) -> "OptimizerConfig":
        return self if self.seed is not None else replace(self, seed=fresh_seed())

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "OptimizerConfig":
        return cls(**d)


def _leading_pairs(T: np.ndarray):
    u, s, vh = np.linalg.svd(T, full_matrices=False)
    return u[:, :, 0], s[:, 0], vh[:, 0, :]


def _outer_rows(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    return (x[:, :, None] * y[:, None, :]).reshape(len(x), -1)


@dataclass
class _BlockResult:
    c: np.ndarray
    d: np.ndarray
    values: np.ndarray
    iterations: np.ndarray
    converged: np.ndarray
    history: list | None = None


def alternate(U: np.ndarray, dims: BipartiteDims, c: np.ndarray, d: np.ndarray,
              max_iters: int, conv_tol: float, record: bool = False) -> _BlockResult:
    """Run alternating half-steps for a batch of starting inputs.

    ``c`` and ``d`` are ``(R, m)`` and ``(R, n)`` arrays of unit rows. The
    returned values are the overlaps after the last backward half-step.
    With ``record=True`` each restart's full sequence of half-step values
    is kept.
    """
    m, n = dims.m, dims.n
    c = np.array(c, dtype=np.complex128)
    d = np.array(d, dtype=np.complex128)
    R = len(c)
    Ut = np.ascontiguousarray(U.T)
    Uc = np.ascontiguousarray(U.conj())
    values = np.zeros(R)
    prev = np.zeros(R)
    iterations = np.zeros(R, dtype=np.int64)
    converged = np.zeros(R, dtype=bool)
    history = [[] for _ in range(R)] if record else None
    active = np.arange(R)
    for _ in range(max_iters):
        out = (_outer_rows(c[active], d[active]) @ Ut).reshape(-1, m, n)
        a, fwd, b = _leading_pairs(out)
        back_in = (_outer_rows(a, b) @ Uc).reshape(-1, m, n)
        cn, bwd, dn = _leading_pairs(back_in)
        if np.any(fwd < prev[active] - MONOTONE_SLACK) or np.any(bwd < fwd - MONOTONE_SLACK):
            raise MonotonicityError("overlap decreased during an alternating half-step")
        c[active] = cn
        d[active] = dn
        iterations[active] += 1
        if record:
            for idx, f, g in zip(active, fwd, bwd):
                history[idx].extend((float(f), float(g)))
        done = np.abs(bwd - prev[active]) < conv_tol
        values[active] = bwd
        prev[active] = bwd
        converged[active[done]] = True
        active = active[~done]
        if active.size == 0:
            break
    return _BlockResult(c, d, values, iterations, converged, history)


@dataclass(frozen=True)
class OverlapEstimate:
    overlap: float
    input_witness: ProductPair
    output_witness: ProductPair
    iterations: int
    restarts_used: int
    restarts_converged: int
    converged: bool
    # final inputs of every restart, best first; used for warm starts
    endpoints: tuple[ProductPair, ...] = field(default=(), repr=False, compare=False)


def half_step_forward(U: UnitaryGate, cd: ProductPair) -> tuple[ProductPair, float]:
    """Best output product pair for a fixed product input."""
    return nearest_product(U.apply(cd))


def half_step_backward(U: UnitaryGate, ab: ProductPair) -> tuple[ProductPair, float]:
    """Best input product pair for a fixed product output."""
    return nearest_product(U.adjoint().apply(ab))


def product_overlap(U: UnitaryGate, ab: ProductPair, cd: ProductPair) -> float:
    """``|<a (x) b| U |c (x) d>|``."""
    return float(abs(np.vdot(ab.vector(), U.matrix @ cd.vector())))


def starting_points(dims: BipartiteDims, restarts: int, seed: int):
    """Haar-uniform starting inputs: normalized complex Gaussian rows."""
    rng = np.random.default_rng(seed)
    c = rng.standard_normal((restarts, dims.m)) + 1j * rng.standard_normal((restarts, dims.m))
    d = rng.standard_normal((restarts, dims.n)) + 1j * rng.standard_normal((restarts, dims.n))
    c /= np.linalg.norm(c, axis=1, keepdims=True)
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    return c, d


def max_product_overlap(U: UnitaryGate, cfg: OptimizerConfig = OptimizerConfig(),
                        initial: list[ProductPair] | None = None,
                        threads: int | None = None) -> OverlapEstimate:
    """Estimate ``Lambda(U)`` from ``cfg.restarts`` random starts.

    ``initial`` pairs are tried first (before the random starts). The best
    restart wins; ties within ``TIE_TOL`` go to the lower restart index.
    """
    if cfg.seed is None:
        cfg = cfg.seeded()
    dims = U.dims
    c, d = starting_points(dims, cfg.restarts, cfg.seed)
    if initial:
        c = np.vstack([np.array([p.left for p in initial]), c])
        d = np.vstack([np.array([p.right for p in initial]), d])
    total = len(c)
    bounds = [(s, min(s + BLOCK_SIZE, total)) for s in range(0, total, BLOCK_SIZE)]

    def run(bound):
        lo, hi = bound
        return alternate(U.matrix, dims, c[lo:hi], d[lo:hi], cfg.max_iters, cfg.conv_tol)

    workers = min(resolve_threads(threads), len(bounds))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            blocks = list(pool.map(run, bounds))
    else:
        blocks = [run(b) for b in bounds]

    values = np.concatenate([b.values for b in blocks])
    iterations = np.concatenate([b.iterations for b in blocks])
    converged = np.concatenate([b.converged for b in blocks])
    c_fin = np.concatenate([b.c for b in blocks])
    d_fin = np.concatenate([b.d for b in blocks])

    best = 0
    for i in range(1, total):
        if values[i] > values[best] + TIE_TOL:
            best = i
    order = np.argsort(-values, kind="stable")
    endpoints = tuple(ProductPair.normalized(c_fin[i], d_fin[i]) for i in order)

    cd = ProductPair.normalized(c_fin[best], d_fin[best]).canonical()
    ab, _ = half_step_forward(U, cd)
    ab = ab.canonical()
    lam = product_overlap(U, ab, cd)
    if lam > 1 + 1e-10:
        raise AssertionError(f"overlap {lam} exceeds 1")
    return OverlapEstimate(
        overlap=lam,
        input_witness=cd,
        output_witness=ab,
        iterations=int(iterations[best]),
        restarts_used=total,
        restarts_converged=int(np.count_nonzero(converged)),
        converged=bool(converged[best]),
        endpoints=endpoints,
    )


class Verdict(str, enum.Enum):
    UNIVERSAL_ENTANGLER_NUMERICAL = "UNIVERSAL_ENTANGLER_NUMERICAL"
    NOT_UNIVERSAL_WITNESS_FOUND = "NOT_UNIVERSAL_WITNESS_FOUND"
    INCONCLUSIVE = "INCONCLUSIVE"


@dataclass(frozen=True)
class CertificationReport:
    estimate: OverlapEstimate
    verdict: Verdict
    min_geometric_entanglement: float
    entropy_at_witness: float  # bits
    output_schmidt: np.ndarray = field(repr=False)
    config: OptimizerConfig

    @property
    def overlap(self) -> float:
        return self.estimate.overlap


def decide(estimate: OverlapEstimate, cfg: OptimizerConfig) -> Verdict:
    lam = estimate.overlap
    if lam >= 1 - cfg.witness_tol:
        return Verdict.NOT_UNIVERSAL_WITNESS_FOUND
    if lam <= 1 - cfg.gap_tol and estimate.restarts_converged >= cfg.required_converged:
        return Verdict.UNIVERSAL_ENTANGLER_NUMERICAL
    return Verdict.INCONCLUSIVE


def certify(U: UnitaryGate, cfg: OptimizerConfig = OptimizerConfig(),
            threads: int | None = None) -> CertificationReport:
    """Numerically decide whether ``U`` is a universal entangler.

    A near-1 overlap yields a product-to-product witness. An overlap at
    least ``gap_tol`` below 1 is reported as a numerical certificate; the
    band in between is inconclusive. The entropy of ``U (c (x) d)`` at the
    witness input bounds from above the least entropy ``U`` can output.
    """
    cfg = cfg.seeded()
    est = max_product_overlap(U, cfg, threads=threads)
    out = U.apply(est.input_witness)
    lam = est.overlap
    return CertificationReport(
        estimate=est,
        verdict=decide(est, cfg),
        min_geometric_entanglement=max(0.0, 1.0 - lam * lam),
        entropy_at_witness=entropy_entanglement(out),
        output_schmidt=schmidt_coefficients(out),
        config=cfg,
    )
