import numpy as np
import pytest

from entangler.overlap import (
    MonotonicityError,
    NotUnitaryError,
    OptimizerConfig,
    UnitaryGate,
    Verdict,
    alternate,
    certify,
    cnot_gate,
    half_step_backward,
    half_step_forward,
    identity_gate,
    local_gate,
    max_product_overlap,
    product_overlap,
    starting_points,
    swap_gate,
)
from entangler.search import haar_gate, haar_unitary
from entangler.states import BipartiteDims, ProductPair, random_product_pair

from oracles import grid_max_overlap_2x2

D22 = BipartiteDims(2, 2)
D34 = BipartiteDims(3, 4)
E0 = np.array([1.0, 0.0])
PLUS = np.array([1.0, 1.0]) / np.sqrt(2)


def same_ray(u, v):
    return abs(np.vdot(u, v)) == pytest.approx(1, abs=1e-12)


def test_gate_validation():
    with pytest.raises(NotUnitaryError, match="max\\|U\\^dagger U - I\\|"):
        UnitaryGate(2 * np.eye(4), D22)
    with pytest.raises(ValueError):
        UnitaryGate(np.eye(3), D22)


def test_config_validation():
    with pytest.raises(ValueError):
        OptimizerConfig(restarts=0)
    with pytest.raises(ValueError):
        OptimizerConfig(witness_tol=1e-3, gap_tol=1e-4)
    cfg = OptimizerConfig(seed=3, restarts=9)
    assert OptimizerConfig.from_dict(cfg.to_dict()) == cfg
    assert cfg.required_converged == 5


def test_forward_identity(rng):
    cd = random_product_pair(D34, rng)
    ab, value = half_step_forward(identity_gate(D34), cd)
    assert value == pytest.approx(1, abs=1e-12)
    assert same_ray(ab.left, cd.left) and same_ray(ab.right, cd.right)


def test_forward_cnot():
    U = cnot_gate()
    ab, value = half_step_forward(U, ProductPair(E0, E0))
    assert value == pytest.approx(1, abs=1e-15)
    _, value = half_step_forward(U, ProductPair(PLUS, E0))
    assert value == pytest.approx(2 ** -0.5, abs=1e-15)


def test_backward_identity_and_swap(rng):
    ab = random_product_pair(D34, rng)
    cd, value = half_step_backward(identity_gate(D34), ab)
    assert value == pytest.approx(1, abs=1e-12) and same_ray(cd.left, ab.left)
    x = random_product_pair(BipartiteDims(3, 3), rng)
    cd, value = half_step_backward(swap_gate(3), x)
    assert value == pytest.approx(1, abs=1e-12)
    assert same_ray(cd.left, x.right) and same_ray(cd.right, x.left)


def test_half_steps_are_monotone(rng):
    U = haar_gate(D34, 5)
    cd = random_product_pair(D34, rng)
    prev = 0.0
    for _ in range(20):
        ab, fwd = half_step_forward(U, cd)
        cd, bwd = half_step_backward(U, ab)
        assert prev - 1e-12 <= fwd <= bwd + 1e-12
        prev = bwd


def test_forward_value_is_the_maximum(rng):
    # no random output pair beats the half-step
    U = haar_gate(D34, 6)
    cd = random_product_pair(D34, rng)
    _, value = half_step_forward(U, cd)
    for _ in range(500):
        ab = random_product_pair(D34, rng)
        assert product_overlap(U, ab, cd) <= value + 1e-12


@pytest.mark.parametrize("gate", [identity_gate(BipartiteDims(2, 3)), identity_gate(D34),
                                  swap_gate(3), cnot_gate()], ids=["id23", "id34", "swap3", "cnot"])
def test_products_to_products(gate):
    est = max_product_overlap(gate, OptimizerConfig(restarts=8, seed=1))
    assert est.overlap == pytest.approx(1, abs=1e-10)


def test_cnot_witness_input():
    est = max_product_overlap(cnot_gate(), OptimizerConfig(restarts=8, seed=1))
    assert est.overlap == pytest.approx(1, abs=1e-10)
    # CNOT maps (c, d) to a product iff c is a basis state or d is an eigenvector of X
    c, d = est.input_witness.left, est.input_witness.right
    assert min(abs(c[0]), abs(c[1])) < 1e-5 or abs(abs(np.vdot(d, PLUS)) - 1) < 1e-5 \
        or abs(abs(np.vdot(d, [2 ** -0.5, -(2 ** -0.5)])) - 1) < 1e-5


def test_haar_2x2_matches_grid():
    U = haar_gate(D22, 31)
    est = max_product_overlap(U, OptimizerConfig(restarts=64, seed=2))
    grid = grid_max_overlap_2x2(U.matrix)
    assert grid <= est.overlap + 1e-12
    assert est.overlap - grid < 1e-3
    assert est.overlap == pytest.approx(1, abs=1e-6)


def test_haar_3x4_regression():
    # pinned from a 1000-restart run of this implementation, not ground truth
    est = max_product_overlap(haar_gate(D34, 2024), OptimizerConfig(restarts=1000, seed=7))
    assert est.overlap == pytest.approx(0.9999970348097855, abs=1e-9)
    assert est.overlap < 1 - 1e-6


def test_witness_consistency_and_phase():
    for seed in range(5):
        U = haar_gate(D34, seed)
        est = max_product_overlap(U, OptimizerConfig(restarts=16, seed=seed))
        assert product_overlap(U, est.output_witness, est.input_witness) == pytest.approx(est.overlap, abs=1e-10)
        assert 0 < est.overlap <= 1 + 1e-10
        for v in (est.input_witness.left, est.input_witness.right,
                  est.output_witness.left, est.output_witness.right):
            first = v[np.flatnonzero(np.abs(v) > 1e-14)[0]]
            assert first.imag == 0 and first.real > 0


def test_monotone_sequences():
    rng = np.random.default_rng(40)
    for case in range(100):
        dims = [BipartiteDims(2, 2), BipartiteDims(2, 3), BipartiteDims(3, 3), D34][case % 4]
        U = haar_unitary(dims.total, rng)
        c, d = starting_points(dims, 2, case)
        res = alternate(U, dims, c, d, max_iters=300, conv_tol=1e-12, record=True)
        for seq in res.history:
            assert np.all(np.diff(seq) >= -1e-12)


def test_monotonicity_guard_triggers(monkeypatch):
    import entangler.overlap as ov

    def trailing_pairs(T):
        # deliberately wrong: the smallest singular triple
        u, s, vh = np.linalg.svd(T, full_matrices=False)
        return u[:, :, -1], s[:, -1], vh[:, -1, :]

    c, d = starting_points(D34, 4, 0)
    first = alternate(haar_unitary(12, 1), D34, c, d, 5, 1e-12)
    monkeypatch.setattr(ov, "_leading_pairs", trailing_pairs)
    with pytest.raises(MonotonicityError):
        alternate(haar_unitary(12, 1), D34, first.c, first.d, 5, 1e-12)


def test_best_restart_tie_break_and_threads():
    U = haar_gate(D34, 9)
    cfg = OptimizerConfig(restarts=40, seed=4)
    serial = max_product_overlap(U, cfg, threads=1)
    for t in (2, 8):
        par = max_product_overlap(U, cfg, threads=t)
        assert par.overlap == serial.overlap
        np.testing.assert_array_equal(par.input_witness.left, serial.input_witness.left)


def test_initial_points_are_used():
    U = haar_gate(D34, 3)
    ref = max_product_overlap(U, OptimizerConfig(restarts=64, seed=1))
    warm = max_product_overlap(U, OptimizerConfig(restarts=1, max_iters=1, seed=5),
                               initial=[ref.input_witness])
    assert warm.overlap >= ref.overlap - 1e-9
    assert warm.restarts_used == 2


def test_adjoint_symmetry():
    cfg = OptimizerConfig(restarts=128, seed=11)
    for dims, seed in [(BipartiteDims(2, 3), 1), (BipartiteDims(3, 3), 2), (D34, 3), (D34, 4)]:
        U = haar_gate(dims, seed)
        a = max_product_overlap(U, cfg).overlap
        b = max_product_overlap(U.adjoint(), cfg).overlap
        assert abs(a - b) < 1e-6


def test_local_unitary_invariance():
    rng = np.random.default_rng(77)
    cfg = OptimizerConfig(restarts=128, seed=12)
    for dims in (BipartiteDims(2, 3), D34):
        U = haar_gate(dims, int(rng.integers(1 << 30)))
        left = local_gate(haar_unitary(dims.m, rng), haar_unitary(dims.n, rng)).matrix
        right = local_gate(haar_unitary(dims.m, rng), haar_unitary(dims.n, rng)).matrix
        moved = UnitaryGate(left @ U.matrix @ right, dims)
        assert abs(max_product_overlap(U, cfg).overlap - max_product_overlap(moved, cfg).overlap) < 1e-6


def test_certify_identity():
    rep = certify(identity_gate(D34), OptimizerConfig(restarts=8, seed=1))
    assert rep.verdict is Verdict.NOT_UNIVERSAL_WITNESS_FOUND
    assert rep.min_geometric_entanglement == pytest.approx(0, abs=1e-12)
    assert rep.entropy_at_witness == pytest.approx(0, abs=1e-9)


def test_certify_degenerate_haar():
    for dims in (BipartiteDims(2, 2), BipartiteDims(2, 5), BipartiteDims(3, 3)):
        rep = certify(haar_gate(dims, 17), OptimizerConfig(restarts=64, seed=3))
        assert rep.verdict is Verdict.NOT_UNIVERSAL_WITNESS_FOUND
        assert rep.overlap >= 1 - 1e-6


def test_certify_report_invariants():
    for seed in range(6):
        rep = certify(haar_gate(D34, seed), OptimizerConfig(restarts=32, seed=seed))
        lam = rep.overlap
        assert rep.min_geometric_entanglement == pytest.approx(1 - lam * lam, abs=1e-12)
        if rep.verdict is Verdict.NOT_UNIVERSAL_WITNESS_FOUND:
            assert lam >= 1 - rep.config.witness_tol
        elif rep.verdict is Verdict.UNIVERSAL_ENTANGLER_NUMERICAL:
            assert lam <= 1 - rep.config.gap_tol
            assert rep.estimate.restarts_converged >= rep.config.required_converged
        else:
            assert 1 - rep.config.gap_tol < lam < 1 - rep.config.witness_tol
        # entropy at the witness bounds the geometric measure's partner from above
        assert rep.entropy_at_witness >= 0
        assert abs(np.sum(rep.output_schmidt ** 2) - 1) < 1e-10


def test_certify_draws_seed_when_missing():
    rep = certify(cnot_gate(), OptimizerConfig(restarts=2))
    assert isinstance(rep.config.seed, int)
