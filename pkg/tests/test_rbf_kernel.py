import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rbfmorph.rbf_kernel import (
    WENDLAND,
    BasisFunction,
    ConditioningError,
    IncrementalCholesky,
    WeightSet,
    assemble_matrix,
    assemble_surface_matrix,
    eval_basis,
    eval_interpolant,
    evaluate,
    solve_weights,
)

# 2-point system, R=2, C2: b = phi(0.5) = 3/16, alpha = (1, -b) / (1 - b^2)
B = 0.1875
ALPHA1 = 256.0 / 247.0
ALPHA2 = -48.0 / 247.0
PHI_QUARTER = 0.6328125  # (0.75)^4 * 2
MIDPOINT = 208.0 / 247.0 * 81.0 / 128.0  # 0.5328947368...


@pytest.mark.parametrize("kind", sorted(WENDLAND))
def test_unit_at_origin_and_zero_outside(kind):
    basis = BasisFunction(kind, 1.0)
    assert eval_basis(basis, 0.0) == 1.0
    assert eval_basis(basis, 1.0) == 0.0
    assert np.all(eval_basis(basis, np.array([1.0, 1.2, 5.0, 1e9])) == 0.0)


def test_known_values():
    assert eval_basis(BasisFunction("C2", 1.0), 0.5) == 0.1875
    assert eval_basis(BasisFunction("C0", 1.0), 0.5) == 0.25
    assert eval_basis(BasisFunction("C2", 2.0), 1.0) == 0.1875
    assert eval_basis(BasisFunction("C2", 2.0), 0.5) == PHI_QUARTER
    assert eval_basis(BasisFunction("c2", 1.0), 1.2) == 0.0


def test_basis_validation():
    with pytest.raises(ValueError):
        BasisFunction("C3")
    with pytest.raises(ValueError):
        BasisFunction("C2", 0.0)


def test_c2_derivative_vanishes_at_support_edge():
    basis = BasisFunction("C2", 1.0)
    h = 1e-6
    eta = 1.0 - h
    slope = (eval_basis(basis, eta) - eval_basis(basis, eta - h)) / h
    assert abs(slope) < 1e-4


@pytest.mark.parametrize("kind", sorted(WENDLAND))
def test_monotone_decreasing(kind):
    eta = np.linspace(0, 1, 1001)
    assert np.all(np.diff(eval_basis(BasisFunction(kind), eta)) <= 0)


def test_two_point_matrix():
    phi = assemble_surface_matrix([(0.0, 0.0), (1.0, 0.0)], BasisFunction("C2", 2.0))
    assert np.array_equal(phi, [[1.0, B], [B, 1.0]])


def test_single_point_and_far_pair():
    basis = BasisFunction("C2", 2.0)
    assert np.array_equal(assemble_surface_matrix([(3.0, 4.0)], basis), [[1.0]])
    assert np.array_equal(assemble_surface_matrix([(0, 0), (2.0, 0)], basis), np.eye(2))


def test_duplicate_points_raise():
    with pytest.raises(ConditioningError) as err:
        assemble_surface_matrix([(0, 0), (1, 0), (0, 0)], BasisFunction())
    assert err.value.pair == (0, 2)


def test_two_point_weights():
    w = solve_weights([(0.0, 0.0), (1.0, 0.0)], [(1.0, 0.0), (0.0, 0.0)], BasisFunction("C2", 2.0))
    assert w.alpha[:, 0] == pytest.approx([ALPHA1, ALPHA2], rel=1e-14)
    assert w.alpha[0, 0] == pytest.approx(1.036437, abs=5e-7)
    assert w.alpha[1, 0] == pytest.approx(-0.194332, abs=5e-7)
    assert not w.alpha[:, 1].any()


def test_midpoint_value():
    basis = BasisFunction("C2", 2.0)
    w = solve_weights([(0.0, 0.0), (1.0, 0.0)], [(1.0, 0.0), (0.0, 0.0)], basis)
    f = eval_interpolant(w, basis, np.array([0.5, 0.0]))
    assert f[0] == pytest.approx((ALPHA1 + ALPHA2) * PHI_QUARTER, rel=1e-14)
    assert f[0] == pytest.approx(MIDPOINT, rel=1e-14)


def test_zero_rhs_gives_zero_weights():
    w = solve_weights(np.random.default_rng(0).random((10, 3)), np.zeros((10, 3)), BasisFunction())
    assert not w.alpha.any()


def test_isolated_control_returns_alpha():
    basis = BasisFunction("C2", 0.5)
    w = WeightSet([(0.0, 0.0), (2.0, 0.0)], [(0.3, -0.7), (1.0, 1.0)])
    assert np.array_equal(eval_interpolant(w, basis, np.array([0.0, 0.0])), [0.3, -0.7])
    assert np.array_equal(eval_interpolant(w, basis, np.array([1.0, 5.0])), [0.0, 0.0])


def test_exactness_random_cloud(rng):
    basis = BasisFunction("C2", 0.7)
    pts = rng.random((20, 2))
    data = rng.normal(size=(20, 2))
    w = solve_weights(pts, data, basis)
    back = evaluate(w, basis, pts)
    assert np.abs(back - data).max() / np.abs(data).max() < 1e-10


def test_incremental_matches_full_factor(rng):
    basis = BasisFunction("C4", 0.8)
    pts = rng.random((40, 3))
    phi = assemble_surface_matrix(pts, basis)
    inc = IncrementalCholesky(capacity=4)
    for k in range(len(pts)):
        inc.append(phi[k, :k], phi[k, k])
    full = np.linalg.cholesky(phi)
    assert np.allclose(inc.L, full, rtol=0, atol=1e-12)
    rhs = rng.normal(size=(40, 3))
    assert np.allclose(inc.solve(rhs), np.linalg.solve(phi, rhs), atol=1e-9)
    assert inc.min_pivot > 0


def test_near_coincident_pair_named():
    pts = np.array([(0.0, 0.0), (1.0, 0.0), (0.3, 0.2), (1.0, 1e-12)])
    phi = assemble_surface_matrix(pts, BasisFunction("C2", 4.0))
    with pytest.raises(ConditioningError) as err:
        IncrementalCholesky.factor(phi)
    assert err.value.pair == (1, 3)


def test_evaluate_blocks_agree(rng):
    basis = BasisFunction("C2", 0.3)
    w = WeightSet(rng.random((15, 2)), rng.normal(size=(15, 2)))
    q = rng.random((50, 2))
    assert np.array_equal(evaluate(w, basis, q, block=7), evaluate(w, basis, q))
    direct = assemble_matrix(q, w.control_positions, basis) @ w.alpha
    assert np.allclose(evaluate(w, basis, q), direct, rtol=0, atol=1e-15)


def test_non_finite_weights_rejected():
    with pytest.raises(ValueError):
        WeightSet([(0.0, 0.0)], [(np.nan, 0.0)])


@settings(max_examples=40, deadline=None)
@given(
    n=st.integers(1, 30),
    dim=st.sampled_from([2, 3]),
    kind=st.sampled_from(sorted(WENDLAND)),
    seed=st.integers(0, 2**31),
)
def test_exactness_property(n, dim, kind, seed):
    gen = np.random.default_rng(seed)
    pts = gen.random((n, dim))
    data = gen.normal(size=(n, dim))
    basis = BasisFunction(kind, 0.5)
    w = solve_weights(pts, data, basis)
    assert np.abs(evaluate(w, basis, pts) - data).max() <= 1e-10 * np.abs(data).max()


@settings(max_examples=40, deadline=None)
@given(n=st.integers(2, 25), seed=st.integers(0, 2**31))
def test_matrix_symmetric_positive_definite(n, seed):
    pts = np.random.default_rng(seed).random((n, 2))
    phi = assemble_surface_matrix(pts, BasisFunction("C2", 1.0))
    assert np.array_equal(phi, phi.T)
    assert np.all(np.diag(phi) == 1.0)
    assert IncrementalCholesky.factor(phi).min_pivot > 0


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**31))
def test_locality_property(seed):
    gen = np.random.default_rng(seed)
    basis = BasisFunction("C2", 0.2)
    pts = gen.random((12, 2))
    w = WeightSet(pts, gen.normal(size=(12, 2)))
    far = np.array([5.0, 5.0]) + gen.random(2)
    assert not eval_interpolant(w, basis, far).any()
