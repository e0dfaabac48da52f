import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from dgswp.exact import (brute_force_assignment, cost_matrix, hungarian_assignment, lp_transport,
                         vertex_brute_force, wasserstein_exact)
from dgswp.measures import DiscreteMeasure, make_uniform
from dgswp.poincare import poincare_distance

from conftest import crossing_pair


def test_two_by_two_identity():
    total, perm = brute_force_assignment([[0, 1], [1, 0]])
    assert total == 0 and perm.tolist() == [0, 1]
    mu = make_uniform([[0.0], [1.0]])
    cost, plan = wasserstein_exact(mu, mu, 2)
    assert cost == 0.0
    assert np.allclose(plan.to_dense(), np.eye(2) / 2)


def test_crossing_pair_w2_is_one():
    mu, nu = crossing_pair()
    cost, plan = wasserstein_exact(mu, nu, 2)
    assert cost == pytest.approx(1.0, abs=1e-12)
    assert np.allclose(plan.to_dense(), [[0, 0.5], [0.5, 0]])


def test_brute_force_single_entry():
    total, perm = brute_force_assignment([[3.5]])
    assert total == 3.5 and perm.tolist() == [0]


def test_brute_force_prefers_anti_diagonal():
    cost = np.full((4, 4), 0.0) + 10 * np.eye(4)
    total, perm = brute_force_assignment(cost)
    assert total == 0.0
    assert np.all(perm != np.arange(4))
    # lexicographically smallest derangement
    assert perm.tolist() == [1, 0, 3, 2]


def test_brute_force_lexicographic_ties():
    assert brute_force_assignment(np.zeros((3, 3)))[1].tolist() == [0, 1, 2]


def test_brute_force_size_limit():
    with pytest.raises(ValueError):
        brute_force_assignment(np.zeros((9, 9)))


def test_hungarian_matches_brute_force_on_5x5():
    rng = np.random.default_rng(0)
    for _ in range(100):
        C = rng.uniform(0, 10, size=(5, 5))
        assert hungarian_assignment(C)[0] == pytest.approx(brute_force_assignment(C)[0], abs=1e-9)


@given(arrays(float, (4, 4), elements=st.floats(0, 100)))
def test_brute_force_agrees_with_hungarian(C):
    assert brute_force_assignment(C)[0] == pytest.approx(hungarian_assignment(C)[0], abs=1e-9)


@given(st.integers(1, 4), st.integers(1, 4), st.data())
def test_vertex_enumeration_matches_lp(n, m, data):
    C = data.draw(arrays(float, (n, m), elements=st.floats(0, 10)))
    a = data.draw(arrays(float, n, elements=st.floats(0.1, 1)))
    b = data.draw(arrays(float, m, elements=st.floats(0.1, 1)))
    a, b = a / a.sum(), b / b.sum()
    v, plan = vertex_brute_force(C, a, b)
    ref, _ = lp_transport(C, a, b)
    assert v == pytest.approx(ref, abs=1e-9)
    assert np.allclose(plan.sum(1), a, atol=1e-9) and np.allclose(plan.sum(0), b, atol=1e-9)


def test_general_marginals_exact():
    mu = DiscreteMeasure([[0.0]], [1.0])
    nu = DiscreteMeasure([[-1.0], [1.0]], [0.5, 0.5])
    cost, plan = wasserstein_exact(mu, nu, 2)
    assert cost == pytest.approx(1.0)
    assert plan.check_marginals(mu.weights, nu.weights)


def test_size_limits():
    big = make_uniform(np.zeros((513, 1)))
    with pytest.raises(ValueError):
        wasserstein_exact(big, big)
    mu = DiscreteMeasure(np.zeros((9, 1)), np.full(9, 1 / 9))
    nu = DiscreteMeasure(np.zeros((8, 1)), np.full(8, 1 / 8))
    with pytest.raises(ValueError):
        wasserstein_exact(mu, nu)


def test_cost_matrix_lp_and_poincare():
    x = np.array([[0.0, 0.0], [1.0, 2.0]])
    y = np.array([[1.0, -1.0]])
    assert cost_matrix(x, y, 3).ravel().tolist() == [2.0, 27.0]
    assert cost_matrix(x, x, 2).diagonal().tolist() == [0.0, 0.0]
    u = np.array([[0.1, 0.2], [0.0, 0.5]])
    v = np.array([[0.3, -0.4]])
    expected = poincare_distance(u, np.repeat(v, 2, axis=0)) ** 2
    assert np.allclose(cost_matrix(u, v, 2, "poincare").ravel(), expected)


@given(st.integers(2, 6), st.integers(0, 10 ** 6))
def test_any_coupling_upper_bounds_exact(n, seed):
    rng = np.random.default_rng(seed)
    mu = make_uniform(rng.normal(size=(n, 2)))
    nu = make_uniform(rng.normal(size=(n, 2)))
    exact, _ = wasserstein_exact(mu, nu, 2)
    C = cost_matrix(mu.points, nu.points, 2)
    independent = np.outer(mu.weights, nu.weights)
    perm = rng.permutation(n)
    assert (C * independent).sum() >= exact - 1e-9
    assert C[np.arange(n), perm].mean() >= exact - 1e-9
