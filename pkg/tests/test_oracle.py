import itertools

import numpy as np
import pytest

from attrisbm import (
    AttributedGraph,
    BudgetExceeded,
    ModelParams,
    SymmetricSpec,
    exact_marginals,
    expand_symmetric,
    run_full_pairwise,
)


def _random_tree(n, rng):
    edges = [(int(rng.integers(0, i)), i) for i in range(1, n)]
    return np.asarray(edges, dtype=np.int64)


def _random_params(rng, n, K=2, R=2, cmax=4.0):
    mat = rng.uniform(0, min(cmax, n), size=(K * R, K * R))
    mat = (mat + mat.T) / 2
    prior = rng.uniform(0.2, 1.0, size=(K, R))
    prior /= prior.sum(axis=0, keepdims=True)
    sizes = rng.multinomial(n, np.full(R, 1 / R))
    return ModelParams(n=n, K=K, R=R, group_sizes=sizes, prior=prior, affinity=mat)


def _random_instance(rng, n, **kw):
    params = _random_params(rng, n, **kw)
    attrs = np.repeat(np.arange(params.R), params.group_sizes)
    edges = _random_tree(n, rng)
    return AttributedGraph(n=n, attrs=attrs, edges=edges), params


def test_single_node_marginal_is_prior_column():
    params = _random_params(np.random.default_rng(0), n=1, R=1)
    g = AttributedGraph(n=1, attrs=np.array([0]), edges=np.empty((0, 2)))
    marg = exact_marginals(g, params)
    assert np.allclose(marg[0], params.prior[:, 0], atol=1e-12)


def test_two_nodes_no_edge_uniform_prior_symmetric_affinity():
    params = expand_symmetric(SymmetricSpec(K=2, R=1, a=1.5, b=1.0, c=1.0, n=2))
    g = AttributedGraph(n=2, attrs=np.array([0, 0]), edges=np.empty((0, 2)))
    marg = exact_marginals(g, params)
    assert np.allclose(marg, 0.5, atol=1e-12)


def test_enumeration_matches_handwritten_two_node_case():
    # two nodes, one edge, asymmetric prior: joint(k0,k1) ~ q0 q1 c(k0,k1)/n
    prior = np.array([[0.7], [0.3]])
    aff = np.array([[1.6, 0.4], [0.4, 1.2]])
    params = ModelParams(n=2, K=2, R=1, group_sizes=np.array([2]),
                         prior=prior, affinity=aff)
    g = AttributedGraph(n=2, attrs=np.array([0, 0]), edges=np.array([[0, 1]]))
    marg = exact_marginals(g, params, include_nonedge_factors=True)
    joint = np.zeros((2, 2))
    for k0, k1 in itertools.product(range(2), repeat=2):
        joint[k0, k1] = prior[k0, 0] * prior[k1, 0] * aff[k0, k1] / 2
    joint /= joint.sum()
    assert np.allclose(marg[0], joint.sum(axis=1), atol=1e-12)
    assert np.allclose(marg[1], joint.sum(axis=0), atol=1e-12)


def test_enumeration_includes_nonedge_factors():
    # same two nodes without the edge: non-edge factor (1 - c/n) must matter
    prior = np.array([[0.5], [0.5]])
    aff = np.array([[1.8, 0.2], [0.2, 0.6]])
    params = ModelParams(n=2, K=2, R=1, group_sizes=np.array([2]),
                         prior=prior, affinity=aff)
    g = AttributedGraph(n=2, attrs=np.array([0, 0]), edges=np.empty((0, 2)))
    with_factors = exact_marginals(g, params, include_nonedge_factors=True)
    without = exact_marginals(g, params, include_nonedge_factors=False)
    assert np.allclose(without, 0.5, atol=1e-12)
    joint = np.zeros((2, 2))
    for k0, k1 in itertools.product(range(2), repeat=2):
        joint[k0, k1] = 0.25 * (1 - aff[k0, k1] / 2)
    joint /= joint.sum()
    assert np.allclose(with_factors[0], joint.sum(axis=1), atol=1e-12)
    assert not np.allclose(with_factors, 0.5, atol=1e-3)


def test_budget_error():
    params = _random_params(np.random.default_rng(1), n=24, R=1)
    g = AttributedGraph(n=24, attrs=np.zeros(24, dtype=int), edges=np.empty((0, 2)))
    with pytest.raises(BudgetExceeded):
        exact_marginals(g, params, budget=1_000_000)


def test_sum_product_is_exact_on_trees_for_edge_factors():
    # with non-edge factors excluded on both sides the factor graph is the
    # tree itself, and message passing reproduces enumeration to precision
    rng = np.random.default_rng(2)
    worst = 0.0
    for _ in range(30):
        n = int(rng.integers(4, 11))
        g, params = _random_instance(rng, n)
        exact = exact_marginals(g, params, include_nonedge_factors=False)
        bp, converged = run_full_pairwise(g, params, include_nonedge_factors=False)
        assert converged
        worst = max(worst, float(np.abs(exact - bp).max()))
    assert worst < 1e-10, f"tree-factor sum-product deviated by {worst}"


def test_full_pairwise_marginals_are_normalized_and_converge():
    rng = np.random.default_rng(3)
    g, params = _random_instance(rng, 8)
    marg, converged = run_full_pairwise(g, params, include_nonedge_factors=True)
    assert converged
    assert np.allclose(marg.sum(axis=1), 1.0, atol=1e-12)
    assert marg.min() >= 0


def test_nonedge_factor_discrepancy_shrinks_with_n():
    # the full-likelihood factor graph is complete, so loopy message passing
    # is biased at small n; the bias must decay as non-edge factors flatten
    rng = np.random.default_rng(4)
    gaps = {6: [], 14: []}
    for n in gaps:
        for _ in range(8):
            g, params = _random_instance(rng, n, cmax=2.5)
            exact = exact_marginals(g, params, include_nonedge_factors=True)
            bp, _ = run_full_pairwise(g, params, include_nonedge_factors=True)
            gaps[n].append(float(np.abs(exact - bp).max()))
    assert np.median(gaps[14]) < np.median(gaps[6])
