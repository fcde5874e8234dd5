import numpy as np
import pytest

from attrisbm import (
    BudgetExceeded,
    SymmetricSpec,
    build_edge_type_system,
    build_m2,
    expand_symmetric,
    simulate_perturbation_growth,
    spectral_radius,
    transfer_spectral_radii,
)
from attrisbm.branching import expected_tree_size

WORKED = SymmetricSpec(K=2, R=2, a=10, b=6, c=2, n=4000)


def _system(spec):
    params = expand_symmetric(spec)
    return build_edge_type_system(params), params.prior


def test_growth_rate_tracks_m2_radius():
    sys, prior = _system(WORKED)
    rho = spectral_radius(build_m2(sys, prior))
    est = simulate_perturbation_growth(sys, prior, depth=8, trials=4000, seed=11)
    assert est.rate == pytest.approx(rho, rel=0.10)


def test_uniform_sigma_mass_dies_immediately():
    sys, prior = _system(SymmetricSpec(K=2, R=2, a=5, b=5, c=5, n=400))
    est = simulate_perturbation_growth(sys, prior, depth=5, trials=200, seed=1)
    assert est.rate == 0.0
    assert est.mean_mass_by_level[0] == 1.0
    assert np.all(est.mean_mass_by_level[1:] == 0.0)


def test_r1_scalar_branching_oracle():
    spec = SymmetricSpec(K=2, R=1, a=6, b=4, c=2, n=100)
    sys, prior = _system(spec)
    d = (6 + 2) / 2
    ups = (6 - 2) / (6 + 2)
    est = simulate_perturbation_growth(sys, prior, depth=8, trials=4000, seed=2)
    assert est.rate == pytest.approx(d * ups**2, rel=0.10)


def test_mean_level_mass_matches_matrix_powers():
    sys, prior = _system(WORKED)
    m2 = build_m2(sys, prior)
    est = simulate_perturbation_growth(sys, prior, depth=6, trials=20_000, seed=3)
    R = sys.R
    for d in range(7):
        md = np.linalg.matrix_power(m2, d)
        # root attribute uniform; the unit vector sits at type (1, r), far end r
        analytic = np.mean([md[:, r].sum() for r in range(R)])
        assert est.mean_mass_by_level[d] == pytest.approx(analytic, rel=0.08), f"level {d}"


def test_aggregated_simulation_matches_per_node_oracle():
    # naive per-node tree growth, same law, small depth
    spec = SymmetricSpec(K=2, R=2, a=8, b=5, c=2, n=400)
    sys, prior = _system(spec)
    ups2 = transfer_spectral_radii(sys, prior) ** 2
    cab = sys.cab
    rng = np.random.default_rng(42)
    depth, trials = 4, 3000
    masses = np.zeros((trials, depth + 1))
    for t in range(trials):
        level = [(int(rng.integers(0, 2)), 1.0)]
        masses[t, 0] = 1.0
        for d in range(1, depth + 1):
            nxt = []
            for attr, w in level:
                for b in range(2):
                    for _ in range(rng.poisson(cab[attr, b])):
                        nxt.append((b, w * ups2[attr, b]))
            level = nxt
            masses[t, d] = sum(w for _, w in level)
    naive_means = masses.mean(axis=0)
    est = simulate_perturbation_growth(sys, prior, depth=depth, trials=trials, seed=7)
    for d in range(depth + 1):
        assert est.mean_mass_by_level[d] == pytest.approx(naive_means[d], rel=0.15), f"level {d}"


def test_expected_tree_size_and_budget_error():
    sys, prior = _system(WORKED)
    size = expected_tree_size(sys.cab, 8)
    assert size == pytest.approx(sum(5.0**d for d in range(9)), rel=1e-9)
    with pytest.raises(BudgetExceeded):
        simulate_perturbation_growth(sys, prior, depth=30, trials=10, seed=0)
    with pytest.raises(ValueError):
        simulate_perturbation_growth(sys, prior, depth=0, trials=10, seed=0)
