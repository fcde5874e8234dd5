"""Monte-Carlo validation of the fixed-point stability criterion.

Grows multi-type branching trees in which a node of attribute a spawns a
Poisson(c_ab) number of attribute-b children, and accumulates, per level, the
total path mass sum over root-to-node paths of the product of squared
transfer-matrix radii along the path. The geometric growth rate of that mass
converges to the spectral radius of M2.

Nodes with the same (attribute, path mass) within a tree are interchangeable,
so the simulation keeps (attribute, mass) -> count aggregates per level and
draws one Poisson total per aggregate (a sum of i.i.d. Poisson counts is
Poisson in the summed mean). This is distribution-identical to growing each
node separately and keeps supercritical trees tractable.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BudgetExceeded
from .rng import STREAM_BRANCHING, RngSeed, as_seed
from .spectral import EdgeTypeSystem, transfer_spectral_radii


@dataclass(frozen=True)
class GrowthEstimate:
    """Fitted per-level geometric growth rate with the per-level mean masses."""

    rate: float
    mean_mass_by_level: np.ndarray


def expected_tree_size(cab: np.ndarray, depth: int) -> float:
    """Largest (over root attribute) expected node count of a depth-d tree."""
    R = cab.shape[0]
    totals = np.zeros(R)
    level = np.eye(R)
    totals += level.sum(axis=1)
    for _ in range(depth):
        level = level @ cab
        totals += level.sum(axis=1)
    return float(totals.max())


def simulate_perturbation_growth(
    sys: EdgeTypeSystem,
    prior: np.ndarray,
    depth: int,
    trials: int,
    seed: RngSeed | int,
    node_budget: int = 1_000_000,
) -> GrowthEstimate:
    """Estimate the growth rate of the perturbation mass over tree levels.

    Roots draw their attribute uniformly; the growth rate does not depend on
    the root distribution. Raises BudgetExceeded when the expected tree size
    exceeds ``node_budget`` nodes; realized counts are held as aggregate
    multiplicities, so an unlucky heavy tree cannot exhaust memory.
    """
    if depth < 1 or trials < 1:
        raise ValueError(f"need depth >= 1 and trials >= 1, got {depth}, {trials}")
    expected = expected_tree_size(sys.cab, depth)
    if expected > node_budget:
        raise BudgetExceeded(
            f"expected tree size {expected:.3g} exceeds node budget {node_budget}"
        )

    ups2 = transfer_spectral_radii(sys, prior) ** 2
    cab = sys.cab
    R = sys.R
    rng = as_seed(seed).stream(STREAM_BRANCHING)

    mass = np.zeros((trials, depth + 1))
    mass[:, 0] = 1.0

    tree = np.arange(trials, dtype=np.int64)
    attr = rng.integers(0, R, size=trials)
    weight = np.ones(trials)
    count = np.ones(trials, dtype=np.int64)

    for level in range(1, depth + 1):
        new_tree, new_attr, new_weight, new_count = [], [], [], []
        for b in range(R):
            lam = count * cab[attr, b]
            kids = rng.poisson(lam)
            keep = kids > 0
            if not keep.any():
                continue
            new_tree.append(tree[keep])
            new_attr.append(np.full(int(keep.sum()), b, dtype=np.int64))
            new_weight.append(weight[keep] * ups2[attr[keep], b])
            new_count.append(kids[keep])
        if not new_tree:
            break
        tree = np.concatenate(new_tree)
        attr = np.concatenate(new_attr)
        weight = np.concatenate(new_weight)
        count = np.concatenate(new_count)

        np.add.at(mass[:, level], tree, weight * count)

        # merge rows sharing (tree, attr, weight) to keep the state small
        order = np.lexsort((weight, attr, tree))
        tree, attr, weight, count = tree[order], attr[order], weight[order], count[order]
        boundary = np.ones(tree.size, dtype=bool)
        boundary[1:] = (
            (tree[1:] != tree[:-1]) | (attr[1:] != attr[:-1]) | (weight[1:] != weight[:-1])
        )
        starts = np.flatnonzero(boundary)
        count = np.add.reduceat(count, starts)
        tree, attr, weight = tree[starts], attr[starts], weight[starts]

    means = mass.mean(axis=0)
    rate = _fit_growth_rate(means, depth)
    return GrowthEstimate(rate=rate, mean_mass_by_level=means)


def _fit_growth_rate(means: np.ndarray, depth: int) -> float:
    levels = np.arange(depth + 1)
    positive = means > 0
    if not positive[1:].any():
        return 0.0
    window = levels[(levels >= max(1, depth // 2)) & positive]
    if window.size < 2:
        window = levels[(levels >= 1) & positive]
    if window.size == 1:
        d = int(window[0])
        return float(means[d] ** (1.0 / d))
    slope = np.polyfit(window, np.log(means[window]), 1)[0]
    return float(np.exp(slope))
