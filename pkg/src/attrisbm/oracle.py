"""Exact marginals by exhaustive enumeration, and message passing on all pairs.

Both routes are for tiny instances. The enumeration weighs every assignment
by the full model likelihood: prior factors, c/n per edge and, unless
disabled, (1 - c/n) per non-edge. The all-pairs message passing handles the
same factors without the external-field shortcut; with non-edge factors
disabled it is sum-product over the graph's edge factors alone, which is
exact on trees.
"""
from __future__ import annotations

import numpy as np

from .errors import BudgetExceeded, DegenerateInput, ModelError
from .graphs import AttributedGraph
from .model import ModelParams


def _check_instance(graph: AttributedGraph, params: ModelParams) -> None:
    if graph.n != params.n:
        raise ModelError(f"graph has {graph.n} nodes but the model expects n={params.n}")
    if graph.attrs.size and graph.attrs.max() >= params.R:
        raise ModelError(
            f"attribute category {int(graph.attrs.max()) + 1} exceeds the model's R={params.R}"
        )


def exact_marginals(
    graph: AttributedGraph,
    params: ModelParams,
    include_nonedge_factors: bool = True,
    budget: int = 1_000_000,
) -> np.ndarray:
    """Per-node community marginals from all K^n assignments."""
    _check_instance(graph, params)
    n, K, R = graph.n, params.K, params.R
    total = K**n
    if total > budget:
        raise BudgetExceeded(f"K^n = {total} assignments exceed the budget of {budget}")

    codes = np.arange(total, dtype=np.int64)
    assign = np.empty((total, n), dtype=np.int64)
    for pos in range(n):
        assign[:, pos] = (codes // K ** (n - 1 - pos)) % K

    attrs = graph.attrs
    aff = params.affinity
    edge_set = {(int(u), int(v)) for u, v in graph.edges}
    with np.errstate(divide="ignore"):
        logw = np.zeros(total)
        for i in range(n):
            logw += np.log(params.prior[assign[:, i], attrs[i]])
        for i in range(n):
            for j in range(i + 1, n):
                c = aff[assign[:, i] * R + attrs[i], assign[:, j] * R + attrs[j]]
                if (i, j) in edge_set:
                    logw += np.log(c / n)
                elif include_nonedge_factors:
                    logw += np.log1p(-c / n)

    peak = logw.max()
    if not np.isfinite(peak):
        raise DegenerateInput("every assignment has zero likelihood under the model")
    weights = np.exp(logw - peak)
    norm = weights.sum()
    marginals = np.empty((n, K))
    for i in range(n):
        marginals[i] = np.bincount(assign[:, i], weights=weights, minlength=K) / norm
    return marginals


def run_full_pairwise(
    graph: AttributedGraph,
    params: ModelParams,
    include_nonedge_factors: bool = True,
    max_sweeps: int = 5000,
    tol: float = 1e-13,
) -> tuple[np.ndarray, bool]:
    """Marginals from message passing over every ordered node pair.

    Edge pairs use the c factor, non-edge pairs the (1 - c/n) factor (or no
    factor at all when disabled). Returns (marginals, converged).
    """
    _check_instance(graph, params)
    n, K = graph.n, params.K
    attrs = graph.attrs
    aff4 = params.affinity_4d()
    edge_set = {(int(u), int(v)) for u, v in graph.edges}

    # pairwise factor tables W[l, i] as (k_l, k_i) matrices
    W = np.ones((n, n, K, K))
    for l in range(n):
        for i in range(n):
            if l == i:
                continue
            c = aff4[:, attrs[l], :, attrs[i]]
            if (min(l, i), max(l, i)) in edge_set:
                W[l, i] = c  # the 1/n in c/n is constant per edge and normalizes away
            elif include_nonedge_factors:
                W[l, i] = 1.0 - c / n

    msg = np.empty((n, n, K))
    for i in range(n):
        msg[i, :, :] = params.prior[:, attrs[i]]

    converged = False
    for _ in range(max_sweeps):
        delta = 0.0
        for i in range(n):
            incoming = np.einsum("lab,la->lb", W[:, i], msg[:, i])
            for j in range(n):
                if j == i:
                    continue
                mask = np.ones(n, dtype=bool)
                mask[i] = mask[j] = False
                new = params.prior[:, attrs[i]] * np.prod(incoming[mask], axis=0)
                z = new.sum()
                if not (z > 0 and np.isfinite(z)):
                    raise DegenerateInput(f"message normalizer vanished on pair {i}->{j}")
                new /= z
                delta = max(delta, float(np.abs(new - msg[i, j]).max()))
                msg[i, j] = new
        if delta < tol:
            converged = True
            break

    marginals = np.empty((n, K))
    for i in range(n):
        incoming = np.einsum("lab,la->lb", W[:, i], msg[:, i])
        mask = np.ones(n, dtype=bool)
        mask[i] = False
        m = params.prior[:, attrs[i]] * np.prod(incoming[mask], axis=0)
        marginals[i] = m / m.sum()
    return marginals, converged
