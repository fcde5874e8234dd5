"""Sampling attributed graphs from the block model.

Nodes are laid out sorted by attribute category (the first n_1 nodes carry
category 1, and so on); the attribute order carries no information. Edge
sampling groups nodes into (community, attribute) cells and draws a binomial
edge count per cell pair, which is distribution-identical to flipping one
Bernoulli coin per node pair but runs in O(n + |E|) expected time.
"""
from __future__ import annotations

import numpy as np

from .errors import ModelError
from .graphs import AttributedGraph
from .model import ModelParams
from .rng import STREAM_COMMUNITIES, STREAM_EDGES, RngSeed, as_seed


def attribute_layout(params: ModelParams) -> np.ndarray:
    """Per-node attribute categories under the fixed sorted layout."""
    return np.repeat(np.arange(params.R, dtype=np.int64), params.group_sizes)


def sample_communities(params: ModelParams, seed: RngSeed | int) -> np.ndarray:
    """Draw each node's community label from its attribute's prior column."""
    rng = as_seed(seed).stream(STREAM_COMMUNITIES)
    attrs = attribute_layout(params)
    labels = np.empty(params.n, dtype=np.int64)
    start = 0
    for r in range(params.R):
        size = int(params.group_sizes[r])
        labels[start:start + size] = rng.choice(params.K, size=size, p=params.prior[:, r])
        start += size
    return labels


def _unrank_within_cell(ranks: np.ndarray, s: int) -> tuple[np.ndarray, np.ndarray]:
    """Map pair ranks in 0..s(s-1)/2-1 to index pairs (i, j), i < j, within a cell."""
    # row i (0-based) owns s-1-i consecutive ranks starting at offset(i)
    row_counts = np.arange(s - 1, 0, -1, dtype=np.int64)
    offsets = np.concatenate([[0], np.cumsum(row_counts)])
    i = np.searchsorted(offsets, ranks, side="right") - 1
    j = i + 1 + (ranks - offsets[i])
    return i, j


def sample_graph(
    params: ModelParams, labels: np.ndarray, seed: RngSeed | int
) -> AttributedGraph:
    """Sample edges given community labels; returns a graph carrying the labels as truth."""
    labels = np.asarray(labels, dtype=np.int64)
    if labels.shape != (params.n,):
        raise ModelError(f"labels must have shape ({params.n},), got {labels.shape}")
    if labels.size and (labels.min() < 0 or labels.max() >= params.K):
        raise ModelError(f"labels must lie in 0..{params.K - 1}")
    if params.affinity.max(initial=0.0) > params.n:
        raise ModelError("affinity entries above n give edge probabilities above 1")

    attrs = attribute_layout(params)
    cells = labels * params.R + attrs
    ncells = params.K * params.R
    members = [np.flatnonzero(cells == c) for c in range(ncells)]

    rng = as_seed(seed).stream(STREAM_EDGES)
    chunks = []
    for ca in range(ncells):
        a_nodes = members[ca]
        sa = a_nodes.size
        for cb in range(ca, ncells):
            p = params.affinity[ca, cb] / params.n
            if p == 0.0:
                continue
            if ca == cb:
                npairs = sa * (sa - 1) // 2
            else:
                b_nodes = members[cb]
                npairs = sa * b_nodes.size
            if npairs == 0:
                continue
            m = int(rng.binomial(npairs, p))
            if m == 0:
                continue
            ranks = np.sort(rng.choice(npairs, size=m, replace=False))
            if ca == cb:
                i, j = _unrank_within_cell(ranks, sa)
                u, v = a_nodes[i], a_nodes[j]
            else:
                sb = members[cb].size
                u, v = a_nodes[ranks // sb], members[cb][ranks % sb]
            lo = np.minimum(u, v)
            hi = np.maximum(u, v)
            chunks.append(np.column_stack([lo, hi]))

    if chunks:
        edges = np.concatenate(chunks)
    else:
        edges = np.empty((0, 2), dtype=np.int64)
    return AttributedGraph(n=params.n, attrs=attrs, edges=edges, truth=labels)


def sample_graph_naive(
    params: ModelParams, labels: np.ndarray, seed: RngSeed | int
) -> AttributedGraph:
    """Reference sampler: one Bernoulli draw per node pair. O(n^2); small n only."""
    labels = np.asarray(labels, dtype=np.int64)
    attrs = attribute_layout(params)
    cells = labels * params.R + attrs
    rng = as_seed(seed).stream(STREAM_EDGES)
    u, v = np.triu_indices(params.n, k=1)
    probs = params.affinity[cells[u], cells[v]] / params.n
    keep = rng.random(u.size) < probs
    edges = np.column_stack([u[keep], v[keep]])
    return AttributedGraph(n=params.n, attrs=attrs, edges=edges, truth=labels)


def generate(params: ModelParams, seed: RngSeed | int) -> AttributedGraph:
    """Sample communities then edges from one master seed."""
    labels = sample_communities(params, seed)
    return sample_graph(params, labels, seed)
