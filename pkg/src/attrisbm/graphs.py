"""Attributed graphs and their on-disk formats.

Edge-list files are UTF-8 text with one ``u v`` pair per line (whitespace
separated, 1-based, undirected); lines starting with '#' are comments and
blank lines are ignored. Attribute files carry one integer category per line,
the line number being the node index; truth files use the same layout for
community labels. Indices are 1-based on disk, 0-based in memory.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ModelError, ParseError


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class AttributedGraph:
    """Simple undirected graph with per-node attribute categories.

    ``edges`` has shape (m, 2) with u < v, lexicographically sorted, no
    duplicates or self-loops. ``truth`` optionally carries ground-truth
    community labels.
    """

    n: int
    attrs: np.ndarray
    edges: np.ndarray
    truth: np.ndarray | None = None

    def __post_init__(self):
        n = int(self.n)
        attrs = np.asarray(self.attrs, dtype=np.int64)
        edges = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        if attrs.shape != (n,):
            raise ModelError(f"attrs must have shape ({n},), got {attrs.shape}")
        if attrs.size and attrs.min() < 0:
            raise ModelError("attribute categories must be nonnegative")
        if edges.size:
            if edges.min() < 0 or edges.max() >= n:
                raise ModelError(f"edge endpoints must lie in 0..{n - 1}")
            if (edges[:, 0] >= edges[:, 1]).any():
                raise ModelError("edges must satisfy u < v (no self-loops)")
            order = np.lexsort((edges[:, 1], edges[:, 0]))
            edges = edges[order]
            if (np.diff(edges, axis=0) == 0).all(axis=1).any():
                raise ModelError("duplicate edges are not allowed")
        truth = self.truth
        if truth is not None:
            truth = np.asarray(truth, dtype=np.int64)
            if truth.shape != (n,):
                raise ModelError(f"truth must have shape ({n},), got {truth.shape}")
            if truth.size and truth.min() < 0:
                raise ModelError("truth labels must be nonnegative")
            truth = _frozen(truth)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "attrs", _frozen(attrs))
        object.__setattr__(self, "edges", _frozen(edges))
        object.__setattr__(self, "truth", truth)

    @property
    def num_edges(self) -> int:
        return int(self.edges.shape[0])

    def degree(self) -> np.ndarray:
        deg = np.zeros(self.n, dtype=np.int64)
        if self.edges.size:
            np.add.at(deg, self.edges[:, 0], 1)
            np.add.at(deg, self.edges[:, 1], 1)
        return deg

    def adjacency_csr(self) -> tuple[np.ndarray, np.ndarray]:
        """(indptr, neighbors) with each node's neighbors sorted ascending."""
        indptr = np.zeros(self.n + 1, dtype=np.int64)
        np.cumsum(self.degree(), out=indptr[1:])
        if self.num_edges == 0:
            return indptr, np.empty(0, dtype=np.int64)
        directed = np.concatenate([self.edges, self.edges[:, ::-1]])
        order = np.lexsort((directed[:, 1], directed[:, 0]))
        return indptr, np.ascontiguousarray(directed[order, 1])


def read_graph(edge_file: str | Path, attr_file: str | Path) -> AttributedGraph:
    """Read and validate a graph from an edge-list file and an attribute file."""
    attr_path = Path(attr_file)
    attrs = []
    with open(attr_path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text:
                raise ParseError(f"{attr_path}:{lineno}: blank line in attribute file")
            try:
                value = int(text)
            except ValueError:
                raise ParseError(
                    f"{attr_path}:{lineno}: expected an integer category, got {text!r}"
                ) from None
            if value < 1:
                raise ParseError(f"{attr_path}:{lineno}: category must be >= 1, got {value}")
            attrs.append(value - 1)
    n = len(attrs)

    edge_path = Path(edge_file)
    edges = []
    seen: set[tuple[int, int]] = set()
    with open(edge_path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            parts = text.split()
            if len(parts) != 2:
                raise ParseError(
                    f"{edge_path}:{lineno}: expected 'u v', got {text!r}"
                )
            try:
                u, v = int(parts[0]), int(parts[1])
            except ValueError:
                raise ParseError(
                    f"{edge_path}:{lineno}: expected integer node indices, got {text!r}"
                ) from None
            if u == v:
                raise ParseError(f"{edge_path}:{lineno}: self-loop on node {u}")
            for w in (u, v):
                if not 1 <= w <= n:
                    raise ParseError(
                        f"{edge_path}:{lineno}: node index {w} out of range 1..{n} "
                        f"(attribute file has {n} lines)"
                    )
            key = (min(u, v) - 1, max(u, v) - 1)
            if key in seen:
                raise ParseError(
                    f"{edge_path}:{lineno}: duplicate edge {key[0] + 1} {key[1] + 1}"
                )
            seen.add(key)
            edges.append(key)

    edge_arr = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    return AttributedGraph(n=n, attrs=np.asarray(attrs), edges=edge_arr, truth=None)


def read_labels(label_file: str | Path, n: int) -> np.ndarray:
    """Read a per-node label file (one 1-based integer per line) of length n."""
    path = Path(label_file)
    labels = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text:
                raise ParseError(f"{path}:{lineno}: blank line in label file")
            try:
                value = int(text)
            except ValueError:
                raise ParseError(
                    f"{path}:{lineno}: expected an integer label, got {text!r}"
                ) from None
            if value < 1:
                raise ParseError(f"{path}:{lineno}: label must be >= 1, got {value}")
            labels.append(value - 1)
    if len(labels) != n:
        raise ParseError(f"{path}: expected {n} lines, got {len(labels)}")
    return np.asarray(labels, dtype=np.int64)


def write_graph(
    graph: AttributedGraph,
    edge_file: str | Path,
    attr_file: str | Path,
    truth_file: str | Path | None = None,
    header: str | None = None,
) -> None:
    """Write edge/attribute (and optionally truth) files; 1-based on disk."""
    with open(edge_file, "w", encoding="utf-8") as fh:
        if header:
            for line in header.splitlines():
                fh.write(f"# {line}\n")
        for u, v in graph.edges:
            fh.write(f"{u + 1} {v + 1}\n")
    with open(attr_file, "w", encoding="utf-8") as fh:
        for r in graph.attrs:
            fh.write(f"{r + 1}\n")
    if truth_file is not None:
        if graph.truth is None:
            raise ModelError("graph has no ground-truth labels to write")
        with open(truth_file, "w", encoding="utf-8") as fh:
            for k in graph.truth:
                fh.write(f"{k + 1}\n")
