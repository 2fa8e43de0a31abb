"""Small graph families and seeded random instances."""

from __future__ import annotations

import numpy as np

from .graph import DiscreteGraph, MetricEdge, MetricGraphModel, SimpleGraph


def path_graph(n: int) -> SimpleGraph:
    return SimpleGraph(range(n), [(i, i + 1) for i in range(n - 1)])


def cycle_graph(n: int) -> SimpleGraph:
    return SimpleGraph(range(n), [(i, (i + 1) % n) for i in range(n)])


def star_graph(leaves: int) -> SimpleGraph:
    """Center 0 joined to leaves 1..leaves."""
    return SimpleGraph(range(leaves + 1), [(0, i) for i in range(1, leaves + 1)])


def complete_graph(n: int) -> SimpleGraph:
    return SimpleGraph(range(n), [(i, j) for i in range(n) for j in range(i + 1, n)])


def grid_graph(rows: int, cols: int) -> SimpleGraph:
    def vid(r, c):
        return r * cols + c

    edges = []
    for r in range(rows):
        for c in range(cols):
            if c + 1 < cols:
                edges.append((vid(r, c), vid(r, c + 1)))
            if r + 1 < rows:
                edges.append((vid(r, c), vid(r + 1, c)))
    return SimpleGraph(range(rows * cols), edges)


def line_model(radius: int, length=1.0) -> MetricGraphModel:
    """Unit cable system of Z truncated to [-radius, radius]."""
    verts = list(range(-radius, radius + 1))
    edges = [MetricEdge(f"e{i}", i, i + 1, length) for i in range(-radius, radius)]
    return MetricGraphModel(verts, edges)


def _random_tree_plus(rng: np.random.Generator, n: int, extra: int):
    edges = set()
    for i in range(1, n):
        j = int(rng.integers(0, i))
        edges.add((j, i))
    tries = 0
    while extra > 0 and tries < 50 * (extra + 1) and n > 2:
        tries += 1
        i, j = sorted(int(x) for x in rng.choice(n, size=2, replace=False))
        if (i, j) not in edges:
            edges.add((i, j))
            extra -= 1
    return sorted(edges)


def random_discrete_graph(rng: np.random.Generator, n: int | None = None, *,
                          max_n=40, low=0.1, high=10.0) -> DiscreteGraph:
    """Connected graph with m and b drawn uniformly from [low, high]."""
    if n is None:
        n = int(rng.integers(2, max_n + 1))
    extra = int(rng.integers(0, 2 * n + 1))
    pairs = _random_tree_plus(rng, n, extra)
    m = {v: float(rng.uniform(low, high)) for v in range(n)}
    edges = [(u, v, float(rng.uniform(low, high))) for u, v in pairs]
    return DiscreteGraph.from_edges(range(n), m, edges)


def random_model(rng: np.random.Generator, n: int | None = None, *, max_n=20,
                 loops=True, multi=True, low=0.1, high=10.0) -> MetricGraphModel:
    """Connected metric model, optionally with loops and parallel edges."""
    if n is None:
        n = int(rng.integers(1, max_n + 1))
    pairs = _random_tree_plus(rng, n, int(rng.integers(0, n + 1)))
    if multi and pairs:
        for _ in range(int(rng.integers(0, 3))):
            pairs.append(pairs[int(rng.integers(0, len(pairs)))])
    if loops or n == 1:
        for _ in range(int(rng.integers(0 if n > 1 else 1, 3))):
            v = int(rng.integers(0, n))
            pairs.append((v, v))
    edges = []
    for k, (u, v) in enumerate(pairs):
        if rng.random() < 0.5:
            u, v = v, u
        edges.append(MetricEdge(f"e{k}", u, v,
                                float(rng.uniform(low, high)),
                                float(rng.uniform(low, high)),
                                float(rng.uniform(low, high))))
    return MetricGraphModel(range(n), edges)
