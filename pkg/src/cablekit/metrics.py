"""Intrinsic and path metrics on metric graphs and on their vertex sets.

Distances between vertices of a metric graph are computed on the edge
skeleton with intrinsic edge lengths as costs; a point inside an edge is
handled by splitting that edge at the point.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from functools import cached_property
from types import MappingProxyType
from typing import Callable, Hashable, Mapping

import numpy as np

from .correspondence import IntrinsicWeight, intrinsic_size
from .errors import GraphValidationError
from .graph import DiscreteGraph, MetricGraphModel, validate_model

INTRINSIC_RTOL = 1e-12


@dataclass(frozen=True)
class Point:
    """Point at Lebesgue coordinate ``s`` from the initial vertex of edge ``edge``."""

    edge: Hashable
    s: float


@dataclass(frozen=True)
class MetricOnVertices:
    source: str
    vertices: tuple
    table: np.ndarray

    @cached_property
    def index(self) -> Mapping:
        return MappingProxyType({v: i for i, v in enumerate(self.vertices)})

    def __call__(self, u, v) -> float:
        return float(self.table[self.index[u], self.index[v]])

    def rows(self):
        for i, u in enumerate(self.vertices):
            for j, v in enumerate(self.vertices):
                yield u, v, float(self.table[i, j])

    def triangle_violations(self, rng: np.random.Generator, samples=1000, atol=1e-12):
        n = len(self.vertices)
        if n < 3:
            return []
        idx = rng.integers(0, n, size=(samples, 3))
        D = self.table
        lhs = D[idx[:, 0], idx[:, 2]]
        rhs = D[idx[:, 0], idx[:, 1]] + D[idx[:, 1], idx[:, 2]]
        bad = np.nonzero(lhs > rhs + atol * np.maximum(1.0, rhs))[0]
        return [tuple(self.vertices[k] for k in idx[i]) for i in bad]


@dataclass(frozen=True)
class IntrinsicCheck:
    ok: bool
    worst_vertex: Hashable
    slack: float
    slacks: Mapping


@dataclass(frozen=True)
class BallReport:
    center: object
    radius: float
    vertices: tuple
    measure: float


@dataclass(frozen=True)
class QuasiIsometryReport:
    ok: bool
    R: float
    seed: int
    pairs_checked: int
    max_pair_error: float
    points_checked: int
    max_net_distance: float
    violations: tuple


def _dijkstra(adj: Mapping, sources: Mapping) -> dict:
    """Multi-source Dijkstra; ``sources`` maps start vertex -> initial distance."""
    dist = {}
    heap = [(d0, k, v) for k, (v, d0) in enumerate(sources.items())]
    heapq.heapify(heap)
    counter = len(heap)
    while heap:
        d, _, v = heapq.heappop(heap)
        if v in dist:
            continue
        dist[v] = d
        for u, c in adj.get(v, ()):
            if u not in dist:
                counter += 1
                heapq.heappush(heap, (d + c, counter, u))
    return dist


def _eta_adjacency(g: MetricGraphModel) -> dict:
    best: dict = {}
    for e in g.edges:
        if e.is_loop:
            continue
        key = (e.u, e.v)
        eta = e.eta
        if eta < best.get(key, math.inf):
            best[key] = eta
            best[(e.v, e.u)] = eta
    adj: dict = {v: [] for v in g.vertices}
    for (u, v), c in best.items():
        adj[u].append((v, c))
    return adj


def _require_model(g):
    report = validate_model(g)
    if report:
        raise GraphValidationError(report, "metric graph model")


def eta_lengths(g: MetricGraphModel) -> dict:
    return {e.id: e.eta for e in g.edges}


def intrinsic_metric_vertices(g: MetricGraphModel, source) -> dict:
    """Intrinsic distances from a vertex to every vertex of a metric model."""
    _require_model(g)
    if source not in g.incidences:
        raise KeyError(f"unknown vertex {source!r}")
    dist = _dijkstra(_eta_adjacency(g), {source: 0.0})
    return {v: dist[v] for v in g.vertices}


def _table(vertices, adj) -> np.ndarray:
    n = len(vertices)
    T = np.empty((n, n))
    for i, s in enumerate(vertices):
        dist = _dijkstra(adj, {s: 0.0})
        T[i] = [dist.get(v, math.inf) for v in vertices]
    return T


def _weight_fn(p) -> Callable:
    if p is None:
        return lambda u, v: 1.0
    if isinstance(p, IntrinsicWeight) or callable(p):
        return p
    table = dict(p)
    return lambda u, v: table.get((u, v), table.get((v, u), 0.0))


def path_metric(g: DiscreteGraph, p=None) -> MetricOnVertices:
    """Path metric of a weight function p over the support of b.

    ``p=None`` gives the combinatorial distance.
    """
    w = _weight_fn(p)
    adj = {}
    for v in g.vertices:
        row = []
        for u, _ in g.neighbors[v]:
            c = float(w(v, u))
            if not c > 0:
                raise ValueError(f"weight must be positive where b > 0; got p({v!r}, {u!r}) = {c!r}")
            row.append((u, c))
        adj[v] = row
    return MetricOnVertices("combinatorial" if p is None else "path-metric",
                            g.vertices, _table(g.vertices, adj))


def is_intrinsic(g: DiscreteGraph, d) -> IntrinsicCheck:
    """Check sum_u b(u, v) d(u, v)^2 <= m(v) at every vertex.

    ``slack`` is the smallest m(v) minus that sum.
    """
    slacks = {}
    for v in g.vertices:
        total = sum(w * d(u, v) ** 2 for u, w in g.neighbors[v])
        slacks[v] = g.m[v] - total
    worst = min(slacks, key=slacks.get)
    ok = all(s >= -INTRINSIC_RTOL * g.m[v] for v, s in slacks.items())
    return IntrinsicCheck(ok, worst, slacks[worst], MappingProxyType(slacks))


def restrict_metric(g: MetricGraphModel) -> MetricOnVertices:
    _require_model(g)
    return MetricOnVertices("restriction-of-eta", g.vertices,
                            _table(g.vertices, _eta_adjacency(g)))


def jump_size(g: DiscreteGraph, d) -> float:
    return max((d(u, v) for u, v, _ in g.pairs()), default=0.0)


def distances_from_point(g: MetricGraphModel, x: Point) -> dict:
    """Intrinsic distance from an edge point to every vertex."""
    e = g.edge_by_id[x.edge]
    if not 0.0 <= x.s <= e.length:
        raise ValueError(f"coordinate {x.s!r} outside edge {e.id!r} of length {e.length!r}")
    slope = e.eta / e.length
    starts = {e.u: x.s * slope}
    dv = (e.length - x.s) * slope
    if dv < starts.get(e.v, math.inf):
        starts[e.v] = dv
    dist = _dijkstra(_eta_adjacency(g), starts)
    return {v: dist.get(v, math.inf) for v in g.vertices}


def point_distance(g: MetricGraphModel, x: Point, y: Point, from_x: Mapping | None = None) -> float:
    if from_x is None:
        from_x = distances_from_point(g, x)
    f = g.edge_by_id[y.edge]
    slope = f.eta / f.length
    best = min(from_x[f.u] + y.s * slope, from_x[f.v] + (f.length - y.s) * slope)
    if x.edge == y.edge:
        best = min(best, abs(x.s - y.s) * slope)
    return best


def _vertex_point(g: MetricGraphModel, v) -> Point | None:
    for e, end in g.incidences[v]:
        return Point(e.id, 0.0 if end == 0 else e.length)
    return None


def quasi_isometry_check(g: MetricGraphModel, samples=100, seed=0) -> QuasiIsometryReport:
    """Check that the vertex inclusion is a quasi-isometry with a=1, b=0, R=eta*.

    Distances between sampled vertex pairs are recomputed through edge
    points and compared with the restricted metric; ``samples`` points per
    edge are tested for the net property.
    """
    _require_model(g)
    rng = np.random.default_rng(seed)
    R = intrinsic_size(g)
    rho_v = restrict_metric(g)
    violations = []
    n = len(g.vertices)
    max_err = 0.0
    pairs = 0
    for _ in range(samples if n > 1 else 0):
        i, j = (int(k) for k in rng.integers(0, n, size=2))
        u, v = g.vertices[i], g.vertices[j]
        xu, xv = _vertex_point(g, u), _vertex_point(g, v)
        if xu is None or xv is None:
            continue
        d_eta = 0.0 if u == v else point_distance(g, xu, xv)
        err = abs(d_eta - rho_v(u, v))
        pairs += 1
        max_err = max(max_err, err)
        if err > 1e-12 * max(1.0, d_eta):
            violations.append(f"distance mismatch at ({u!r}, {v!r}): {d_eta!r} vs {rho_v(u, v)!r}")
    max_net = 0.0
    points = 0
    for e in g.edges:
        s_values = np.concatenate(([0.5 * e.length], rng.uniform(0.0, e.length, size=samples)))
        slope = e.eta / e.length
        # any path out of an edge point first meets one of the edge's ends
        nearest = np.minimum(s_values, e.length - s_values) * slope
        points += len(s_values)
        worst = float(nearest.max())
        max_net = max(max_net, worst)
        if worst > R * (1 + 1e-12):
            violations.append(f"net property fails on edge {e.id!r}: {worst!r} > R={R!r}")
    return QuasiIsometryReport(not violations, R, seed, pairs, max_err, points,
                               max_net, tuple(violations))


def _union_length(intervals, length) -> float:
    segs = sorted((max(0.0, a), min(length, b)) for a, b in intervals if b > a)
    total, cur_a, cur_b = 0.0, None, None
    for a, b in segs:
        if b <= a:
            continue
        if cur_b is None or a > cur_b:
            if cur_b is not None:
                total += cur_b - cur_a
            cur_a, cur_b = a, b
        else:
            cur_b = max(cur_b, b)
    if cur_b is not None:
        total += cur_b - cur_a
    return total


def _center_distances(g: MetricGraphModel, center):
    if isinstance(center, Point):
        return distances_from_point(g, center)
    if center not in g.incidences:
        raise KeyError(f"unknown vertex {center!r}")
    return _dijkstra(_eta_adjacency(g), {center: 0.0})


def ball_volumes(g: MetricGraphModel, center, radii, dist: Mapping | None = None) -> np.ndarray:
    """mu-measure of intrinsic balls B_r(center) for each r in ``radii``.

    On each edge the parts reached through its two ends are summed and
    clipped at the edge length; the edge holding a point center also gets
    the directly covered segment.
    """
    if dist is None:
        dist = _center_distances(g, center)
    radii = np.asarray(radii, dtype=float)
    if np.any(radii < 0):
        raise ValueError("radius must be nonnegative")
    L = np.array([e.length for e in g.edges])
    slope = np.array([e.eta / e.length for e in g.edges])
    mu = np.array([e.mu for e in g.edges])
    du = np.array([dist[e.u] for e in g.edges])
    dv = np.array([dist[e.v] for e in g.edges])
    r = radii[:, None]
    a = np.clip((r - du) / slope, 0.0, None)
    b = np.clip((r - dv) / slope, 0.0, None)
    covered = np.minimum(L, a + b)
    if isinstance(center, Point):
        k = next(i for i, e in enumerate(g.edges) if e.id == center.edge)
        for row, rr in enumerate(radii):
            reach = rr / slope[k]
            covered[row, k] = _union_length(
                [(0.0, a[row, k]), (L[k] - b[row, k], L[k]),
                 (center.s - reach, center.s + reach)], L[k])
    return covered @ mu


def ball(g, center, r, metric: MetricOnVertices | None = None) -> BallReport:
    """Ball of radius r: vertex set and measure.

    For a discrete graph the measure is the m-mass of the vertices within
    ``metric`` (combinatorial distance by default); for a metric model it
    is the mu-measure of the intrinsic ball, partial edges included.
    """
    if r < 0:
        raise ValueError("radius must be nonnegative")
    if isinstance(g, DiscreteGraph):
        if metric is None:
            adj = {v: [(u, 1.0) for u, _ in g.neighbors[v]] for v in g.vertices}
            dist = _dijkstra(adj, {center: 0.0})
        else:
            dist = {v: metric(center, v) for v in g.vertices}
        inside = tuple(v for v in g.vertices if dist.get(v, math.inf) <= r)
        return BallReport(center, r, inside, float(sum(g.m[v] for v in inside)))
    _require_model(g)
    dist = _center_distances(g, center)
    inside = tuple(v for v in g.vertices if dist.get(v, math.inf) <= r)
    measure = float(ball_volumes(g, center, [r], dist=dist)[0])
    return BallReport(center, r, inside, measure)
