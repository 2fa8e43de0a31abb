"""Core data model: weighted discrete graphs (V, m; b) and metric-graph models.

All containers are frozen after construction.  Mappings are exposed as
read-only proxies so that graphs can be shared freely.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from types import MappingProxyType
from typing import Hashable, Iterable, Iterator, Mapping, Sequence

VertexId = Hashable


@dataclass(frozen=True)
class Violation:
    kind: str
    where: tuple
    detail: str = ""

    def __str__(self):
        loc = ", ".join(repr(w) for w in self.where)
        return f"{self.kind}[{loc}]" + (f": {self.detail}" if self.detail else "")


def _freeze(mapping) -> Mapping:
    return MappingProxyType(dict(mapping))


@dataclass(frozen=True)
class DiscreteGraph:
    """A graph b over a discrete measure space (V, m).

    ``b`` is keyed by ordered pairs and normally stores both orientations;
    it is kept as given so that asymmetric input can be diagnosed by
    :func:`validate_discrete` instead of being silently repaired.
    """

    vertices: tuple
    m: Mapping
    b: Mapping

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(self.vertices))
        object.__setattr__(self, "m", _freeze(self.m))
        object.__setattr__(self, "b", _freeze(self.b))

    @classmethod
    def from_edges(cls, vertices, m, edges: Iterable[tuple]) -> "DiscreteGraph":
        """Build from unordered ``(u, v, weight)`` triples; parallel entries add up."""
        b: dict = {}
        for u, v, w in edges:
            b[(u, v)] = b.get((u, v), 0.0) + float(w)
            if u != v:
                b[(v, u)] = b.get((v, u), 0.0) + float(w)
        if not isinstance(m, Mapping):
            m = {v: float(m) for v in vertices}
        return cls(tuple(vertices), m, b)

    def weight(self, u, v) -> float:
        return self.b.get((u, v), 0.0)

    @cached_property
    def index(self) -> Mapping:
        return MappingProxyType({v: i for i, v in enumerate(self.vertices)})

    @cached_property
    def neighbors(self) -> Mapping:
        """v -> tuple of (u, b(v, u)) over u with b(v, u) > 0."""
        nb: dict = {v: [] for v in self.vertices}
        for (u, v), w in self.b.items():
            if w > 0 and u != v and u in nb:
                nb[u].append((v, w))
        return MappingProxyType({v: tuple(lst) for v, lst in nb.items()})

    def pairs(self) -> Iterator[tuple]:
        """Unordered pairs ``(u, v, b(u, v))`` with b > 0, each reported once."""
        idx = self.index
        for (u, v), w in self.b.items():
            if w > 0 and u != v and idx.get(u, -1) < idx.get(v, -1):
                yield u, v, w

    def __len__(self):
        return len(self.vertices)


@dataclass(frozen=True)
class SimpleGraph:
    """Plain combinatorial graph given by a vertex tuple and an edge list."""

    vertices: tuple
    edges: tuple

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(self.vertices))
        object.__setattr__(self, "edges", tuple(tuple(e) for e in self.edges))

    @cached_property
    def neighbors(self) -> Mapping:
        nb: dict = {v: [] for v in self.vertices}
        for u, v in self.edges:
            nb[u].append(v)
            if u != v:
                nb[v].append(u)
        return MappingProxyType({v: tuple(x) for v, x in nb.items()})

    def simplicity_violations(self) -> list[Violation]:
        out = []
        seen = set()
        for u, v in self.edges:
            if u == v:
                out.append(Violation("loop", (u,)))
                continue
            key = frozenset((u, v))
            if key in seen:
                out.append(Violation("multi-edge", (u, v)))
            seen.add(key)
        return out


@dataclass(frozen=True)
class MetricEdge:
    id: Hashable
    u: VertexId
    v: VertexId
    length: float
    mu: float = 1.0
    nu: float = 1.0

    @property
    def is_loop(self) -> bool:
        return self.u == self.v

    @property
    def eta(self) -> float:
        """Intrinsic length |e| sqrt(mu/nu)."""
        return self.length * math.sqrt(self.mu / self.nu)


@dataclass(frozen=True)
class MetricGraphModel:
    """Model (V, E, |.|, mu, nu) of a weighted metric graph.

    Edges are oriented: ``u`` is identified with 0 and ``v`` with ``length``
    in the edge coordinate.  Loops and parallel edges are allowed.
    """

    vertices: tuple
    edges: tuple
    provenance: Mapping | None = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(self.vertices))
        object.__setattr__(self, "edges", tuple(self.edges))
        if self.provenance is not None:
            object.__setattr__(self, "provenance", _freeze(self.provenance))

    @classmethod
    def equilateral(cls, skeleton: SimpleGraph, length=1.0, mu=1.0, nu=1.0):
        edges = [MetricEdge(f"e{i}", u, v, length, mu, nu)
                 for i, (u, v) in enumerate(skeleton.edges)]
        return cls(skeleton.vertices, edges)

    @cached_property
    def edge_by_id(self) -> Mapping:
        return MappingProxyType({e.id: e for e in self.edges})

    @cached_property
    def incidences(self) -> Mapping:
        """v -> tuple of (edge, end) with end 0 (initial) or 1 (terminal).

        A loop contributes both of its ends to its vertex.
        """
        inc: dict = {v: [] for v in self.vertices}
        for e in self.edges:
            if e.u in inc:
                inc[e.u].append((e, 0))
            if e.v in inc:
                inc[e.v].append((e, 1))
        return MappingProxyType({v: tuple(x) for v, x in inc.items()})

    def skeleton(self) -> SimpleGraph:
        return SimpleGraph(self.vertices, [(e.u, e.v) for e in self.edges])


@dataclass(frozen=True)
class EdgewiseFunction:
    """Continuous function on a metric graph, piecewise linear along each edge.

    ``edge_values[e]`` holds nodal values on a uniform subdivision of ``e``
    from its initial to its terminal vertex; two values mean affine on ``e``.
    """

    vertex_values: Mapping
    edge_values: Mapping

    def __post_init__(self):
        object.__setattr__(self, "vertex_values", _freeze(self.vertex_values))
        object.__setattr__(
            self, "edge_values",
            _freeze({k: tuple(float(x) for x in v) for k, v in self.edge_values.items()}),
        )

    def continuity_defects(self, model: MetricGraphModel, tol=0.0) -> list[Violation]:
        out = []
        for e in model.edges:
            vals = self.edge_values.get(e.id)
            if vals is None or len(vals) < 2:
                out.append(Violation("missing-edge-values", (e.id,)))
                continue
            for end, vert, trace in ((0, e.u, vals[0]), (1, e.v, vals[-1])):
                fv = self.vertex_values.get(vert)
                if fv is None or abs(trace - fv) > tol:
                    out.append(Violation("discontinuity", (e.id, vert),
                                         f"trace {trace!r} vs vertex value {fv!r}"))
        return out

    def outward_derivative(self, e: MetricEdge, end: int) -> float:
        """Derivative at a vertex end of ``e`` pointing into the edge."""
        vals = self.edge_values[e.id]
        h = e.length / (len(vals) - 1)
        if end == 0:
            return (vals[1] - vals[0]) / h
        return (vals[-2] - vals[-1]) / h


def _connected(vertices: Sequence, neighbors: Mapping) -> list[list]:
    """Connected components, each as a list of vertices."""
    seen: set = set()
    comps = []
    for s in vertices:
        if s in seen:
            continue
        seen.add(s)
        comp = [s]
        queue = deque([s])
        while queue:
            x = queue.popleft()
            for y in neighbors.get(x, ()):
                if y not in seen:
                    seen.add(y)
                    comp.append(y)
                    queue.append(y)
        comps.append(comp)
    return comps


def _bad_number(x) -> bool:
    return not isinstance(x, (int, float)) or isinstance(x, bool) or not math.isfinite(x)


def validate_discrete(g: DiscreteGraph) -> list[Violation]:
    """List every violated structural condition of ``g``; empty when valid.

    Local finiteness holds trivially for finite vertex sets, so it is not
    reported separately.
    """
    out: list[Violation] = []
    if not g.vertices:
        return [Violation("empty", ())]
    if len(set(g.vertices)) != len(g.vertices):
        seen, dups = set(), []
        for v in g.vertices:
            if v in seen:
                dups.append(v)
            seen.add(v)
        out.extend(Violation("duplicate-vertex", (v,)) for v in dups)
    vset = set(g.vertices)
    for v in g.vertices:
        mv = g.m.get(v)
        if mv is None:
            out.append(Violation("measure", (v,), "missing"))
        elif _bad_number(mv) or mv <= 0:
            out.append(Violation("measure", (v,), f"m={mv!r} is not positive"))
    for v in g.m:
        if v not in vset:
            out.append(Violation("unknown-vertex", (v,), "measure given for unknown vertex"))
    checked = set()
    for (u, v), w in g.b.items():
        if u not in vset or v not in vset:
            out.append(Violation("unknown-vertex", (u, v)))
            continue
        if _bad_number(w) or w < 0:
            out.append(Violation("weight", (u, v), f"b={w!r} is not a nonnegative real"))
            continue
        if u == v:
            if w != 0:
                out.append(Violation("diagonal", (u, v), f"b(v,v)={w!r}"))
            continue
        key = frozenset((u, v))
        if key in checked:
            continue
        checked.add(key)
        w2 = g.b.get((v, u), 0.0)
        if w != w2:
            out.append(Violation("symmetry", (u, v), f"b(u,v)={w!r} but b(v,u)={w2!r}"))
    nb = {v: [u for u, _ in g.neighbors.get(v, ())] for v in g.vertices}
    # symmetric closure so one-sided entries still link components for this check
    for v, lst in list(nb.items()):
        for u in lst:
            if v not in nb.get(u, ()):
                nb.setdefault(u, []).append(v)
    comps = _connected(g.vertices, nb)
    if len(comps) > 1:
        out.append(Violation("connectivity", tuple(c[0] for c in comps),
                             f"{len(comps)} components"))
    return out


def validate_model(g: MetricGraphModel) -> list[Violation]:
    out: list[Violation] = []
    if not g.vertices:
        return [Violation("empty", ())]
    vset = set(g.vertices)
    if len(vset) != len(g.vertices):
        out.append(Violation("duplicate-vertex", ()))
    ids = set()
    for e in g.edges:
        if e.id in ids:
            out.append(Violation("duplicate-edge-id", (e.id,)))
        ids.add(e.id)
        for end in (e.u, e.v):
            if end not in vset:
                out.append(Violation("unknown-vertex", (e.id, end)))
        for name in ("length", "mu", "nu"):
            x = getattr(e, name)
            if _bad_number(x) or x <= 0:
                out.append(Violation(name, (e.id,), f"{name}={x!r} must lie in (0, inf)"))
    comps = _connected(g.vertices, g.skeleton().neighbors)
    if len(comps) > 1:
        out.append(Violation("connectivity", tuple(c[0] for c in comps),
                             f"{len(comps)} components"))
    return out


def degree(g: MetricGraphModel, v) -> int:
    """Combinatorial degree: number of oriented edge ends at ``v`` (loops twice)."""
    if v not in g.incidences:
        raise KeyError(f"unknown vertex {v!r}")
    return len(g.incidences[v])


def support_graph(g: DiscreteGraph) -> SimpleGraph:
    return SimpleGraph(g.vertices, [(u, v) for u, v, _ in g.pairs()])
