"""Passing between weighted metric graphs and weighted discrete graphs.

``discretize`` reads off the vertex data (m, b) a metric model induces on
its vertex set; ``realize`` goes the other way and builds a cable system
for given (m, b) from an intrinsic weight.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Mapping

from .errors import GraphValidationError, IntrinsicWeightError
from .graph import (
    DiscreteGraph,
    EdgewiseFunction,
    MetricEdge,
    MetricGraphModel,
    validate_discrete,
    validate_model,
)

DEFICIT_RTOL = 1e-12
LOOP_LENGTH = 0.5
SCHEME = "edge-per-pair+deficit-loops"


@dataclass(frozen=True)
class IntrinsicWeight:
    """Symmetric edge weight p, stored for both orientations of each pair."""

    p: Mapping

    def __post_init__(self):
        sym = {}
        for (u, v), w in dict(self.p).items():
            sym[(u, v)] = float(w)
            sym.setdefault((v, u), float(w))
        object.__setattr__(self, "p", MappingProxyType(sym))

    def __call__(self, u, v) -> float:
        return self.p.get((u, v), 0.0)

    def deficits(self, g: DiscreteGraph) -> dict:
        """m(v) - sum_u b(u, v) p(u, v)^2 for every vertex."""
        return {v: g.m[v] - sum(w * self(v, u) ** 2 for u, w in g.neighbors[v])
                for v in g.vertices}

    def is_intrinsic_for(self, g: DiscreteGraph, rtol=DEFICIT_RTOL) -> bool:
        return all(d >= -rtol * g.m[v] for v, d in self.deficits(g).items())


@dataclass(frozen=True)
class CableSystem:
    """A metric model realizing a discrete graph, with how it was built."""

    model: MetricGraphModel
    loop_vertices: tuple
    weight: IntrinsicWeight
    scheme: str = field(default=SCHEME)


def _require_model(g: MetricGraphModel):
    report = validate_model(g)
    if report:
        raise GraphValidationError(report, "metric graph model")


def _require_discrete(g: DiscreteGraph):
    report = validate_discrete(g)
    if report:
        raise GraphValidationError(report, "discrete graph")


def discretize(g: MetricGraphModel) -> DiscreteGraph:
    """Vertex weights induced by a metric model.

    b(u, v) sums nu(e)/|e| over the edges joining u != v; m(v) sums
    |e| mu(e) over oriented edge ends at v, so a loop enters twice.
    """
    _require_model(g)
    m = {v: 0.0 for v in g.vertices}
    b: dict = {}
    for e in g.edges:
        mass = e.length * e.mu
        m[e.u] += mass
        m[e.v] += mass
        if e.is_loop:
            continue
        w = e.nu / e.length
        b[(e.u, e.v)] = b.get((e.u, e.v), 0.0) + w
        b[(e.v, e.u)] = b.get((e.v, e.u), 0.0) + w
    return DiscreteGraph(g.vertices, m, b)


def intrinsic_size(g: MetricGraphModel) -> float:
    """Largest intrinsic edge length; 0 for an edgeless model."""
    return max((e.eta for e in g.edges), default=0.0)


def default_intrinsic_weight(g: DiscreteGraph) -> IntrinsicWeight:
    """p(u, v) = sqrt(min(m(u)/W(u), m(v)/W(v))) where W(v) = sum_u b(u, v).

    Since p(u, v)^2 <= m(v)/W(v), summing b(u, v) p(u, v)^2 over u gives at most m(v).
    """
    _require_discrete(g)
    ratio = {}
    for v in g.vertices:
        W = sum(w for _, w in g.neighbors[v])
        ratio[v] = g.m[v] / W if W > 0 else math.inf
    p = {(u, v): math.sqrt(min(ratio[u], ratio[v])) for u, v, _ in g.pairs()}
    return IntrinsicWeight(p)


def realize(g: DiscreteGraph, p: IntrinsicWeight | None = None) -> CableSystem:
    """Construct a cable system for ``g`` whose non-loop edges have intrinsic length p.

    One edge per neighbouring pair with |e| = p and mu = nu = b p; any mass
    left at a vertex goes to a loop of length 1/2 carrying mu = nu = deficit.
    """
    _require_discrete(g)
    if p is None:
        p = default_intrinsic_weight(g)
    edges = []
    for k, (u, v, w) in enumerate(g.pairs()):
        length = p(u, v)
        if not (length > 0 and math.isfinite(length)):
            raise ValueError(f"weight must be positive on every edge; p({u!r}, {v!r}) = {length!r}")
        edges.append(MetricEdge(f"e{k}", u, v, length, w * length, w * length))
    for (u, v), w in p.p.items():
        if w != 0 and g.weight(u, v) <= 0:
            raise ValueError(f"weight supported off the graph at ({u!r}, {v!r})")
    loops = []
    for v, deficit in p.deficits(g).items():
        tol = DEFICIT_RTOL * g.m[v]
        if deficit < -tol:
            raise IntrinsicWeightError(v, deficit)
        if deficit > tol:
            loops.append(v)
            edges.append(MetricEdge(f"loop{len(loops) - 1}", v, v,
                                    LOOP_LENGTH, deficit, deficit))
    provenance = {
        "scheme": SCHEME,
        "loop_length": LOOP_LENGTH,
        "loop_vertices": list(loops),
        "weight": [{"u": u, "v": v, "p": p(u, v)} for u, v, _ in g.pairs()],
    }
    model = MetricGraphModel(g.vertices, edges, provenance=provenance)
    return CableSystem(model, tuple(loops), p)


def restrict_to_vertices(f: EdgewiseFunction) -> dict:
    return dict(f.vertex_values)


def extend_affine(g: MetricGraphModel, fv: Mapping) -> EdgewiseFunction:
    """The continuous edgewise affine function with vertex trace ``fv``."""
    missing = [v for v in g.vertices if v not in fv]
    if missing:
        raise KeyError(f"no value for vertices {missing[:5]!r}")
    values = {v: float(fv[v]) for v in g.vertices}
    return EdgewiseFunction(values, {e.id: (values[e.u], values[e.v]) for e in g.edges})


def kirchhoff_defect(g: MetricGraphModel, f: EdgewiseFunction) -> dict:
    """Sum of nu(e) times the outward derivative over the edge ends at each vertex.

    Vanishes at v exactly when f satisfies the Kirchhoff condition there.
    """
    bad = f.continuity_defects(g, tol=0.0)
    if bad:
        raise ValueError(f"function is not continuous at vertices: {bad[0]}")
    out = {}
    for v, ends in g.incidences.items():
        out[v] = sum(e.nu * f.outward_derivative(e, end) for e, end in ends)
    return out
