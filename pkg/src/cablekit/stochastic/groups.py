"""Catalog groups, Cayley graph truncations and growth functions.

Elements have canonical keys so that breadth-first generation can test
membership exactly:

* ``Z^d`` and cyclic groups: integer tuples;
* free groups: reduced words packed into one integer, base ``2k + 1``,
  letters ``1..k`` for generators and ``k+1..2k`` for their inverses;
* the discrete Heisenberg group: ``(a, b, c)`` for the matrix
  ``[[1, a, c], [0, 1, b], [0, 0, 1]]``.

Neighbours of ``g`` are ``g * s`` for ``s`` in the generating set.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Callable, Iterator

import numpy as np

from ..errors import CapacityError
from ..graph import DiscreteGraph, MetricEdge, MetricGraphModel

DEFAULT_MAX_ELEMENTS = 5_000_000
FAMILIES = ("Z", "free", "heisenberg", "cyclic")


@dataclass(frozen=True)
class GroupSpec:
    family: str
    rank: int = 1

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unsupported family {self.family!r}; choose from {FAMILIES}")
        if self.rank < 1:
            raise ValueError("rank must be positive")

    @classmethod
    def parse(cls, text: str) -> "GroupSpec":
        """Parse names such as ``Z``, ``Z3``, ``F2``, ``H3``/``heisenberg``, ``C5``."""
        t = text.strip()
        if t.lower() in ("h", "h3", "heisenberg", "heisenberg3z"):
            return cls("heisenberg", 3)
        mt = re.fullmatch(r"Z\^?(\d*)", t)
        if mt:
            return cls("Z", int(mt.group(1) or 1))
        mt = re.fullmatch(r"F_?(\d+)", t)
        if mt:
            return cls("free", int(mt.group(1)))
        mt = re.fullmatch(r"(?:C|Z/)_?(\d+)", t)
        if mt:
            return cls("cyclic", int(mt.group(1)))
        raise ValueError(f"unsupported group {text!r}")

    @property
    def name(self) -> str:
        return {"Z": f"Z{self.rank}", "free": f"F{self.rank}",
                "heisenberg": "H3", "cyclic": f"C{self.rank}"}[self.family]

    @property
    def identity(self):
        if self.family == "Z":
            return (0,) * self.rank
        if self.family == "cyclic":
            return (0,)
        if self.family == "free":
            return 0
        return (0, 0, 0)

    @property
    def generators(self) -> tuple:
        """Symmetric generating set without the identity."""
        if self.family == "Z":
            gens = []
            for i in range(self.rank):
                for sgn in (1, -1):
                    e = [0] * self.rank
                    e[i] = sgn
                    gens.append(tuple(e))
            return tuple(gens)
        if self.family == "cyclic":
            n = self.rank
            return tuple(sorted({(1 % n,), ((n - 1) % n,)} - {(0,)}))
        if self.family == "free":
            return tuple(range(1, 2 * self.rank + 1))
        return ((1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0))

    def multiply(self, g, s):
        """g * s for a generator s."""
        if self.family == "Z":
            return tuple(a + b for a, b in zip(g, s))
        if self.family == "cyclic":
            return ((g[0] + s[0]) % self.rank,)
        if self.family == "free":
            k = self.rank
            base = 2 * k + 1
            inv = s + k if s <= k else s - k
            if g and g % base == inv:
                return g // base
            return g * base + s
        a, b, c = g
        x, y, z = s
        return (a + x, b + y, c + z + a * y)

    def label(self, g) -> str:
        if self.family == "free":
            k = self.rank
            base = 2 * k + 1
            letters = []
            while g:
                letter = g % base
                g //= base
                letters.append(chr(ord("a") + letter - 1) if letter <= k
                               else chr(ord("A") + letter - k - 1))
            return "".join(reversed(letters)) or "e"
        return "(" + ",".join(str(x) for x in g) + ")"

    def is_finite(self) -> bool:
        return self.family == "cyclic"


def word_layers(spec: GroupSpec, radius: int, max_elements=DEFAULT_MAX_ELEMENTS) -> Iterator[list]:
    """Spheres of the word metric, S(0), S(1), ..., S(radius).

    In any graph the neighbours of a vertex at distance n lie at distance
    n - 1, n or n + 1, so only the two previous spheres are kept.
    """
    gens = spec.generators
    prev: set = set()
    cur = [spec.identity]
    cur_set = {spec.identity}
    total = 1
    yield cur
    for _ in range(radius):
        new = []
        new_set: set = set()
        for g in cur:
            for s in gens:
                h = spec.multiply(g, s)
                if h not in cur_set and h not in prev and h not in new_set:
                    new_set.add(h)
                    new.append(h)
        total += len(new)
        if total > max_elements:
            raise CapacityError(f"ball exceeds {max_elements} elements")
        prev, cur, cur_set = cur_set, new, new_set
        yield cur


@dataclass(frozen=True)
class GrowthTable:
    group: str
    radii: np.ndarray
    counts: np.ndarray
    slope: float
    window: tuple


def fit_loglog(x, y) -> tuple[float, float]:
    """Least-squares slope of log y against log x, and RMS residual."""
    lx, ly = np.log(np.asarray(x, float)), np.log(np.asarray(y, float))
    A = np.vstack([lx, np.ones_like(lx)]).T
    coef, *_ = np.linalg.lstsq(A, ly, rcond=None)
    resid = ly - A @ coef
    return float(coef[0]), float(np.sqrt(np.mean(resid ** 2)))


def growth_function(spec: GroupSpec, radius: int, window: tuple | None = None,
                    max_elements=DEFAULT_MAX_ELEMENTS) -> GrowthTable:
    """gamma(n) = number of elements of word length <= n, for n = 0..radius."""
    counts = []
    total = 0
    for layer in word_layers(spec, radius, max_elements):
        total += len(layer)
        counts.append(total)
    radii = np.arange(radius + 1)
    counts = np.array(counts, dtype=np.int64)
    if window is None:
        window = (max(1, radius // 2), radius)
    lo, hi = window
    slope = math.nan
    if hi > lo >= 1:
        slope, _ = fit_loglog(radii[lo:hi + 1], counts[lo:hi + 1])
    return GrowthTable(spec.name, radii, counts, slope, (lo, hi))


@dataclass(frozen=True)
class RecurrenceClass:
    group: str
    verdict: str
    growth: str
    reason: str


def classify_recurrence(spec: GroupSpec) -> RecurrenceClass:
    """Recurrent iff the group has a finite-index subgroup isomorphic to Z or Z^2."""
    if spec.family == "Z":
        d = spec.rank
        return RecurrenceClass(spec.name, "recurrent" if d <= 2 else "transient",
                               f"polynomial degree {d}",
                               f"Z^{d} is its own finite-index subgroup"
                               + (" and d <= 2" if d <= 2 else "; it contains no finite-index Z or Z^2"))
    if spec.family == "cyclic":
        return RecurrenceClass(spec.name, "recurrent", "bounded (finite group)",
                               "finite group: the trivial subgroup has finite index, "
                               "the walk is an irreducible finite Markov chain")
    if spec.family == "free":
        if spec.rank == 1:
            return RecurrenceClass(spec.name, "recurrent", "polynomial degree 1", "F1 is Z")
        return RecurrenceClass(spec.name, "transient", "exponential",
                               "non-amenable free group; no finite-index Z or Z^2")
    return RecurrenceClass(spec.name, "transient", "polynomial degree 4",
                           "virtually nilpotent of growth degree 4; no finite-index Z or Z^2")


@dataclass(frozen=True)
class CayleyTruncation:
    """Word-metric ball around the identity as a weighted graph.

    For infinite groups ``boundary`` is the sphere at distance ``radius``;
    for finite groups it holds the vertices with a neighbour outside the
    ball, which is empty once the ball covers the group.
    """

    spec: GroupSpec
    radius: int
    graph: DiscreteGraph
    origin: str
    depth: dict = field(repr=False)
    boundary: frozenset = frozenset()


def cayley_graph(spec: GroupSpec, radius: int, *, measure: Callable | None = None,
                 weight: Callable | None = None,
                 max_elements=DEFAULT_MAX_ELEMENTS) -> CayleyTruncation:
    """Ball of radius ``radius`` with m = 1 and b = adjacency unless overlays are given.

    ``measure(g)`` and ``weight(g, h)`` receive canonical elements.
    """
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    layers = list(word_layers(spec, radius, max_elements))
    depth = {}
    for n, layer in enumerate(layers):
        for g in layer:
            depth[g] = n
    order = [g for layer in layers for g in layer]
    labels = {g: spec.label(g) for g in order}
    pos = {g: i for i, g in enumerate(order)}
    edges = []
    boundary = set()
    for g in order:
        for s in spec.generators:
            h = spec.multiply(g, s)
            if h not in pos or (not spec.is_finite() and depth[g] == radius):
                boundary.add(labels[g])
            elif pos[g] < pos[h]:
                w = 1.0 if weight is None else float(weight(g, h))
                edges.append((labels[g], labels[h], w))
    m = {labels[g]: (1.0 if measure is None else float(measure(g))) for g in order}
    graph = DiscreteGraph.from_edges([labels[g] for g in order], m, edges)
    return CayleyTruncation(spec, radius, graph, labels[spec.identity],
                            {labels[g]: d for g, d in depth.items()}, frozenset(boundary))


def cayley_cable_system(spec: GroupSpec, radius: int,
                        edge_data: Callable | None = None) -> tuple[MetricGraphModel, CayleyTruncation]:
    """Metric model over a Cayley truncation.

    ``edge_data(u_label, v_label, depth)`` returns ``(length, mu, nu)``;
    default is the unit equilateral cable system.
    """
    trunc = cayley_graph(spec, radius)
    edges = []
    for k, (u, v, _) in enumerate(trunc.graph.pairs()):
        if edge_data is None:
            length, mu, nu = 1.0, 1.0, 1.0
        else:
            length, mu, nu = edge_data(u, v, max(trunc.depth[u], trunc.depth[v]))
        edges.append(MetricEdge(f"e{k}", u, v, length, mu, nu))
    return MetricGraphModel(trunc.graph.vertices, edges), trunc
