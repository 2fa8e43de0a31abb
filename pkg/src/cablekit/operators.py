"""Discrete Laplacians and the Kirchhoff Laplacian on finite metric graphs.

The Kirchhoff Laplacian is discretized with conforming piecewise-linear
finite elements.  Vertex nodes are shared by all incident edges, which
makes continuity essential and the Kirchhoff flux condition natural.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from typing import Hashable, Mapping

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from .correspondence import discretize
from .errors import CapacityError, GraphValidationError
from .graph import (
    DiscreteGraph,
    EdgewiseFunction,
    MetricGraphModel,
    SimpleGraph,
    _connected,
    validate_discrete,
    validate_model,
)

DEFAULT_MAX_DOFS = 5000
NEGATIVE_FLOOR = -1e-10
CLUSTER_RTOL = 1e-8
EXCEPTIONAL_TAU = 1e-6
# tol(h) = EQUILATERAL_C * h^2 * lambda; covers the interval oracle up to lambda ~ 500
EQUILATERAL_C = 1.0


def max_dofs() -> int:
    return int(os.environ.get("CABLEKIT_MAX_DOFS", DEFAULT_MAX_DOFS))


def _check_cap(n: int, cap: int | None):
    cap = max_dofs() if cap is None else cap
    if n > cap:
        raise CapacityError(f"{n} degrees of freedom exceed the cap of {cap} "
                            "(set CABLEKIT_MAX_DOFS to raise it)")


@dataclass(frozen=True)
class DiscreteOperatorMatrix:
    """Pair (A, m) with A f = lambda diag(m) f the eigenproblem of L."""

    vertices: tuple
    A: np.ndarray
    m: np.ndarray


@dataclass(frozen=True)
class SpectralResult:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray | None = None
    mass: np.ndarray | None = None
    labels: tuple = ()
    metadata: dict = field(default_factory=dict)

    def clusters(self, rtol=CLUSTER_RTOL) -> list[tuple[float, int]]:
        """Group eigenvalues into (value, multiplicity) by relative gap."""
        out: list[list] = []
        for lam in self.eigenvalues:
            if out and abs(lam - out[-1][0]) <= rtol * max(1.0, abs(lam)):
                out[-1][1] += 1
            else:
                out.append([float(lam), 1])
        return [tuple(c) for c in out]


def discrete_operator(g: DiscreteGraph) -> DiscreteOperatorMatrix:
    idx = g.index
    n = len(g.vertices)
    A = np.zeros((n, n))
    for (u, v), w in g.b.items():
        if u == v or w == 0:
            continue
        i, j = idx[u], idx[v]
        A[i, j] -= w
        A[i, i] += w
    m = np.array([g.m[v] for v in g.vertices], dtype=float)
    return DiscreteOperatorMatrix(g.vertices, A, m)


def apply_discrete_laplacian(g: DiscreteGraph, f: Mapping) -> dict:
    """(Lf)(v) = (1/m(v)) sum_u b(v, u) (f(v) - f(u))."""
    missing = [v for v in g.vertices if v not in f]
    if missing:
        raise KeyError(f"no value for vertices {missing[:5]!r}")
    return {v: sum(w * (f[v] - f[u]) for u, w in g.neighbors[v]) / g.m[v]
            for v in g.vertices}


def _require_simple_connected(s: SimpleGraph):
    bad = s.simplicity_violations()
    if bad:
        raise GraphValidationError(bad, "simple graph")
    comps = _connected(s.vertices, s.neighbors)
    if len(comps) > 1:
        raise GraphValidationError(["connectivity"], "simple graph")


def combinatorial_laplacian(s: SimpleGraph) -> DiscreteGraph:
    _require_simple_connected(s)
    return DiscreteGraph.from_edges(s.vertices, 1.0, [(u, v, 1.0) for u, v in s.edges])


def normalized_laplacian(s: SimpleGraph) -> DiscreteGraph:
    """m = deg and b = adjacency, so that L = I - (Markov operator)."""
    _require_simple_connected(s)
    m = {v: float(len(s.neighbors[v])) for v in s.vertices}
    if len(s.vertices) == 1:
        m = {v: 1.0 for v in s.vertices}
    return DiscreteGraph.from_edges(s.vertices, m, [(u, v, 1.0) for u, v in s.edges])


def weighted_degree(g: DiscreteGraph) -> dict:
    return {v: sum(w for _, w in g.neighbors[v]) / g.m[v] for v in g.vertices}


def energy_form_discrete(g: DiscreteGraph, f: Mapping) -> float:
    """q[f] = 1/2 sum over ordered pairs of b(v, u) |f(v) - f(u)|^2."""
    total = 0.0
    for (u, v), w in g.b.items():
        if u != v:
            total += w * (f[v] - f[u]) ** 2
    return 0.5 * total


def spectrum_discrete(g: DiscreteGraph, cap: int | None = None) -> SpectralResult:
    """Full spectrum of L in l^2(V; m) with m-orthonormal eigenvectors."""
    report = validate_discrete(g)
    if report:
        raise GraphValidationError(report, "discrete graph")
    _check_cap(len(g.vertices), cap)
    op = discrete_operator(g)
    lam, vec = scipy.linalg.eigh(op.A, np.diag(op.m))
    return SpectralResult(lam, vec, np.diag(op.m), g.vertices,
                          {"kind": "discrete", "size": len(g.vertices)})


@dataclass(frozen=True)
class FemSystem:
    """P1 finite-element matrices for the Kirchhoff Laplacian.

    ``labels`` lists all nodes (vertices first, then ``(edge_id, k)`` for
    interior nodes); ``free`` indexes the nodes kept after Dirichlet
    elimination, and ``K``, ``M`` act on those only.
    """

    labels: tuple
    free: np.ndarray
    K: sp.csr_matrix
    M: sp.csr_matrix
    edge_nodes: Mapping
    element_size: Mapping
    dirichlet: tuple = ()

    @property
    def size(self) -> int:
        return self.K.shape[0]

    def nodal_values(self, x: np.ndarray) -> np.ndarray:
        """Expand a vector on free nodes to all nodes (zero on the Dirichlet set)."""
        full = np.zeros(len(self.labels))
        full[self.free] = x
        return full

    def to_function(self, x: np.ndarray, model: MetricGraphModel) -> EdgewiseFunction:
        full = self.nodal_values(x)
        vv = {v: full[i] for i, v in enumerate(model.vertices)}
        ev = {eid: full[nodes] for eid, nodes in self.edge_nodes.items()}
        return EdgewiseFunction(vv, ev)


def _elements(length: float, h: float) -> int:
    return max(1, math.ceil(length / h - 1e-9))


def assemble_fem(g: MetricGraphModel, h: float, dirichlet=None) -> FemSystem:
    """Assemble stiffness (int nu u'w') and mass (int mu u w) on a uniform mesh of size <= h."""
    if not h > 0:
        raise ValueError(f"mesh size must be positive, got {h!r}")
    report = validate_model(g)
    if report:
        raise GraphValidationError(report, "metric graph model")
    vindex = {v: i for i, v in enumerate(g.vertices)}
    labels = list(g.vertices)
    rows, cols, kv, mv = [], [], [], []
    edge_nodes, sizes = {}, {}
    for e in g.edges:
        n_el = _elements(e.length, h)
        he = e.length / n_el
        interior = list(range(len(labels), len(labels) + n_el - 1))
        labels.extend((e.id, k) for k in range(1, n_el))
        nodes = np.array([vindex[e.u], *interior, vindex[e.v]])
        edge_nodes[e.id] = nodes
        sizes[e.id] = he
        a, b = nodes[:-1], nodes[1:]
        ks, ms = e.nu / he, e.mu * he / 6.0
        rows += [a, a, b, b]
        cols += [a, b, a, b]
        kv += [np.full(n_el, ks), np.full(n_el, -ks), np.full(n_el, -ks), np.full(n_el, ks)]
        mv += [np.full(n_el, 2 * ms), np.full(n_el, ms), np.full(n_el, ms), np.full(n_el, 2 * ms)]
    n = len(labels)
    if rows:
        r, c = np.concatenate(rows), np.concatenate(cols)
        K = sp.csr_matrix((np.concatenate(kv), (r, c)), shape=(n, n))
        M = sp.csr_matrix((np.concatenate(mv), (r, c)), shape=(n, n))
    else:
        K = sp.csr_matrix((n, n))
        M = sp.csr_matrix((n, n))
    dirichlet = tuple(dirichlet or ())
    for v in dirichlet:
        if v not in vindex:
            raise KeyError(f"unknown Dirichlet vertex {v!r}")
    fixed = {vindex[v] for v in dirichlet}
    free = np.array([i for i in range(n) if i not in fixed], dtype=int)
    K = K[free][:, free].tocsr()
    M = M[free][:, free].tocsr()
    return FemSystem(tuple(labels), free, K, M, edge_nodes, sizes, dirichlet)


def spectrum_metric(g: MetricGraphModel, h: float, k: int | None = None, dirichlet=None, *,
                    upper: float | None = None, eigenvectors=False,
                    cap: int | None = None) -> SpectralResult:
    """Lowest ``k`` eigenvalues (or all up to ``upper``) of the Kirchhoff Laplacian."""
    system = assemble_fem(g, h, dirichlet)
    n = system.size
    _check_cap(n, cap)
    if k is None and upper is None:
        raise ValueError("give k or upper")
    if k is not None and not 1 <= k <= n:
        raise ValueError(f"k={k} must lie in [1, {n}] for this mesh")
    K, M = system.K.toarray(), system.M.toarray()
    kwargs = {}
    if k is not None:
        kwargs["subset_by_index"] = [0, k - 1]
    else:
        kwargs["subset_by_value"] = [-np.inf, upper]
    if eigenvectors:
        lam, vec = scipy.linalg.eigh(K, M, **kwargs)
    else:
        lam, vec = scipy.linalg.eigh(K, M, eigvals_only=True, **kwargs), None
    if k is not None and upper is not None:
        keep = lam <= upper
        lam = lam[keep]
        vec = vec[:, keep] if vec is not None else None
    meta = {"kind": "kirchhoff-p1", "h": h, "size": n,
            "dirichlet": list(system.dirichlet),
            "max_element": max(system.element_size.values(), default=0.0)}
    return SpectralResult(lam, vec, M if eigenvectors else None,
                          tuple(system.labels[i] for i in system.free), meta)


def energy_form_metric(g: MetricGraphModel, f: EdgewiseFunction) -> float:
    """Q[f] = sum_e nu(e) int_e |f'|^2 for edgewise piecewise-linear f."""
    total = 0.0
    for e in g.edges:
        vals = np.asarray(f.edge_values[e.id])
        he = e.length / (len(vals) - 1)
        total += e.nu * float(np.sum(np.diff(vals) ** 2)) / he
    return total


def heat_semigroup(spec: SpectralResult, t: float, f0) -> np.ndarray:
    """f(t) = sum_j exp(-lambda_j t) <f0, phi_j>_M phi_j.

    ``f0`` is a vector in label order or a mapping label -> value (missing
    labels count as zero).
    """
    if t < 0:
        raise ValueError("time must be nonnegative")
    vec, M = spec.eigenvectors, spec.mass
    if vec is None or M is None or vec.shape[1] != vec.shape[0]:
        raise ValueError("heat semigroup needs a full eigendecomposition")
    if isinstance(f0, Mapping):
        f0 = np.array([float(f0.get(lbl, 0.0)) for lbl in spec.labels])
    f0 = np.asarray(f0, dtype=float)
    coeff = vec.T @ (M @ f0)
    return vec @ (np.exp(-np.clip(spec.eigenvalues, 0.0, None) * t) * coeff)


@dataclass(frozen=True)
class EquilateralEntry:
    eigenvalue: float
    image: float
    distance: float
    tol: float
    exempt: bool


@dataclass(frozen=True)
class EquilateralReport:
    ok: bool
    edge_length: float
    h: float
    discrete_spectrum: np.ndarray
    entries: tuple

    @property
    def checked(self) -> int:
        return sum(1 for e in self.entries if not e.exempt)


def _equilateral_length(g: MetricGraphModel) -> float:
    problems = list(validate_model(g))
    if not g.edges:
        raise ValueError("non-equilateral input: model has no edges")
    ell = g.edges[0].length
    for e in g.edges:
        if abs(e.length - ell) > 1e-12 * ell or e.mu != 1.0 or e.nu != 1.0:
            problems.append(f"edge {e.id!r} differs (length {e.length}, mu {e.mu}, nu {e.nu})")
    problems += g.skeleton().simplicity_violations()
    if problems:
        raise ValueError(f"non-equilateral input: {problems[0]}")
    return ell


def equilateral_correspondence_check(g: MetricGraphModel, h: float, k: int | None = None, *,
                                     cap: float | None = None, tau=EXCEPTIONAL_TAU,
                                     tol: float | None = None,
                                     C=EQUILATERAL_C) -> EquilateralReport:
    """Compare Kirchhoff eigenvalues with the normalized Laplacian spectrum.

    On an edge of length l an eigenfunction is A cos(kx) + B sin(kx) with
    k = sqrt(lambda).  When sin(k l) != 0 it is fixed by its endpoint values,
    and the Kirchhoff condition at v turns into
    sum_{u~v} f(u) = deg(v) cos(k l) f(v), so 1 - cos(k l) is an
    eigenvalue of L_norm.  Eigenvalues with |sin(k l)| <= tau are exempt.
    """
    ell = _equilateral_length(g)
    disc = spectrum_discrete(normalized_laplacian(g.skeleton())).eigenvalues
    kirch = spectrum_metric(g, h, k, upper=cap).eigenvalues
    entries = []
    ok = True
    for lam in kirch:
        x = math.sqrt(max(lam, 0.0)) * ell
        image = 1.0 - math.cos(x)
        dist = float(np.min(np.abs(disc - image)))
        exempt = abs(math.sin(x)) <= tau
        this_tol = tol if tol is not None else max(C * h * h * lam, 1e-9)
        if not exempt and dist > this_tol:
            ok = False
        entries.append(EquilateralEntry(float(lam), image, dist, this_tol, exempt))
    return EquilateralReport(ok, ell, h, disc, tuple(entries))
