"""Random walks on finite truncations: kernels, exact return probabilities, Monte Carlo."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Hashable

import numpy as np
import scipy.sparse as sp

from ..errors import TruncationError
from ..graph import DiscreteGraph
from .groups import CayleyTruncation, GroupSpec, cayley_graph

MASS_ATOL = 1e-12
MC_CHUNK = 10_000


@dataclass(frozen=True)
class WalkKernel:
    """Row-stochastic transition matrix on a finite state space.

    ``pi`` is a reversing measure when known (pi(x) p(x, y) = pi(y) p(y, x));
    for kernels built from a graph b it is the row sum of b in the full
    graph, which for boundary states of a truncation is not available, so
    those states must never be propagated from.
    """

    states: tuple
    P: sp.csr_matrix
    boundary: frozenset = frozenset()
    origin: Hashable = None
    pi: np.ndarray | None = field(default=None, repr=False)

    @classmethod
    def from_matrix(cls, states, P, boundary=(), origin=None) -> "WalkKernel":
        P = sp.csr_matrix(P, dtype=float)
        sums = np.asarray(P.sum(axis=1)).ravel()
        if np.any(np.abs(sums - 1.0) > 1e-12):
            raise ValueError("kernel rows must sum to 1")
        states = tuple(states)
        return cls(states, P, frozenset(boundary), states[0] if origin is None else origin)

    @property
    def index(self) -> dict:
        return {s: i for i, s in enumerate(self.states)}


def transition_kernel(g, boundary=(), origin=None) -> WalkKernel:
    """p(u, v) = b(u, v) / sum_w b(u, w) on a graph or Cayley truncation.

    The last nonzero entry of each row is set to one minus the others so
    that rows sum to 1 exactly.
    """
    if isinstance(g, CayleyTruncation):
        boundary, origin = g.boundary, g.origin
        interior_degree = len(g.spec.generators)
        g = g.graph
    else:
        interior_degree = None
    idx = g.index
    rows, cols, vals = [], [], []
    pi = np.empty(len(g.vertices))
    for v in g.vertices:
        i = idx[v]
        nb = g.neighbors[v]
        total = sum(w for _, w in nb)
        pi[i] = total
        if total <= 0:
            rows.append(i)
            cols.append(i)
            vals.append(1.0)
            continue
        probs = [w / total for _, w in nb]
        probs[-1] = 1.0 - math.fsum(probs[:-1])
        for (u, _), p in zip(nb, probs):
            rows.append(i)
            cols.append(idx[u])
            vals.append(p)
    n = len(g.vertices)
    P = sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
    if interior_degree is not None:
        # simple random walk on a Cayley graph: pi is constant in the full graph
        pi = np.full(n, float(interior_degree))
    return WalkKernel(g.vertices, P, frozenset(boundary),
                      g.vertices[0] if origin is None else origin, pi)


@dataclass(frozen=True)
class ReturnProbabilities:
    """p_n(o, o) for n = 0..n_max, with how they were obtained."""

    p: np.ndarray
    method: str
    source: str
    mass_checked: bool = True

    @property
    def n_max(self) -> int:
        return len(self.p) - 1


def _shift_add(new, old, axis, r):
    """Add the two axis neighbours of ``old`` into ``new`` on the octant x >= 0.

    The mirror image of x = 1 sits at x = -1, so x = 0 receives old[1] twice.
    """
    def sl(a, b):
        s = [slice(0, r + 2)] * old.ndim
        s[axis] = slice(a, b)
        return tuple(s)

    new[sl(1, r + 2)] += old[sl(0, r + 1)]
    new[sl(0, r + 1)] += old[sl(1, r + 2)]
    new[sl(0, 1)] += old[sl(1, 2)]


def _octant_inner(P, Q, w1):
    x = P * Q
    for _ in range(P.ndim):
        x = np.tensordot(x, w1, axes=([0], [0]))
    return float(x)


def _lattice_return_probabilities(d: int, n_max: int) -> np.ndarray:
    """Simple random walk on Z^d from the origin, on the octant x >= 0.

    The law is invariant under coordinate sign flips, so only x >= 0 is
    stored; point x stands for 2^(number of nonzero coordinates) sites.
    With P_j the law after j steps, p_{2j} = <P_j, P_j> and
    p_{2j+1} = <P_j, P_{j+1}> since the kernel is symmetric.  After j
    steps the law lives in the cube [0, j]^d, so all work is done there.
    """
    half = (n_max + 1) // 2
    w1 = np.full(half + 2, 2.0)
    w1[0] = 1.0
    P = np.ones((1,) * d)
    p = np.zeros(n_max + 1)
    p[0] = 1.0
    for j in range(1, half + 1):
        # P lives on [0, j-1]^d; pad to [0, j]^d, spread, renormalize
        old = np.pad(P, [(0, 1)] * d)
        new = np.zeros_like(old)
        for axis in range(d):
            _shift_add(new, old, axis, j - 1)
        new /= 2 * d
        w = w1[:j + 1]
        mass = _octant_inner(new, np.ones_like(new), w)
        if abs(mass - 1.0) > 1e-10:
            raise TruncationError(f"mass {mass!r} after {j} steps")
        if 2 * j - 1 <= n_max:
            p[2 * j - 1] = _octant_inner(old, new, w)
        if 2 * j <= n_max:
            p[2 * j] = _octant_inner(new, new, w)
        P = new
    return p


def _free_return_probabilities(k: int, n_max: int) -> np.ndarray:
    """Word length of the simple random walk on F_k is a birth-death chain.

    From length 0 it moves to 1; from L > 0 it moves to L - 1 with
    probability 1/(2k) and to L + 1 otherwise.
    """
    down = 1.0 / (2 * k)
    q = np.zeros(n_max + 2)
    q[0] = 1.0
    p = np.zeros(n_max + 1)
    p[0] = 1.0
    for n in range(1, n_max + 1):
        new = np.zeros_like(q)
        new[1] += q[0]
        new[:-2] += down * q[1:-1]
        new[2:] += (1 - down) * q[1:-1]
        q = new
        p[n] = q[0]
    return p


def _kernel_return_probabilities(kernel: WalkKernel, n_max: int, origin) -> tuple[np.ndarray, str]:
    idx = kernel.index
    o = idx[origin]
    n = len(kernel.states)
    bmask = np.zeros(n, dtype=bool)
    for s in kernel.boundary:
        bmask[idx[s]] = True
    PT = kernel.P.T.tocsr()
    x = np.zeros(n)
    x[o] = 1.0

    def step(x, j):
        if np.any(x[bmask] > 0):
            raise TruncationError(f"probability mass on the truncation boundary before step {j}")
        y = PT @ x
        if abs(y.sum() - 1.0) > MASS_ATOL * n:
            raise TruncationError(f"mass not conserved at step {j}")
        return y

    p = np.zeros(n_max + 1)
    if kernel.pi is None:
        p[0] = 1.0
        for j in range(1, n_max + 1):
            x = step(x, j)
            p[j] = x[o]
        return p, "forward-dp"
    # p_n(o,o) = sum_x P_k(x) P_{n-k}(x) pi(o)/pi(x) with k = floor(n/2)
    half = (n_max + 1) // 2
    laws = [x]
    for j in range(1, half + 1):
        laws.append(step(laws[-1], j))
    ratio = kernel.pi[o] / kernel.pi
    for m in range(n_max + 1):
        a, b = laws[m // 2], laws[m - m // 2]
        both = (a > 0) & (b > 0) & bmask
        if np.any(both):
            raise TruncationError(f"boundary states contribute to p_{m}; enlarge the truncation")
        p[m] = float(np.sum(a * b * ratio))
    return p, "half-step-dp"


def return_probability_dp(source, n_max: int, origin=None) -> ReturnProbabilities:
    """Exact return probabilities p_n(o, o), n = 0..n_max.

    ``source`` is a :class:`GroupSpec` (simple random walk on its Cayley
    graph) or a :class:`WalkKernel`.  Truncations are sized automatically
    for group specs; for kernels, mass reaching the boundary raises
    :class:`TruncationError`.
    """
    if n_max < 0:
        raise ValueError("n_max must be nonnegative")
    if isinstance(source, GroupSpec):
        if source.family == "Z":
            return ReturnProbabilities(_lattice_return_probabilities(source.rank, n_max),
                                       "lattice-octant-dp", source.name)
        if source.family == "free":
            return ReturnProbabilities(_free_return_probabilities(source.rank, n_max),
                                       "word-length-chain", source.name)
        radius = (n_max + 1) // 2 + 1
        if source.is_finite():
            radius = max(radius, source.rank)
        kernel = transition_kernel(cayley_graph(source, radius))
        p, method = _kernel_return_probabilities(kernel, n_max, kernel.origin)
        return ReturnProbabilities(p, method, source.name)
    kernel = source
    p, method = _kernel_return_probabilities(kernel, n_max, kernel.origin if origin is None else origin)
    return ReturnProbabilities(p, method, "kernel")


@dataclass(frozen=True)
class WalkStatistics:
    seed: int
    trials: int
    steps: int
    at_origin_final: int
    first_return_counts: np.ndarray
    boundary_hits: int

    @property
    def return_frequency(self) -> float:
        return self.at_origin_final / self.trials

    @property
    def returned(self) -> int:
        return int(self.first_return_counts.sum())

    def binomial_sigma(self, p: float) -> float:
        return math.sqrt(p * (1 - p) / self.trials)


def monte_carlo_walk(kernel: WalkKernel, steps: int, trials: int, seed: int,
                     origin=None) -> WalkStatistics:
    """Simulate ``trials`` walks of ``steps`` steps from the origin.

    Trials are processed in fixed chunks; chunk c draws from the stream
    seeded by (seed, c), so results do not depend on how chunks are
    scheduled.  Walks that reach a boundary state are stopped there.
    """
    if trials <= 0 or steps < 0:
        raise ValueError("need trials > 0 and steps >= 0")
    idx = kernel.index
    o = idx[kernel.origin if origin is None else origin]
    P = kernel.P.tocsr()
    P.sort_indices()
    indptr, indices = P.indptr, P.indices
    row_of = np.repeat(np.arange(P.shape[0]), np.diff(indptr))
    cum = np.empty_like(P.data)
    for r in range(P.shape[0]):
        a, b = indptr[r], indptr[r + 1]
        cum[a:b] = np.cumsum(P.data[a:b])
        if b > a:
            cum[b - 1] = 1.0
    keyed = row_of + cum  # row r occupies (r, r + 1]
    bmask = np.zeros(P.shape[0], dtype=bool)
    for s in kernel.boundary:
        bmask[idx[s]] = True

    at_origin = 0
    first = np.zeros(steps + 1, dtype=np.int64)
    hits = 0
    for c, start in enumerate(range(0, trials, MC_CHUNK)):
        size = min(MC_CHUNK, trials - start)
        rng = np.random.default_rng([seed, c])
        pos = np.full(size, o)
        alive = np.ones(size, dtype=bool)
        first_ret = np.zeros(size, dtype=np.int64)
        for t in range(1, steps + 1):
            u = rng.random(size)
            k = np.searchsorted(keyed, pos + u, side="left")
            k = np.clip(k, indptr[pos], indptr[pos + 1] - 1)
            nxt = indices[k]
            pos = np.where(alive, nxt, pos)
            newly = alive & (pos == o) & (first_ret == 0)
            first_ret[newly] = t
            stopped = alive & bmask[pos]
            hits += int(stopped.sum())
            alive &= ~stopped
        at_origin += int(np.sum(alive & (pos == o)))
        np.add.at(first, first_ret[first_ret > 0], 1)
    return WalkStatistics(seed, trials, steps, at_origin, first, hits)
