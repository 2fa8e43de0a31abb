"""Finite-scale recurrence and heat-decay diagnostics.

Verdicts carry a ``-consistent`` suffix: they describe what a finite
truncation is compatible with and are not proofs about the infinite graph.
Continuous-time heat decay is represented by discrete-time return
probabilities; both decay with the same exponent.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from ..errors import TruncationError
from ..graph import MetricGraphModel
from ..metrics import _center_distances, ball_volumes
from .groups import GroupSpec, classify_recurrence, fit_loglog
from .walks import return_probability_dp

RECURRENT_ALPHA = 1.1
TRANSIENT_ALPHA = 1.2
PLATEAU_RTOL = 0.05
MIN_EVEN_STEPS = 50
TREND_DRIFT = 2.0
DIVERGENCE_RATIO = 0.9
TIME_NOTE = "discrete-time return probabilities stand in for the heat semigroup (t <-> n)"


@dataclass(frozen=True)
class RecurrenceIndicator:
    partial_sums: np.ndarray
    total: float
    alpha: float
    residual: float
    window: tuple
    plateau_growth: float
    boundary_case: bool
    verdict: str
    note: str = TIME_NOTE


def recurrence_indicator(p, fit_from=0.25) -> RecurrenceIndicator:
    """Green's-function partial sums and the decay exponent of p_{2n} ~ n^-alpha.

    The exponent is fitted on even steps 2n with n in the top
    ``1 - fit_from`` fraction of the available range.
    """
    p = np.asarray(getattr(p, "p", p), dtype=float)
    even = p[::2]
    n_even = len(even) - 1
    if n_even < MIN_EVEN_STEPS:
        raise ValueError(f"need at least {MIN_EVEN_STEPS} even steps, got {n_even}")
    sums = np.cumsum(p)
    lo = max(1, int(n_even * fit_from))
    ns = np.arange(lo, n_even + 1)
    vals = even[lo:]
    keep = vals > 0
    slope, resid = fit_loglog(ns[keep], vals[keep])
    alpha = -slope
    total = float(sums[-1])
    mid = float(sums[len(sums) // 2])
    growth = (total - mid) / total
    plateau = growth <= PLATEAU_RTOL
    if alpha <= RECURRENT_ALPHA:
        verdict = "recurrent-consistent"
    elif alpha >= TRANSIENT_ALPHA and plateau:
        verdict = "transient-consistent"
    else:
        verdict = "inconclusive"
    boundary = abs(alpha - 1.0) <= 0.1
    return RecurrenceIndicator(sums, total, alpha, resid, (2 * lo, 2 * n_even),
                               growth, boundary, verdict)


@dataclass(frozen=True)
class UltracontractivityFit:
    group: str
    exponent: float
    residual: float
    target: float
    window: tuple
    p: np.ndarray
    note: str = TIME_NOTE


def ultracontractivity_fit(spec: GroupSpec, n_max: int) -> UltracontractivityFit:
    """Fit sup_x p_{2n}(x, x) ~ n^{-N/2} over 2n in [n_max/4, n_max].

    On a Cayley graph the supremum is attained at every vertex, so the
    on-diagonal value at the identity is used.
    """
    if spec.family != "Z":
        raise ValueError("ultracontractivity fit is defined for Z^d only")
    p = return_probability_dp(spec, n_max).p
    steps = np.arange(len(p))
    sel = (steps >= n_max / 4) & (steps <= n_max) & (steps % 2 == 0) & (steps > 0)
    if sel.sum() < 3:
        raise ValueError("too few points for the fit; raise n_max")
    slope, resid = fit_loglog(steps[sel], p[sel])
    return UltracontractivityFit(spec.name, -slope, resid, spec.rank / 2,
                                 (int(steps[sel][0]), int(steps[sel][-1])), p)


@dataclass(frozen=True)
class WeightConditionReport:
    group: str
    sup_ratio: float
    inf_ratio: float
    sup_inner: float
    sup_outer: float
    inf_inner: float
    inf_outer: float
    sup_bounded: bool
    inf_positive: bool
    group_verdict: str
    verdict: str


def _bfs_depth(g: MetricGraphModel, origin) -> dict:
    nb = g.skeleton().neighbors
    depth = {origin: 0}
    queue = deque([origin])
    while queue:
        x = queue.popleft()
        for y in nb[x]:
            if y not in depth:
                depth[y] = depth[x] + 1
                queue.append(y)
    return depth


def weight_condition_check(g: MetricGraphModel, spec: GroupSpec, origin) -> WeightConditionReport:
    """Report sup and inf of nu(e)/|e| and the resulting recurrence verdict.

    A finite truncation always has finite sup and positive inf, so the
    two bounds are judged by their trend: edges are split at half the
    truncation depth, and a bound counts as holding when the outer half
    does not drift past the inner half by more than a factor TREND_DRIFT.
    """
    depth = _bfs_depth(g, origin)
    radius = max(depth.values())
    inner, outer = [], []
    for e in g.edges:
        ratio = e.nu / e.length
        (inner if max(depth[e.u], depth[e.v]) <= max(1, radius // 2) else outer).append(ratio)
    if not outer:
        outer = inner
    ratios = inner + outer
    sup_in, sup_out = max(inner), max(outer)
    inf_in, inf_out = min(inner), min(outer)
    sup_ok = sup_out <= TREND_DRIFT * sup_in
    inf_ok = inf_out >= inf_in / TREND_DRIFT
    group = classify_recurrence(spec)
    if group.verdict == "recurrent" and sup_ok:
        verdict = "recurrent"
    elif group.verdict == "transient" and inf_ok:
        verdict = "transient"
    else:
        verdict = "inconclusive"
    return WeightConditionReport(spec.name, max(ratios), min(ratios), sup_in, sup_out,
                                 inf_in, inf_out, sup_ok, inf_ok, group.verdict, verdict)


@dataclass(frozen=True)
class VolumeGrowthReport:
    radii: np.ndarray
    volumes: np.ndarray
    integral: np.ndarray
    increment_ratio: float
    last_doubling_growth: float
    verdict: str

    @property
    def total(self) -> float:
        return float(self.integral[-1])


def volume_growth_test(g: MetricGraphModel, center, R_max: float, dr: float,
                       boundary=None) -> VolumeGrowthReport:
    """Riemann sum I(R) = sum_{r = dr, 2 dr, ..., R} r dr / vol(B_r).

    The verdict compares the increments of I over the two halves (in log
    scale) of the top decade [R/10, R]: logarithmic or faster growth keeps
    them comparable, a convergent integral makes the upper one shrink.
    ``boundary`` defaults to the deepest breadth-first layer around
    ``center``; if the ball B_{R_max} reaches it a TruncationError is raised.
    """
    if not (dr > 0 and R_max > 0):
        raise ValueError("R_max and dr must be positive")
    K = int(round(R_max / dr))
    if K < 20:
        raise ValueError("need at least 20 radius steps")
    dist = _center_distances(g, center)
    if boundary is None:
        depth = _bfs_depth(g, center)
        deepest = max(depth.values())
        boundary = [v for v, d in depth.items() if d == deepest]
    reach = min((dist[v] for v in boundary), default=math.inf)
    if reach < R_max:
        raise TruncationError(f"ball of radius {R_max} reaches the truncation boundary at {reach}")
    radii = dr * np.arange(1, K + 1)
    vols = ball_volumes(g, center, radii, dist=dist)
    integral = np.cumsum(radii * dr / vols)

    def at(r):
        i = min(K - 1, max(0, int(math.floor(r / dr + 1e-9)) - 1))
        return float(integral[i])

    top = at(R_max)
    mid = at(R_max / math.sqrt(10))
    low = at(R_max / 10)
    lower_inc = mid - low
    ratio = (top - mid) / lower_inc if lower_inc > 0 else math.inf
    verdict = "divergent-consistent" if ratio >= DIVERGENCE_RATIO else "convergent-consistent"
    last_doubling = (top - at(R_max / 2)) / at(R_max / 2)
    return VolumeGrowthReport(radii, vols, integral, ratio, last_doubling, verdict)
