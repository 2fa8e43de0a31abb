import math
from collections import deque

import numpy as np
import pytest

from cablekit.correspondence import default_intrinsic_weight, realize
from cablekit.families import grid_graph, line_model, path_graph, random_discrete_graph, star_graph
from cablekit.graph import MetricEdge, MetricGraphModel
from cablekit.metrics import (Point, ball, ball_volumes, distances_from_point, eta_lengths,
                              intrinsic_metric_vertices, is_intrinsic, jump_size, path_metric,
                              point_distance, quasi_isometry_check, restrict_metric)
from cablekit.operators import combinatorial_laplacian


def bfs(neighbors, s):
    dist = {s: 0}
    q = deque([s])
    while q:
        x = q.popleft()
        for y in neighbors[x]:
            if y not in dist:
                dist[y] = dist[x] + 1
                q.append(y)
    return dist


def test_eta_lengths():
    g = MetricGraphModel([0, 1, 2, 3], [MetricEdge("a", 0, 1, 3.0, 2.0, 2.0),
                                        MetricEdge("b", 1, 2, 2.0, 1.0, 4.0),
                                        MetricEdge("c", 2, 3, 1.0, 4.0, 1.0)])
    assert eta_lengths(g) == {"a": 3.0, "b": 1.0, "c": 2.0}


def test_equilateral_distances_match_bfs():
    s = grid_graph(4, 5)
    g = MetricGraphModel.equilateral(s)
    for src in (0, 7, 19):
        assert intrinsic_metric_vertices(g, src) == pytest.approx(bfs(s.neighbors, src), abs=0)


def test_triangle_detour_and_parallel_edges():
    tri = MetricGraphModel([0, 1, 2], [MetricEdge("a", 0, 1, 1.0), MetricEdge("b", 1, 2, 1.0),
                                       MetricEdge("c", 0, 2, 3.0)])
    assert intrinsic_metric_vertices(tri, 0)[2] == 2.0
    par = MetricGraphModel([0, 1], [MetricEdge("a", 0, 1, 1.0), MetricEdge("b", 1, 0, 5.0)])
    assert intrinsic_metric_vertices(par, 0)[1] == 1.0


def test_path_metric_examples():
    p4 = combinatorial_laplacian(path_graph(4))
    assert path_metric(p4)(0, 3) == 3.0
    from cablekit.families import cycle_graph
    c4 = combinatorial_laplacian(cycle_graph(4))
    d = path_metric(c4, default_intrinsic_weight(c4))
    assert math.isclose(d(0, 2), math.sqrt(2), rel_tol=1e-15)
    single = combinatorial_laplacian(path_graph(2))
    assert path_metric(single, {(0, 1): 0.3})(0, 1) == 0.3


def test_is_intrinsic_examples():
    star = combinatorial_laplacian(star_graph(3))
    chk = is_intrinsic(star, path_metric(star))
    assert not chk.ok and chk.worst_vertex == 0 and chk.slack == -2.0
    from cablekit.families import cycle_graph
    c4 = combinatorial_laplacian(cycle_graph(4))
    chk = is_intrinsic(c4, lambda u, v: 1 / math.sqrt(2))
    assert chk.ok and abs(chk.slack) < 1e-15


def test_restrict_metric_examples():
    g = MetricGraphModel.equilateral(grid_graph(3, 3))
    d = restrict_metric(g)
    assert d.source == "restriction-of-eta"
    for u in range(9):
        assert all(d(u, v) == dist for v, dist in bfs(g.skeleton().neighbors, u).items())
    cs = realize(combinatorial_laplacian(path_graph(3)))
    d = restrict_metric(cs.model)
    assert math.isclose(d(0, 1), 1 / math.sqrt(2)) and math.isclose(d(1, 2), 1 / math.sqrt(2))
    loops = MetricGraphModel([0, 1], [MetricEdge("e", 0, 1, 1.0), MetricEdge("l0", 0, 0, 0.1),
                                      MetricEdge("l1", 1, 1, 0.1)])
    assert restrict_metric(loops)(0, 1) == 1.0


def test_jump_size_examples():
    p3 = combinatorial_laplacian(path_graph(3))
    assert jump_size(p3, path_metric(p3)) == 1.0
    star = combinatorial_laplacian(star_graph(3))
    assert math.isclose(jump_size(star, path_metric(star, default_intrinsic_weight(star))),
                        math.sqrt(1 / 3))
    single = combinatorial_laplacian(path_graph(2))
    assert jump_size(single, lambda u, v: 0.3) == 0.3


def test_restricted_metric_bounded_by_weight_on_neighbors():
    rng = np.random.default_rng(2)
    g = random_discrete_graph(rng, 25)
    cs = realize(g)
    d = restrict_metric(cs.model)
    for u, v, _ in g.pairs():
        assert d(u, v) <= cs.weight(u, v) * (1 + 1e-15)
    assert d.triangle_violations(rng, 2000) == []


def test_quasi_isometry_examples():
    g = MetricGraphModel.equilateral(grid_graph(3, 3))
    rep = quasi_isometry_check(g, samples=50, seed=1)
    assert rep.ok and rep.R == 1.0 and rep.max_pair_error == 0.0 and rep.max_net_distance == 0.5
    edges = [MetricEdge(f"e{i}", i, i + 1, 1.0) for i in range(4)] + [MetricEdge("long", 4, 0, 10.0)]
    g = MetricGraphModel(range(5), edges)
    rep = quasi_isometry_check(g, samples=20, seed=3)
    assert rep.ok and rep.R == 10.0 and rep.max_net_distance == 5.0


def test_point_distances():
    g = MetricGraphModel.equilateral(path_graph(3))
    x = Point("e0", 0.25)
    d = distances_from_point(g, x)
    assert d == {0: 0.25, 1: 0.75, 2: 1.75}
    assert point_distance(g, x, Point("e0", 0.75)) == 0.5
    assert point_distance(g, x, Point("e1", 0.5)) == 1.25
    with pytest.raises(ValueError):
        distances_from_point(g, Point("e0", 2.0))


def test_ball_examples():
    star = MetricGraphModel.equilateral(star_graph(3))
    assert ball(star, 0, 0.0).measure == 0.0
    assert ball(star, 0, 0.5).measure == 1.5
    disc = combinatorial_laplacian(star_graph(3))
    assert ball(disc, 0, 0).measure == 1.0
    assert ball(disc, 1, 1).vertices == (0, 1)
    line = line_model(30)
    radii = np.linspace(0, 25, 101)
    assert np.allclose(ball_volumes(line, 0, radii), 2 * radii, rtol=0, atol=1e-12)
    with pytest.raises(ValueError):
        ball(star, 0, -1.0)


def test_ball_overlap_on_cycle_is_clipped():
    edge = MetricGraphModel.equilateral(path_graph(2))
    two = MetricGraphModel([0, 1], [MetricEdge("a", 0, 1, 1.0), MetricEdge("b", 1, 0, 1.0)])
    assert ball(two, 0, 0.75).measure == pytest.approx(1.5)
    assert ball(two, 0, 1.5).measure == pytest.approx(2.0)
    assert ball(edge, 0, 5.0).measure == 1.0


def test_ball_around_edge_point():
    g = MetricGraphModel.equilateral(path_graph(3))
    vols = ball_volumes(g, Point("e0", 0.5), [0.25, 0.5, 1.0, 3.0])
    assert np.allclose(vols, [0.5, 1.0, 1.5, 2.0])


def test_ball_measure_monotone():
    rng = np.random.default_rng(4)
    from cablekit.families import random_model
    g = random_model(rng, 12)
    vols = ball_volumes(g, 0, np.linspace(0, 60, 400))
    assert np.all(np.diff(vols) >= -1e-12)
