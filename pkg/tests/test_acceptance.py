"""End-to-end acceptance checks. Each test prints one PASS/FAIL line.

Run directly with ``python3 tests/test_acceptance.py`` for the summary alone.
"""

import json
import math
import subprocess
import sys
import time

import numpy as np
import pytest

from cablekit.correspondence import (default_intrinsic_weight, discretize, extend_affine,
                                     kirchhoff_defect, realize)
from cablekit.families import (cycle_graph, grid_graph, line_model, path_graph,
                               random_discrete_graph, random_model, star_graph)
from cablekit.graph import MetricEdge, MetricGraphModel
from cablekit.metrics import is_intrinsic, path_metric, restrict_metric
from cablekit.operators import (apply_discrete_laplacian, combinatorial_laplacian,
                                equilateral_correspondence_check, spectrum_discrete,
                                spectrum_metric, weighted_degree)
from cablekit.stochastic import (GroupSpec, cayley_cable_system, growth_function,
                                 recurrence_indicator, return_probability_dp, volume_growth_test)

PI = math.pi


@pytest.fixture
def report(capsys):
    def emit(number: int, title: str, ok: bool, detail: str):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {number}: {title} ({detail})")
        assert ok, detail
    return emit


def test_criterion_01_round_trip(report):
    rng = np.random.default_rng(20240601)
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(200):
        g = random_discrete_graph(rng, max_n=40)
        back = discretize(realize(g, default_intrinsic_weight(g)).model)
        for v in g.vertices:
            worst = max(worst, abs(back.m[v] - g.m[v]) / g.m[v])
        for (u, v), w in g.b.items():
            worst = max(worst, abs(back.weight(u, v) - w) / w)
        assert set(back.b) == set(g.b)
    elapsed = time.perf_counter() - t0
    report(1, "round trip", worst <= 1e-12 and elapsed < 10,
           f"max rel err {worst:.2e}, {elapsed:.2f}s")


def test_criterion_02_harmonic_bijection(report):
    rng = np.random.default_rng(7)
    worst = 0.0
    harmonic_ok = True
    for _ in range(100):
        g = random_model(rng)
        d = discretize(g)
        fv = {v: float(rng.normal()) for v in g.vertices}
        lf = apply_discrete_laplacian(d, fv)
        kd = kirchhoff_defect(g, extend_affine(g, fv))
        for v in g.vertices:
            worst = max(worst, abs(kd[v] + d.m[v] * lf[v]) / max(1.0, abs(kd[v])))
        const = {v: 1.5 for v in g.vertices}
        harmonic_ok &= all(abs(x) <= 1e-12 for x in kirchhoff_defect(g, extend_affine(g, const)).values())
    report(2, "harmonic bijection", worst <= 1e-12 and harmonic_ok, f"max defect mismatch {worst:.2e}")


def test_criterion_03_intrinsic_restriction(report):
    rng = np.random.default_rng(3)
    failures = 0
    for _ in range(100):
        g = random_discrete_graph(rng, max_n=40)
        failures += not is_intrinsic(g, restrict_metric(realize(g).model)).ok
    star = combinatorial_laplacian(star_graph(3))
    chk = is_intrinsic(star, path_metric(star))
    ok = failures == 0 and not chk.ok and chk.slack == -2.0
    report(3, "intrinsic restriction", ok, f"{failures} realize failures, 3-star slack {chk.slack}")


def test_criterion_04_norm_sandwich(report):
    rng = np.random.default_rng(11)
    bad = 0
    for _ in range(100):
        g = random_discrete_graph(rng, max_n=40)
        top = spectrum_discrete(g).eigenvalues[-1]
        deg = max(weighted_degree(g).values())
        bad += not (deg - 1e-9 <= top <= 2 * deg + 1e-9)
    report(4, "norm sandwich", bad == 0, f"{bad} of 100 outside")


def _relative_errors(model, h, exact):
    lam = spectrum_metric(model, h, len(exact) + 1).eigenvalues
    assert abs(lam[0]) < 1e-9
    return np.abs(lam[1:] - exact) / exact


@pytest.mark.parametrize("name", ["interval", "circle"])
def test_criterion_05_metric_spectra(report, name):
    # only modes with sqrt(lambda) * h small enough for P1 elements to reach 1e-3 at h = 0.01
    if name == "interval":
        model = MetricGraphModel.equilateral(path_graph(2))
        exact = np.array([(k * PI) ** 2 for k in (1, 2, 3)])
    else:
        model = MetricGraphModel(["v"], [MetricEdge("c", "v", "v", 1.0)])
        exact = np.array([(2 * PI * k) ** 2 for k in (1, 1)])
    t0 = time.perf_counter()
    fine = _relative_errors(model, 0.01, exact)
    finer = _relative_errors(model, 0.005, exact)
    elapsed = time.perf_counter() - t0
    ratio = float(np.min(fine / finer))
    ok = fine.max() <= 1e-3 and ratio >= 3 and elapsed < 5
    report(5, f"{name} spectrum", ok,
           f"max rel err {fine.max():.2e}, min halving ratio {ratio:.2f}, {elapsed:.2f}s")


@pytest.mark.parametrize("name", ["P2", "C4", "3-star", "3x3 grid"])
def test_criterion_06_equilateral(report, name):
    skeleton = {"P2": path_graph(2), "C4": cycle_graph(4), "3-star": star_graph(3),
                "3x3 grid": grid_graph(3, 3)}[name]
    rep = equilateral_correspondence_check(MetricGraphModel.equilateral(skeleton), 0.005,
                                           cap=50, tol=1e-3)
    worst = max((e.distance for e in rep.entries if not e.exempt), default=0.0)
    report(6, f"equilateral {name}", rep.ok and rep.checked > 0,
           f"{rep.checked} eigenvalues checked, worst distance {worst:.2e}")


def test_criterion_07_polya(report):
    t0 = time.perf_counter()
    p = {d: return_probability_dp(GroupSpec("Z", d), 400).p for d in (1, 2, 3)}
    exact = p[1][2] == 0.5 and p[2][2] == 0.25
    windows = {1: (0.45, 0.55), 2: (0.9, 1.1), 3: (1.35, 1.65)}
    alphas = {d: recurrence_indicator(p[d]).alpha for d in (1, 2, 3)}
    in_window = all(lo <= alphas[d] <= hi for d, (lo, hi) in windows.items())
    green = float(np.sum(p[3][:201]))
    elapsed = time.perf_counter() - t0
    ok = exact and in_window and 1.45 <= green <= 1.52 and elapsed < 60
    alpha_txt = ", ".join(f"Z{d} {alphas[d]:.3f}" for d in (1, 2, 3))
    report(7, "lattice return probabilities", ok,
           f"exponents {alpha_txt}; Z3 partial sum {green:.4f}; {elapsed:.1f}s")


def test_criterion_08_growth(report):
    n = np.arange(31)
    z2 = growth_function(GroupSpec("Z", 2), 30).counts
    f2 = growth_function(GroupSpec("free", 2), 12).counts
    heis = growth_function(GroupSpec("heisenberg", 3), 20, window=(10, 20))
    ok = (z2.tolist() == (2 * n ** 2 + 2 * n + 1).tolist()
          and f2.tolist() == [2 * 3 ** k - 1 for k in range(13)]
          and 3.5 <= heis.slope <= 4.5)
    report(8, "growth functions", ok, f"Heisenberg slope {heis.slope:.3f}")


def test_criterion_09_volume_growth(report):
    line = volume_growth_test(line_model(120), 0, 100.0, 0.5)
    mask = line.radii > 0
    dev = float(np.max(np.abs(line.integral[mask] / (line.radii[mask] / 2) - 1)))
    model, trunc = cayley_cable_system(GroupSpec("Z", 3), 22)
    z3 = volume_growth_test(model, trunc.origin, 20.0, 0.25)
    ok = dev <= 0.02 and z3.last_doubling_growth < 0.05
    report(9, "volume growth test", ok,
           f"line max deviation {dev:.2e}; Z3 last doubling growth {z3.last_doubling_growth:.2%}")


CLI_RUNS = [
    ["cayley", "growth", "--group", "H3", "--radius", "6"],
    ["walk", "mc", "--group", "Z2", "--steps", "40", "--trials", "30000", "--seed", "17"],
    ["walk", "dp", "--group", "Z3", "--n-max", "60"],
    ["recurrence", "indicator", "--group", "Z2", "--n-max", "120"],
    ["metric", "quasi-isometry", "--in", "{model}", "--seed", "4"],
    ["spectrum", "metric", "--in", "{model}", "--h", "0.05", "--k", "6"],
    ["discretize", "--in", "{model}"],
]


def test_criterion_10_cli_determinism(report, tmp_path):
    model = tmp_path / "model.json"
    model.write_text(json.dumps({
        "type": "metric", "vertices": [0, 1, 2, 3],
        "edges": [{"id": "a", "u": 0, "v": 1, "length": 1.0},
                  {"id": "b", "u": 1, "v": 2, "length": 0.5, "mu": 2.0, "nu": 3.0},
                  {"id": "c", "u": 2, "v": 0, "length": 2.0},
                  {"id": "d", "u": 2, "v": 3, "length": 1.5},
                  {"id": "l", "u": 3, "v": 3, "length": 0.7}]}))
    differing = []
    for argv in CLI_RUNS:
        argv = [a.format(model=model) for a in argv]
        outs = [subprocess.run([sys.executable, "-m", "cablekit.cli", *argv], capture_output=True,
                               check=True).stdout for _ in range(2)]
        if outs[0] != outs[1] or not outs[0]:
            differing.append(" ".join(argv[:2]))
    report(10, "CLI determinism", not differing,
           f"{len(CLI_RUNS)} invocations, differing: {differing or 'none'}")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
