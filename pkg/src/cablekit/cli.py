"""Command-line front end: ``cablekit <command> [<action>] [options]``.

Exit status: 0 on success, 1 when the input graph fails validation,
2 for usage errors, malformed input and out-of-range parameters.
"""

from __future__ import annotations

import argparse
import math
import sys


from . import __version__
from .correspondence import (IntrinsicWeight, default_intrinsic_weight, discretize,
                             intrinsic_size, realize)
from .errors import CapacityError, GraphValidationError, IntrinsicWeightError, TruncationError
from .graph import DiscreteGraph, MetricGraphModel, validate_discrete, validate_model
from .io import (CSV_DIGITS, MalformedInputError, dumps_csv, dumps_json, graph_to_obj,
                 read_graph)
from .metrics import (ball, ball_volumes, is_intrinsic, path_metric, quasi_isometry_check,
                      restrict_metric, _center_distances)
from .operators import (equilateral_correspondence_check, heat_semigroup, spectrum_discrete,
                        spectrum_metric)
from .stochastic import (GroupSpec, cayley_cable_system, cayley_graph, classify_recurrence,
                         growth_function, monte_carlo_walk, recurrence_indicator,
                         return_probability_dp, transition_kernel, ultracontractivity_fit,
                         volume_growth_test, weight_condition_check)

EXIT_OK, EXIT_INVALID, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


class ParameterError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# ---------------------------------------------------------------- helpers

def _require(cond: bool, message: str):
    if not cond:
        raise ParameterError(message)


def _resolve_vertex(g, text: str):
    for v in g.vertices:
        if str(v) == text:
            return v
    raise ParameterError(f"vertex {text!r} not found in the input graph")


def _vertex_list(g, text: str | None) -> list:
    if not text:
        return []
    return [_resolve_vertex(g, t.strip()) for t in text.split(",") if t.strip()]


def _float_list(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise ParameterError(f"expected comma-separated numbers, got {text!r}") from None


def _load(args, want=None):
    g = read_graph(args.input)
    if want is DiscreteGraph and not isinstance(g, DiscreteGraph):
        raise ParameterError("this command needs a discrete graph (type 'discrete')")
    if want is MetricGraphModel and not isinstance(g, MetricGraphModel):
        raise ParameterError("this command needs a metric model (type 'metric')")
    report = validate_discrete(g) if isinstance(g, DiscreteGraph) else validate_model(g)
    if report:
        raise GraphValidationError(report, "input graph")
    return g


def _group(args) -> GroupSpec:
    try:
        return GroupSpec.parse(args.group)
    except ValueError as exc:
        raise ParameterError(str(exc)) from None


def _csv(args, header, rows, op, **params):
    params["seed"] = args.seed
    return dumps_csv(header, rows, op=op, params=params, digits=args.digits)


def _json(args, op, payload: dict):
    return dumps_json({"op": op, "seed": args.seed, **payload})


# ---------------------------------------------------------------- commands

def cmd_validate(args):
    g = read_graph(args.input)
    report = validate_discrete(g) if isinstance(g, DiscreteGraph) else validate_model(g)
    kind = "discrete" if isinstance(g, DiscreteGraph) else "metric"
    out = _json(args, "validate", {"type": kind, "valid": not report,
                                   "violations": [str(v) for v in report]})
    return out, (EXIT_INVALID if report else EXIT_OK)


def cmd_discretize(args):
    return dumps_json(graph_to_obj(discretize(_load(args, MetricGraphModel))))


def cmd_realize(args):
    g = _load(args, DiscreteGraph)
    p = None
    if args.weight:
        import json
        try:
            with open(args.weight, encoding="utf-8") as fh:
                items = json.load(fh)
            pmap = {}
            for it in items:
                u, v = _resolve_vertex(g, str(it["u"])), _resolve_vertex(g, str(it["v"]))
                pmap[(u, v)] = float(it["p"])
        except (OSError, ValueError, KeyError, TypeError) as exc:
            raise MalformedInputError(f"weight file: {exc}") from None
        p = IntrinsicWeight(pmap)
    return dumps_json(graph_to_obj(realize(g, p).model))


def _vertex_metric(args, g):
    if isinstance(g, MetricGraphModel):
        return restrict_metric(g)
    if args.weight == "intrinsic":
        return path_metric(g, default_intrinsic_weight(g))
    return path_metric(g)


def cmd_metric_distances(args):
    g = _load(args)
    d = _vertex_metric(args, g)
    return _csv(args, ["u", "v", "distance"], d.rows(), "metric-distances", source=d.source)


def cmd_metric_balls(args):
    g = _load(args)
    center = _resolve_vertex(g, args.center)
    radii = _float_list(args.radii)
    _require(radii and all(r >= 0 for r in radii), "radii must be nonnegative")
    rows = []
    if isinstance(g, MetricGraphModel):
        dist = _center_distances(g, center)
        vols = ball_volumes(g, center, radii, dist=dist)
        for r, vol in zip(radii, vols):
            rows.append((r, sum(1 for v in g.vertices if dist.get(v, math.inf) <= r), float(vol)))
    else:
        metric = _vertex_metric(args, g) if args.weight == "intrinsic" else None
        for r in radii:
            rep = ball(g, center, r, metric)
            rows.append((r, len(rep.vertices), rep.measure))
    return _csv(args, ["radius", "vertices", "measure"], rows, "metric-balls", center=center)


def cmd_metric_intrinsic(args):
    g = _load(args)
    if isinstance(g, MetricGraphModel):
        d, target = restrict_metric(g), discretize(g)
    else:
        d, target = _vertex_metric(args, g), g
    chk = is_intrinsic(target, d)
    payload = {"metric": d.source, "ok": chk.ok, "worst_vertex": chk.worst_vertex,
               "slack": chk.slack,
               "slacks": [{"vertex": v, "slack": s} for v, s in chk.slacks.items()]}
    if isinstance(g, MetricGraphModel):
        payload["intrinsic_size"] = intrinsic_size(g)
    return _json(args, "metric-intrinsic-check", payload)


def cmd_metric_qi(args):
    g = _load(args, MetricGraphModel)
    _require(args.samples > 0, "--samples must be positive")
    rep = quasi_isometry_check(g, samples=args.samples, seed=args.seed)
    return _json(args, "metric-quasi-isometry", {
        "ok": rep.ok, "a": 1.0, "b": 0.0, "R": rep.R, "pairs_checked": rep.pairs_checked,
        "max_pair_error": rep.max_pair_error, "points_checked": rep.points_checked,
        "max_net_distance": rep.max_net_distance, "violations": [str(v) for v in rep.violations]})


def cmd_spectrum_discrete(args):
    g = _load(args, DiscreteGraph)
    lam = spectrum_discrete(g).eigenvalues
    if args.k is not None:
        _require(1 <= args.k <= len(lam), f"--k must lie in [1, {len(lam)}]")
        lam = lam[:args.k]
    return _csv(args, ["index", "eigenvalue"], enumerate(lam.tolist()), "spectrum-discrete")


def cmd_spectrum_metric(args):
    g = _load(args, MetricGraphModel)
    _require(args.h > 0, "--h must be positive")
    _require(args.k is not None or args.upper is not None, "give --k or --upper")
    _require(args.k is None or args.k >= 1, "--k must be at least 1")
    dirichlet = _vertex_list(g, args.dirichlet)
    spec = spectrum_metric(g, args.h, args.k, dirichlet, upper=args.upper)
    return _csv(args, ["index", "eigenvalue"], enumerate(spec.eigenvalues.tolist()),
                "spectrum-metric", h=args.h, k=args.k, upper=args.upper,
                dirichlet=[str(v) for v in dirichlet])


def cmd_spectrum_equilateral(args):
    g = _load(args, MetricGraphModel)
    _require(args.h > 0, "--h must be positive")
    _require(args.upper > 0, "--upper must be positive")
    rep = equilateral_correspondence_check(g, args.h, cap=args.upper, tol=args.tol)
    return _json(args, "spectrum-equilateral-check", {
        "ok": rep.ok, "edge_length": rep.edge_length, "h": rep.h, "upper": args.upper,
        "checked": rep.checked, "discrete_spectrum": rep.discrete_spectrum,
        "entries": [{"eigenvalue": e.eigenvalue, "image": e.image, "distance": e.distance,
                     "tol": e.tol, "exempt": e.exempt} for e in rep.entries]})


def cmd_heat(args):
    g = _load(args)
    _require(args.t >= 0, "--t must be nonnegative")
    start = _resolve_vertex(g, args.initial)
    if isinstance(g, MetricGraphModel):
        _require(args.h is not None and args.h > 0, "--h must be given and positive for metric input")
        from .operators import assemble_fem
        n = assemble_fem(g, args.h).size
        spec = spectrum_metric(g, args.h, n, eigenvectors=True)
    else:
        spec = spectrum_discrete(g)
    values = heat_semigroup(spec, args.t, {start: 1.0})
    vset = set(g.vertices)
    rows = [(str(lbl), float(val)) for lbl, val in zip(spec.labels, values)
            if args.all_nodes or lbl in vset]
    return _csv(args, ["node", "value"], rows, "heat", t=args.t, initial=start, h=args.h)


def _walk_kernel(args):
    if args.group:
        spec = _group(args)
        trunc = cayley_graph(spec, args.radius)
        return transition_kernel(trunc), spec.name
    _require(args.input is not None, "give --group or --in")
    g = _load(args, DiscreteGraph)
    origin = _resolve_vertex(g, args.origin) if args.origin else g.vertices[0]
    return transition_kernel(g, _vertex_list(g, args.boundary), origin), "graph"


def cmd_walk_dp(args):
    _require(args.n_max >= 0, "--n-max must be nonnegative")
    if args.group and args.radius is None:
        res = return_probability_dp(_group(args), args.n_max)
    else:
        if args.group:
            _require(args.radius >= 0, "--radius must be nonnegative")
        kernel, _ = _walk_kernel(args)
        res = return_probability_dp(kernel, args.n_max)
    return _csv(args, ["n", "p_n"], enumerate(res.p.tolist()), "walk-dp",
                source=res.source, method=res.method, n_max=args.n_max)


def cmd_walk_mc(args):
    _require(args.steps >= 0, "--steps must be nonnegative")
    _require(args.trials > 0, "--trials must be positive")
    if args.group and args.radius is None:
        args.radius = args.steps + 1
    if args.radius is not None:
        _require(args.radius >= 0, "--radius must be nonnegative")
    kernel, source = _walk_kernel(args)
    st = monte_carlo_walk(kernel, args.steps, args.trials, args.seed)
    payload = {"source": source, "trials": st.trials, "steps": st.steps,
               "at_origin_final": st.at_origin_final, "return_frequency": st.return_frequency,
               "returned": st.returned, "boundary_hits": st.boundary_hits,
               "first_return_counts": st.first_return_counts}
    try:
        p = float(return_probability_dp(kernel, st.steps).p[-1])
        payload.update(dp_probability=p, binomial_sigma=st.binomial_sigma(p),
                       within_3_sigma=abs(st.return_frequency - p) <= 3 * st.binomial_sigma(p) + 1e-15)
    except TruncationError as exc:
        payload["dp_probability"] = None
        payload["dp_note"] = str(exc)
    return _json(args, "walk-mc", payload)


def cmd_cayley_generate(args):
    spec = _group(args)
    _require(args.radius >= 0, "--radius must be nonnegative")
    if args.cable:
        model, trunc = cayley_cable_system(spec, args.radius)
        doc = graph_to_obj(model)
    else:
        trunc = cayley_graph(spec, args.radius)
        doc = graph_to_obj(trunc.graph)
    if args.boundary_out:
        with open(args.boundary_out, "w", encoding="utf-8") as fh:
            fh.write(dumps_json({"group": spec.name, "radius": args.radius,
                                 "origin": trunc.origin, "boundary": sorted(trunc.boundary)}))
    return dumps_json(doc)


def cmd_cayley_growth(args):
    spec = _group(args)
    _require(args.radius >= 0, "--radius must be nonnegative")
    window = None
    if args.window:
        w = [int(x) for x in _float_list(args.window)]
        _require(len(w) == 2 and 1 <= w[0] < w[1] <= args.radius, "--window must be lo,hi with 1 <= lo < hi <= radius")
        window = tuple(w)
    tab = growth_function(spec, args.radius, window)
    return _csv(args, ["n", "gamma"], zip(tab.radii.tolist(), tab.counts.tolist()),
                "cayley-growth", group=spec.name, radius=args.radius,
                window=list(tab.window), slope=tab.slope)


def cmd_cayley_classify(args):
    rc = classify_recurrence(_group(args))
    return _json(args, "cayley-classify", {"group": rc.group, "verdict": rc.verdict,
                                           "growth": rc.growth, "reason": rc.reason})


def cmd_recurrence_indicator(args):
    _require(args.n_max >= 100, "--n-max must be at least 100 (50 even steps)")
    res = return_probability_dp(_group(args), args.n_max)
    ind = recurrence_indicator(res)
    if args.format == "csv":
        return _csv(args, ["n", "p_n", "partial_sum"],
                    zip(range(len(res.p)), res.p.tolist(), ind.partial_sums.tolist()),
                    "recurrence-indicator", group=res.source, n_max=args.n_max,
                    alpha=ind.alpha, verdict=ind.verdict)
    return _json(args, "recurrence-indicator", {
        "group": res.source, "n_max": args.n_max, "partial_sum": ind.total, "alpha": ind.alpha,
        "fit_residual": ind.residual, "fit_window": list(ind.window),
        "late_growth": ind.plateau_growth, "boundary_case": ind.boundary_case,
        "verdict": ind.verdict, "classification": classify_recurrence(_group(args)).verdict,
        "note": ind.note})


def cmd_recurrence_volume(args):
    _require(args.r_max > 0 and args.dr > 0, "--r-max and --dr must be positive")
    _require(args.r_max / args.dr >= 20 - 1e-9, "need at least 20 radius steps (r-max/dr >= 20)")
    if args.group:
        spec = _group(args)
        radius = args.radius if args.radius is not None else int(math.ceil(args.r_max)) + 2
        model, trunc = cayley_cable_system(spec, radius)
        center, source = trunc.origin, spec.name
        boundary = sorted(v for v, d in trunc.depth.items() if d == radius)
    else:
        _require(args.input is not None, "give --group or --in")
        model = _load(args, MetricGraphModel)
        center = _resolve_vertex(model, args.center) if args.center else model.vertices[0]
        source, boundary = "model", (_vertex_list(model, args.boundary) or None)
    rep = volume_growth_test(model, center, args.r_max, args.dr, boundary=boundary)
    if args.format == "csv":
        return _csv(args, ["r", "volume", "integral"],
                    zip(rep.radii.tolist(), rep.volumes.tolist(), rep.integral.tolist()),
                    "recurrence-volume-test", source=source, r_max=args.r_max, dr=args.dr,
                    verdict=rep.verdict)
    return _json(args, "recurrence-volume-test", {
        "source": source, "center": center, "r_max": args.r_max, "dr": args.dr,
        "integral": rep.total, "increment_ratio": rep.increment_ratio,
        "last_doubling_growth": rep.last_doubling_growth, "verdict": rep.verdict})


def cmd_recurrence_ultrafit(args):
    spec = _group(args)
    _require(args.n_max >= 8, "--n-max must be at least 8")
    fit = ultracontractivity_fit(spec, args.n_max)
    return _json(args, "recurrence-ultrafit", {
        "group": fit.group, "n_max": args.n_max, "exponent": fit.exponent,
        "target": fit.target, "residual": fit.residual, "window": list(fit.window),
        "note": fit.note})


def cmd_recurrence_weights(args):
    spec = _group(args)
    _require(args.radius >= 1, "--radius must be at least 1")
    model, trunc = cayley_cable_system(spec, args.radius)
    rep = weight_condition_check(model, spec, trunc.origin)
    return _json(args, "recurrence-weight-check", {
        "group": rep.group, "sup_ratio": rep.sup_ratio, "inf_ratio": rep.inf_ratio,
        "sup_bounded": rep.sup_bounded, "inf_positive": rep.inf_positive,
        "group_verdict": rep.group_verdict, "verdict": rep.verdict})


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="random seed (echoed in output)")
    common.add_argument("--out", help="write output here instead of stdout")
    common.add_argument("--digits", type=int, default=CSV_DIGITS,
                        help="significant digits in CSV output")

    parser = _Parser(prog="cablekit", description="Discrete and metric graph toolkit.")
    parser.add_argument("--version", action="version", version=f"cablekit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def leaf(subparsers, name, func, help_text, needs_input=False, optional_input=False):
        p = subparsers.add_parser(name, parents=[common], help=help_text)
        if needs_input or optional_input:
            p.add_argument("--in", dest="input", required=needs_input, help="graph JSON file")
        p.set_defaults(func=func)
        return p

    leaf(sub, "validate", cmd_validate, "check a graph file", True)
    leaf(sub, "discretize", cmd_discretize, "metric model -> discrete graph", True)
    p = leaf(sub, "realize", cmd_realize, "discrete graph -> cable system", True)
    p.add_argument("--weight", help="JSON list of {u, v, p}; default intrinsic weight otherwise")

    metric = sub.add_parser("metric", help="vertex metrics").add_subparsers(
        dest="action", required=True, parser_class=_Parser)
    for name, func in (("distances", cmd_metric_distances), ("balls", cmd_metric_balls),
                       ("intrinsic-check", cmd_metric_intrinsic)):
        p = leaf(metric, name, func, f"metric {name}", True)
        p.add_argument("--weight", choices=("combinatorial", "intrinsic"), default="combinatorial",
                       help="metric on discrete input")
        if name == "balls":
            p.add_argument("--center", required=True)
            p.add_argument("--radii", required=True, help="comma-separated radii")
    p = leaf(metric, "quasi-isometry", cmd_metric_qi, "vertex inclusion check", True)
    p.add_argument("--samples", type=int, default=100)

    spectrum = sub.add_parser("spectrum", help="eigenvalues").add_subparsers(
        dest="action", required=True, parser_class=_Parser)
    p = leaf(spectrum, "discrete", cmd_spectrum_discrete, "spectrum of L", True)
    p.add_argument("--k", type=int)
    p = leaf(spectrum, "metric", cmd_spectrum_metric, "Kirchhoff spectrum (P1 FEM)", True)
    p.add_argument("--h", type=float, required=True)
    p.add_argument("--k", type=int)
    p.add_argument("--upper", type=float)
    p.add_argument("--dirichlet", help="comma-separated vertices with Dirichlet condition")
    p = leaf(spectrum, "equilateral-check", cmd_spectrum_equilateral,
             "compare with the normalized Laplacian", True)
    p.add_argument("--h", type=float, required=True)
    p.add_argument("--upper", type=float, default=50.0)
    p.add_argument("--tol", type=float)

    p = leaf(sub, "heat", cmd_heat, "heat semigroup from a vertex indicator", True)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--initial", required=True, help="vertex carrying the initial unit value")
    p.add_argument("--h", type=float)
    p.add_argument("--all-nodes", action="store_true", help="include interior mesh nodes")

    walk = sub.add_parser("walk", help="random walks").add_subparsers(
        dest="action", required=True, parser_class=_Parser)
    for name, func in (("dp", cmd_walk_dp), ("mc", cmd_walk_mc)):
        p = leaf(walk, name, func, f"walk {name}", optional_input=True)
        p.add_argument("--group")
        p.add_argument("--radius", type=int)
        p.add_argument("--origin")
        p.add_argument("--boundary", help="comma-separated boundary vertices")
        if name == "dp":
            p.add_argument("--n-max", type=int, required=True)
        else:
            p.add_argument("--steps", type=int, required=True)
            p.add_argument("--trials", type=int, required=True)

    cayley = sub.add_parser("cayley", help="Cayley graphs").add_subparsers(
        dest="action", required=True, parser_class=_Parser)
    p = leaf(cayley, "generate", cmd_cayley_generate, "word-metric ball")
    p.add_argument("--group", required=True)
    p.add_argument("--radius", type=int, required=True)
    p.add_argument("--cable", action="store_true", help="emit the unit equilateral cable system")
    p.add_argument("--boundary-out", help="write origin and boundary vertices here")
    p = leaf(cayley, "growth", cmd_cayley_growth, "growth function")
    p.add_argument("--group", required=True)
    p.add_argument("--radius", type=int, required=True)
    p.add_argument("--window", help="lo,hi for the log-log fit")
    p = leaf(cayley, "classify", cmd_cayley_classify, "recurrence classification")
    p.add_argument("--group", required=True)

    rec = sub.add_parser("recurrence", help="recurrence diagnostics").add_subparsers(
        dest="action", required=True, parser_class=_Parser)
    p = leaf(rec, "indicator", cmd_recurrence_indicator, "Green's-function indicator")
    p.add_argument("--group", required=True)
    p.add_argument("--n-max", type=int, required=True)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p = leaf(rec, "volume-test", cmd_recurrence_volume, "volume-growth integral",
             optional_input=True)
    p.add_argument("--group")
    p.add_argument("--radius", type=int, help="truncation radius for --group")
    p.add_argument("--center")
    p.add_argument("--boundary", help="comma-separated truncation boundary for --in")
    p.add_argument("--r-max", type=float, required=True)
    p.add_argument("--dr", type=float, required=True)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p = leaf(rec, "ultrafit", cmd_recurrence_ultrafit, "on-diagonal decay fit")
    p.add_argument("--group", required=True)
    p.add_argument("--n-max", type=int, required=True)
    p = leaf(rec, "weight-check", cmd_recurrence_weights, "sup/inf of nu/|e| on a Cayley cable system")
    p.add_argument("--group", required=True)
    p.add_argument("--radius", type=int, required=True)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        msg = str(exc)
        if "invalid choice" in msg:
            print(f"cablekit: unknown subcommand: {msg}", file=sys.stderr)
        else:
            print(f"cablekit: usage error: {msg}", file=sys.stderr)
        return EXIT_USAGE
    code = EXIT_OK
    try:
        _require(1 <= args.digits <= 17, "--digits must lie in [1, 17]")
        result = args.func(args)
        if isinstance(result, tuple):
            result, code = result
    except MalformedInputError as exc:
        print(f"cablekit: malformed input: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ParameterError as exc:
        print(f"cablekit: parameter out of range: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (GraphValidationError, IntrinsicWeightError) as exc:
        print(f"cablekit: validation failed: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except TruncationError as exc:
        print(f"cablekit: truncation too small: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CapacityError as exc:
        print(f"cablekit: capacity exceeded: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, KeyError) as exc:
        print(f"cablekit: parameter out of range: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(result)
    else:
        sys.stdout.write(result)
    return code


if __name__ == "__main__":
    sys.exit(main())
