"""JSON interchange for graphs and models, CSV tables, canonical JSON."""

from __future__ import annotations

import io
import json
import math
from typing import Any, Iterable, Sequence

from .graph import DiscreteGraph, MetricEdge, MetricGraphModel

CSV_DIGITS = 17
CANONICAL_DIGITS = 12


class MalformedInputError(ValueError):
    """Input text is not a well-formed graph document."""


def _check_keys(obj, allowed: set, required: set, where: str):
    if not isinstance(obj, dict):
        raise MalformedInputError(f"{where}: expected an object, got {type(obj).__name__}")
    unknown = set(obj) - allowed
    if unknown:
        raise MalformedInputError(f"{where}: unknown keys {sorted(unknown)}")
    missing = required - set(obj)
    if missing:
        raise MalformedInputError(f"{where}: missing keys {sorted(missing)}")


def _vertex_id(x, where: str):
    if isinstance(x, bool) or not isinstance(x, (int, str)):
        raise MalformedInputError(f"{where}: vertex ids must be strings or integers, got {x!r}")
    return x


def _number(x, where: str) -> float:
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise MalformedInputError(f"{where}: expected a number, got {x!r}")
    return float(x)


def graph_from_obj(doc: Any) -> DiscreteGraph | MetricGraphModel:
    """Parse a decoded JSON document.

    Structural problems (unknown keys, wrong types, duplicate ids) raise
    MalformedInputError; numeric and connectivity conditions are left to
    the validators.
    """
    if not isinstance(doc, dict) or "type" not in doc:
        raise MalformedInputError("document must be an object with a 'type' field")
    kind = doc["type"]
    if kind == "discrete":
        _check_keys(doc, {"type", "vertices", "edges"}, {"type", "vertices", "edges"}, "graph")
        vertices, m = [], {}
        for i, item in enumerate(doc["vertices"]):
            _check_keys(item, {"id", "m"}, {"id", "m"}, f"vertices[{i}]")
            v = _vertex_id(item["id"], f"vertices[{i}]")
            if v in m:
                raise MalformedInputError(f"duplicate vertex id {v!r}")
            vertices.append(v)
            m[v] = _number(item["m"], f"vertices[{i}].m")
        seen, edges = set(), []
        for i, item in enumerate(doc["edges"]):
            _check_keys(item, {"u", "v", "b"}, {"u", "v", "b"}, f"edges[{i}]")
            u = _vertex_id(item["u"], f"edges[{i}].u")
            v = _vertex_id(item["v"], f"edges[{i}].v")
            key = frozenset((u, v))
            if key in seen:
                raise MalformedInputError(f"duplicate edge between {u!r} and {v!r}")
            seen.add(key)
            edges.append((u, v, _number(item["b"], f"edges[{i}].b")))
        return DiscreteGraph.from_edges(vertices, m, edges)
    if kind == "metric":
        _check_keys(doc, {"type", "vertices", "edges", "provenance"},
                    {"type", "vertices", "edges"}, "model")
        vertices = [_vertex_id(v, f"vertices[{i}]") for i, v in enumerate(doc["vertices"])]
        if len(set(vertices)) != len(vertices):
            raise MalformedInputError("duplicate vertex id")
        edges, ids = [], set()
        for i, item in enumerate(doc["edges"]):
            _check_keys(item, {"id", "u", "v", "length", "mu", "nu"},
                        {"id", "u", "v", "length"}, f"edges[{i}]")
            eid = _vertex_id(item["id"], f"edges[{i}].id")
            if eid in ids:
                raise MalformedInputError(f"duplicate edge id {eid!r}")
            ids.add(eid)
            edges.append(MetricEdge(
                eid, _vertex_id(item["u"], f"edges[{i}].u"), _vertex_id(item["v"], f"edges[{i}].v"),
                _number(item["length"], f"edges[{i}].length"),
                _number(item.get("mu", 1.0), f"edges[{i}].mu"),
                _number(item.get("nu", 1.0), f"edges[{i}].nu")))
        prov = doc.get("provenance")
        if prov is not None and not isinstance(prov, dict):
            raise MalformedInputError("provenance must be an object")
        return MetricGraphModel(vertices, edges, provenance=prov)
    raise MalformedInputError(f"unknown graph type {kind!r}")


def loads_graph(text: str):
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedInputError(f"invalid JSON: {exc}") from None
    return graph_from_obj(doc)


def read_graph(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise MalformedInputError(f"cannot read {path}: {exc.strerror}") from None
    return loads_graph(text)


def graph_to_obj(g) -> dict:
    if isinstance(g, DiscreteGraph):
        return {
            "type": "discrete",
            "vertices": [{"id": v, "m": g.m[v]} for v in g.vertices],
            "edges": [{"u": u, "v": v, "b": w} for u, v, w in g.pairs()],
        }
    doc = {
        "type": "metric",
        "vertices": list(g.vertices),
        "edges": [{"id": e.id, "u": e.u, "v": e.v, "length": e.length, "mu": e.mu, "nu": e.nu}
                  for e in g.edges],
    }
    if g.provenance is not None:
        doc["provenance"] = _plain(g.provenance)
    return doc


def _plain(x):
    if isinstance(x, dict) or hasattr(x, "items"):
        return {k: _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    return x


def dumps_json(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, ensure_ascii=False, allow_nan=False) + "\n"


def _jsonable(x):
    """Convert numpy scalars/arrays and non-finite floats for JSON output."""
    if hasattr(x, "tolist"):
        x = x.tolist()
    if isinstance(x, dict) or hasattr(x, "items"):
        return {str(k) if not isinstance(k, str) else k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, set, frozenset)):
        items = [_jsonable(v) for v in x]
        if isinstance(x, (set, frozenset)):
            items.sort(key=lambda t: json.dumps(t, sort_keys=True))
        return items
    if isinstance(x, float) and not math.isfinite(x):
        return "inf" if x > 0 else ("-inf" if x < 0 else "nan")
    return x


def _round_sig(x: float, digits: int) -> float:
    if x == 0 or not math.isfinite(x):
        return x
    r = float(f"{x:.{digits}g}")
    return 0.0 if r == 0 else r


def canonicalize(obj, digits=CANONICAL_DIGITS):
    """Round floats to ``digits`` significant digits and order lists of records."""
    if isinstance(obj, dict):
        return {k: canonicalize(v, digits) for k, v in sorted(obj.items())}
    if isinstance(obj, list):
        items = [canonicalize(v, digits) for v in obj]
        if items and all(isinstance(v, dict) for v in items):
            items.sort(key=lambda t: json.dumps(t, sort_keys=True))
        return items
    if isinstance(obj, float):
        return _round_sig(obj, digits)
    return obj


def canonical_json(obj, digits=CANONICAL_DIGITS) -> str:
    if isinstance(obj, (DiscreteGraph, MetricGraphModel)):
        obj = graph_to_obj(obj)
    return json.dumps(canonicalize(_jsonable(obj), digits), sort_keys=True,
                      separators=(",", ":"), ensure_ascii=False)


def format_number(x, digits=CSV_DIGITS) -> str:
    if hasattr(x, "item"):
        x = x.item()
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        return str(x)
    if isinstance(x, int):
        return str(x)
    if not math.isfinite(x):
        return "inf" if x > 0 else ("-inf" if x < 0 else "nan")
    return f"{x:.{digits}g}"


def dumps_csv(header: Sequence[str], rows: Iterable[Sequence], *, op: str,
              params: dict | None = None, digits=CSV_DIGITS) -> str:
    """CSV text with a ``# op=... key=value`` comment line and a column header."""
    out = io.StringIO()
    meta = " ".join(f"{k}={_param_text(v)}" for k, v in (params or {}).items())
    out.write(f"# op={op}" + (f" {meta}" if meta else "") + "\n")
    out.write(",".join(header) + "\n")
    for row in rows:
        out.write(",".join(_csv_cell(c, digits) for c in row) + "\n")
    return out.getvalue()


def _param_text(v) -> str:
    if isinstance(v, (list, tuple)):
        return ";".join(_param_text(x) for x in v)
    if isinstance(v, float):
        return repr(v)
    return str(v).replace(" ", "_")


def _csv_cell(c, digits) -> str:
    text = format_number(c, digits)
    if any(ch in text for ch in ',"\n'):
        return '"' + text.replace('"', '""') + '"'
    return text
