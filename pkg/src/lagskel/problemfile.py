"""JSON problem files with exact numerics.

Numbers may be JSON numbers or strings ("0.3", "-7/2"); both are read
without rounding.  A minimal file::

    {
      "version": 1,
      "nodes": [["0", "1"], ["0", "1"]],
      "edges": [[0, 1, ["0", "0", "0", "0"]]],
      "constraints": [
        {"name": "h1", "node_coeffs": ["1", "-1"]},
        {"name": "h2", "builder": "boundary", "edge_coeff": "2"}
      ],
      "box": [["-2", "2"], ["-2", "2"]]
    }

Each constraint may set ``edge_coeff``, ``offset`` and ``target``
(default 0).  ``node_coeffs`` is a list or ``"all_ones"``; ``builder``
``"size"`` means all ones and ``"boundary"`` means zero node coefficients
with edge coefficient 1 unless given.  An optional ``"grid": {"rows": R,
"cols": C}`` marks the nodes as pixels.
"""
from __future__ import annotations

import json
from fractions import Fraction

from .energy import ConstraintSpec, Edge, LagrangianProblem, PairwiseEnergy
from .errors import ParseError

SCHEMA_VERSION = 1


def _number(value, where):
    if isinstance(value, bool):
        raise ParseError(f"{where}: expected a number, got a boolean")
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except ValueError:
            raise ParseError(f"{where}: {value!r} is not a rational number") from None
    raise ParseError(f"{where}: expected a number, got {type(value).__name__}")


def _list(value, where, length=None):
    if not isinstance(value, list):
        raise ParseError(f"{where}: expected a list")
    if length is not None and len(value) != length:
        raise ParseError(f"{where}: expected {length} entries, got {len(value)}")
    return value


def _index(value, n, where):
    if isinstance(value, bool) or not isinstance(value, int):
        raise ParseError(f"{where}: node index must be an integer")
    if not 0 <= value < n:
        raise ParseError(f"{where}: node {value} out of range 0..{n - 1}")
    return value


def loads(text: str):
    """Parse a problem file; returns (LagrangianProblem, metadata dict)."""
    try:
        doc = json.loads(text, parse_float=Fraction)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno, exc.colno) from None
    if not isinstance(doc, dict):
        raise ParseError("top level must be an object", 1, 1)
    if "version" not in doc:
        raise ParseError("missing 'version'")
    if doc["version"] != SCHEMA_VERSION:
        raise ParseError(f"unsupported version {doc['version']!r}; expected {SCHEMA_VERSION}")

    nodes = _list(doc.get("nodes"), "nodes")
    unary = tuple(tuple(_number(v, f"nodes[{i}][{k}]") for k, v in enumerate(_list(p, f"nodes[{i}]", 2)))
                  for i, p in enumerate(nodes))
    n = len(unary)
    edges = []
    for k, e in enumerate(_list(doc.get("edges", []), "edges")):
        e = _list(e, f"edges[{k}]", 3)
        u, v = _index(e[0], n, f"edges[{k}][0]"), _index(e[1], n, f"edges[{k}][1]")
        table = tuple(_number(t, f"edges[{k}][2][{j}]") for j, t in enumerate(_list(e[2], f"edges[{k}][2]", 4)))
        edges.append(Edge(u, v, table))
    constant = _number(doc.get("constant", 0), "constant")
    try:
        f = PairwiseEnergy(n, unary, tuple(edges), constant)
    except ValueError as exc:
        raise ParseError(str(exc)) from None

    raw = _list(doc.get("constraints"), "constraints")
    if not raw:
        raise ParseError("constraints: at least one constraint is required")
    specs, targets = [], []
    for k, c in enumerate(raw):
        where = f"constraints[{k}]"
        if not isinstance(c, dict):
            raise ParseError(f"{where}: expected an object")
        builder = c.get("builder")
        if builder not in (None, "size", "boundary"):
            raise ParseError(f"{where}.builder: unknown builder {builder!r}")
        coeffs = c.get("node_coeffs")
        if coeffs is None:
            coeffs = "all_ones" if builder == "size" else [0] * n
        if coeffs == "all_ones":
            coeffs = [1] * n
        coeffs = tuple(_number(a, f"{where}.node_coeffs[{i}]")
                       for i, a in enumerate(_list(coeffs, f"{where}.node_coeffs", n)))
        w = _number(c.get("edge_coeff", 1 if builder == "boundary" else 0), f"{where}.edge_coeff")
        offset = _number(c.get("offset", 0), f"{where}.offset")
        targets.append(_number(c.get("target", 0), f"{where}.target"))
        name = c.get("name", builder or f"h{k + 1}")
        try:
            specs.append(ConstraintSpec(coeffs, w, offset, str(name)))
        except ValueError as exc:
            raise ParseError(f"{where}: {exc}") from None

    box = []
    for k, iv in enumerate(_list(doc.get("box"), "box", len(specs))):
        iv = _list(iv, f"box[{k}]", 2)
        box.append((_number(iv[0], f"box[{k}][0]"), _number(iv[1], f"box[{k}][1]")))
    try:
        problem = LagrangianProblem(f, tuple(specs), tuple(box), tuple(targets))
    except ValueError as exc:
        raise ParseError(str(exc)) from None

    meta = {}
    grid = doc.get("grid")
    if grid is not None:
        if not isinstance(grid, dict) or grid.get("rows", 0) * grid.get("cols", 0) != n:
            raise ParseError("grid: rows * cols must equal the node count")
        meta["grid"] = (grid["rows"], grid["cols"])
    return problem, meta


def load(path):
    with open(path) as fh:
        return loads(fh.read())


def dumps(problem: LagrangianProblem, meta=None) -> str:
    """Serialize with every number as an exact string."""
    f = problem.f
    doc = {
        "version": SCHEMA_VERSION,
        "nodes": [[str(a), str(b)] for a, b in f.unary],
        "edges": [[e.u, e.v, [str(t) for t in e.table]] for e in f.edges],
        "constant": str(f.constant),
        "constraints": [
            {"name": h.name, "node_coeffs": [str(a) for a in h.node_coeffs],
             "edge_coeff": str(h.edge_coeff), "offset": str(h.offset), "target": str(b)}
            for h, b in zip(problem.constraints, problem.b)],
        "box": [[str(lo), str(hi)] for lo, hi in problem.box],
    }
    if meta and "grid" in meta:
        doc["grid"] = {"rows": meta["grid"][0], "cols": meta["grid"][1]}
    parts = []
    for key, value in doc.items():
        if isinstance(value, list) and value:
            items = ",\n".join("  " + json.dumps(v) for v in value)
            parts.append(f" {json.dumps(key)}: [\n{items}\n ]")
        else:
            parts.append(f" {json.dumps(key)}: {json.dumps(value)}")
    return "{\n" + ",\n".join(parts) + "\n}\n"
