"""The JSON graph IR: parsing, validation, canonical serialization.

Document layout (version 1)::

    {
      "version": 1,
      "graphs": {
        "main": [
          {"id": "x",  "op": "placeholder", "shape": [null, 784]},
          {"id": "w",  "op": "constant",    "shape": [784, 10]},
          {"id": "mm", "op": "matmul", "inputs": ["x", "w"]}
        ]
      },
      "runs": [
        {"graph": "main", "fetches": ["mm"],
         "feeds": [{"x": [100, 784]}], "repeat": 1}
      ]
    }

Shape literals are lists of non-negative integers with ``null`` for an
unknown extent, or the string ``"?"`` for a shape of unknown rank.  Feeds
may bind placeholders only.  All structural problems are reported with a
JSON-path-like location.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Mapping

from . import graph as graph_mod
from . import ops
from .graph import NodeSpec, ShapeGraph
from .session import FeedSet
from .shapes import Shape, from_literal, to_literal

IR_VERSION = 1


class IRError(Exception):
    """Base for IR-level failures; carries a document location."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path
        self.message = message


class ParseError(IRError):
    """The document is not valid JSON or not an object."""


class SchemaError(IRError):
    """The document violates the IR schema (ops, attrs, shape literals, runs)."""


class GraphError(IRError):
    """The node list of some graph failed structural graph validation."""


@dataclass(frozen=True)
class RunPlan:
    """One execution request: a graph, fetches, a feed cycle, a repeat count."""

    graph: str
    fetches: tuple[str, ...]
    feeds: tuple[FeedSet, ...] = ()
    repeat: int = 1


@dataclass
class ProgramIR:
    """A parsed, fully validated IR document."""

    version: int
    graphs: dict[str, tuple[NodeSpec, ...]]
    runs: tuple[RunPlan, ...]
    built: dict[str, ShapeGraph] = field(default_factory=dict, compare=False, repr=False)

    def graph_of(self, name: str) -> ShapeGraph:
        if name not in self.built:
            self.built[name] = graph_mod.build_graph(self.graphs[name])
        return self.built[name]


def _require(cond: bool, path: str, message: str) -> None:
    if not cond:
        raise SchemaError(path, message)


def _shape_at(lit: object, path: str) -> Shape:
    try:
        return from_literal(lit)
    except ValueError as e:
        raise SchemaError(path, str(e)) from None


def _parse_node(obj: object, path: str) -> NodeSpec:
    _require(isinstance(obj, dict), path, "node must be an object")
    assert isinstance(obj, dict)
    unknown = set(obj) - {"id", "op", "inputs", "attrs", "shape"}
    _require(not unknown, path, f"unknown node field(s): {sorted(unknown)}")

    node_id = obj.get("id")
    _require(isinstance(node_id, str) and node_id != "", f"{path}.id",
             "node id must be a non-empty string")
    op = obj.get("op")
    _require(isinstance(op, str), f"{path}.op", "op must be a string")
    _require(op in ops.REGISTRY, f"{path}.op", f"unknown op kind {op!r}")

    inputs = obj.get("inputs", [])
    _require(isinstance(inputs, list) and all(isinstance(i, str) for i in inputs),
             f"{path}.inputs", "inputs must be a list of node ids")

    attrs = obj.get("attrs", {})
    _require(isinstance(attrs, dict), f"{path}.attrs", "attrs must be an object")
    errors = ops.validate_attrs(op, attrs)
    _require(not errors, f"{path}.attrs", "; ".join(errors))

    shape = None
    if "shape" in obj:
        shape = _shape_at(obj["shape"], f"{path}.shape")

    return NodeSpec(id=node_id, op=op, inputs=tuple(inputs), attrs=attrs, shape=shape)


def _parse_run(obj: object, path: str, graphs: dict[str, tuple[NodeSpec, ...]]) -> RunPlan:
    _require(isinstance(obj, dict), path, "run must be an object")
    assert isinstance(obj, dict)
    unknown = set(obj) - {"graph", "fetches", "feeds", "repeat"}
    _require(not unknown, path, f"unknown run field(s): {sorted(unknown)}")

    graph_name = obj.get("graph")
    _require(isinstance(graph_name, str), f"{path}.graph", "graph must be a string")
    _require(graph_name in graphs, f"{path}.graph", f"unknown graph {graph_name!r}")
    node_by_id = {n.id: n for n in graphs[graph_name]}

    fetches = obj.get("fetches")
    _require(isinstance(fetches, list) and fetches, f"{path}.fetches",
             "fetches must be a non-empty list")
    assert isinstance(fetches, list)
    for i, f in enumerate(fetches):
        _require(isinstance(f, str) and f in node_by_id, f"{path}.fetches[{i}]",
                 f"fetch {f!r} is not a node of graph {graph_name!r}")

    feeds_obj = obj.get("feeds", [])
    _require(isinstance(feeds_obj, list), f"{path}.feeds", "feeds must be a list")
    feeds = []
    for i, feed in enumerate(feeds_obj):
        _require(isinstance(feed, dict), f"{path}.feeds[{i}]", "feed must be an object")
        bindings = {}
        for key, lit in feed.items():
            node = node_by_id.get(key)
            _require(node is not None and node.op == "placeholder",
                     f"{path}.feeds[{i}].{key}",
                     f"feeds may only bind placeholders; {key!r} is not one")
            bindings[key] = _shape_at(lit, f"{path}.feeds[{i}].{key}")
        feeds.append(FeedSet(bindings))

    repeat = obj.get("repeat", 1)
    _require(isinstance(repeat, int) and not isinstance(repeat, bool) and repeat >= 1,
             f"{path}.repeat", "repeat must be a positive integer")

    return RunPlan(graph=graph_name, fetches=tuple(fetches),
                   feeds=tuple(feeds), repeat=repeat)


def parse_ir(text: "str | bytes") -> ProgramIR:
    """Parse and fully validate an IR document.

    Raises ParseError for malformed JSON, SchemaError for schema violations
    (with a JSON-path location), and GraphError when a graph's node list is
    structurally invalid (dangling inputs, bad arity, cycles, ...).
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError("", f"malformed JSON: {e}") from None
    if not isinstance(doc, dict):
        raise ParseError("", "IR document must be a JSON object")

    unknown = set(doc) - {"version", "graphs", "runs"}
    _require(not unknown, "", f"unknown top-level field(s): {sorted(unknown)}")
    _require(doc.get("version") == IR_VERSION, "version",
             f"version must be {IR_VERSION}")

    graphs_obj = doc.get("graphs")
    _require(isinstance(graphs_obj, dict) and graphs_obj, "graphs",
             "graphs must be a non-empty object")
    assert isinstance(graphs_obj, dict)
    graphs: dict[str, tuple[NodeSpec, ...]] = {}
    for name, node_list in graphs_obj.items():
        gpath = f"graphs.{name}"
        _require(isinstance(node_list, list), gpath, "graph must be a list of nodes")
        graphs[name] = tuple(
            _parse_node(n, f"{gpath}[{i}]") for i, n in enumerate(node_list)
        )

    runs_obj = doc.get("runs", [])
    _require(isinstance(runs_obj, list), "runs", "runs must be a list")
    runs = tuple(_parse_run(r, f"runs[{i}]", graphs) for i, r in enumerate(runs_obj))

    ir = ProgramIR(version=IR_VERSION, graphs=graphs, runs=runs)
    for name in graphs:
        try:
            ir.graph_of(name)
        except graph_mod.GraphError as e:
            raise GraphError(f"graphs.{name}", str(e)) from None
    return ir


def _node_to_json(node: NodeSpec) -> dict[str, Any]:
    out: dict[str, Any] = {"id": node.id, "op": node.op}
    if node.inputs:
        out["inputs"] = list(node.inputs)
    if node.attrs:
        out["attrs"] = {k: node.attrs[k] for k in sorted(node.attrs)}
    if node.shape is not None:
        out["shape"] = to_literal(node.shape)
    return out


def _run_to_json(plan: RunPlan) -> dict[str, Any]:
    out: dict[str, Any] = {"graph": plan.graph, "fetches": list(plan.fetches)}
    if plan.feeds:
        out["feeds"] = [
            {k: to_literal(s) for k, s in sorted(f.bindings.items())}
            for f in plan.feeds
        ]
    if plan.repeat != 1:
        out["repeat"] = plan.repeat
    return out


def to_json_dict(ir: ProgramIR) -> dict[str, Any]:
    return {
        "version": ir.version,
        "graphs": {name: [_node_to_json(n) for n in nodes]
                   for name, nodes in ir.graphs.items()},
        "runs": [_run_to_json(r) for r in ir.runs],
    }


def serialize_ir(ir: ProgramIR) -> str:
    """Canonical text form: fixed field order, defaults omitted, 2-space indent."""
    return json.dumps(to_json_dict(ir), indent=2) + "\n"


def feed_to_shapes(feed: Mapping[str, object]) -> FeedSet:
    """Build a FeedSet from raw shape literals (used by tests and the service)."""
    return FeedSet({k: from_literal(v) for k, v in feed.items()})
