"""The shape computational graph: node specs, build-time validation, ordering.

A graph is a DAG of operation nodes whose edges carry shapes rather than
data.  Building validates structure eagerly (duplicate ids, dangling input
references, arity, attributes, cycles) so that execution can assume a well
formed graph.  Execution order is a deterministic topological sort of the
minimal ancestor-closed subgraph of the requested fetch nodes.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping, Sequence

from . import ops
from .shapes import Shape


class GraphError(Exception):
    """A graph could not be built or traversed."""


class CycleError(GraphError):
    def __init__(self, node_id: str):
        super().__init__(f"graph contains a cycle through node {node_id!r}")
        self.node_id = node_id


class ReferenceError(GraphError):  # noqa: A001 - deliberate, scoped to graphs
    def __init__(self, node_id: str, context: str):
        super().__init__(f"{context} references unknown node {node_id!r}")
        self.node_id = node_id


class ArityError(GraphError):
    def __init__(self, node_id: str, op: str, expected: "int | str", got: int):
        super().__init__(
            f"node {node_id!r} (op {op!r}) expects {expected} input(s), got {got}"
        )
        self.node_id = node_id


class StructureError(GraphError):
    """Duplicate ids, malformed attributes, misplaced shape fields and the like."""


@dataclass(frozen=True)
class NodeSpec:
    """One operation node: id, op kind, input edges, attributes, declared shape."""

    id: str
    op: str
    inputs: tuple[str, ...] = ()
    attrs: Mapping[str, Any] = field(default_factory=dict)
    shape: Shape | None = None


@dataclass(frozen=True)
class ShapeGraph:
    """A validated DAG of node specs, keyed by id in declaration order."""

    nodes: Mapping[str, NodeSpec]

    def node(self, node_id: str) -> NodeSpec:
        return self.nodes[node_id]

    @property
    def variable_ids(self) -> tuple[str, ...]:
        return tuple(n.id for n in self.nodes.values() if n.op == "variable")

    @property
    def placeholder_ids(self) -> tuple[str, ...]:
        return tuple(n.id for n in self.nodes.values() if n.op == "placeholder")


def _check_node(node: NodeSpec, nodes: Mapping[str, NodeSpec]) -> None:
    spec = ops.REGISTRY.get(node.op)
    if spec is None:
        raise StructureError(f"node {node.id!r}: unknown op kind {node.op!r}")

    for inp in node.inputs:
        if inp not in nodes:
            raise ReferenceError(inp, f"node {node.id!r}")

    if spec.arity is None:
        if len(node.inputs) < 1:
            raise ArityError(node.id, node.op, "at least 1", len(node.inputs))
    elif len(node.inputs) != spec.arity:
        raise ArityError(node.id, node.op, spec.arity, len(node.inputs))

    attr_errors = ops.validate_attrs(node.op, node.attrs)
    if attr_errors:
        raise StructureError(f"node {node.id!r}: " + "; ".join(attr_errors))

    if node.shape is not None and not spec.takes_shape_field:
        raise StructureError(f"node {node.id!r}: op {node.op!r} does not take a shape")
    if node.shape is not None and node.shape.is_bottom:
        raise StructureError(f"node {node.id!r}: declared shape cannot be bottom")
    if node.op in ("placeholder", "variable", "set_shape") and node.shape is None:
        raise StructureError(f"node {node.id!r}: op {node.op!r} requires a shape")
    if node.op == "constant":
        has_value = "value" in node.attrs
        if has_value == (node.shape is not None):
            raise StructureError(
                f"node {node.id!r}: constant needs exactly one of a shape or a value"
            )
    if node.op == "assign" and nodes[node.inputs[0]].op != "variable":
        raise StructureError(
            f"node {node.id!r}: assign target {node.inputs[0]!r} is not a variable"
        )


def _find_cycle_node(remaining: set[str], nodes: Mapping[str, NodeSpec]) -> str:
    # iterative DFS over the unsorted residue; the first node revisited while
    # still on the stack lies on a cycle
    for start in sorted(remaining):
        on_stack: set[str] = set()
        done: set[str] = set()
        stack: list[tuple[str, int]] = [(start, 0)]
        while stack:
            node_id, idx = stack.pop()
            if idx == 0:
                on_stack.add(node_id)
            inputs = [i for i in nodes[node_id].inputs if i in remaining]
            if idx < len(inputs):
                stack.append((node_id, idx + 1))
                nxt = inputs[idx]
                if nxt in on_stack:
                    return nxt
                if nxt not in done:
                    stack.append((nxt, 0))
            else:
                on_stack.discard(node_id)
                done.add(node_id)
    return sorted(remaining)[0]  # unreachable in practice


def build_graph(specs: Iterable[NodeSpec]) -> ShapeGraph:
    """Validate node specs into a graph, or raise a structured GraphError."""
    nodes: dict[str, NodeSpec] = {}
    for spec in specs:
        if spec.id in nodes:
            raise StructureError(f"duplicate node id {spec.id!r}")
        nodes[spec.id] = spec

    for node in nodes.values():
        _check_node(node, nodes)

    # Kahn's algorithm purely to prove acyclicity
    out_edges: dict[str, list[str]] = {i: [] for i in nodes}
    indegree = {i: len(n.inputs) for i, n in nodes.items()}
    for node in nodes.values():
        for inp in node.inputs:
            out_edges[inp].append(node.id)
    ready = [i for i, d in indegree.items() if d == 0]
    seen = 0
    while ready:
        cur = ready.pop()
        seen += 1
        for succ in out_edges[cur]:
            indegree[succ] -= 1
            if indegree[succ] == 0:
                ready.append(succ)
    if seen != len(nodes):
        remaining = {i for i, d in indegree.items() if d > 0}
        raise CycleError(_find_cycle_node(remaining, nodes))

    return ShapeGraph(nodes)


def ancestors(g: ShapeGraph, fetches: Sequence[str]) -> set[str]:
    """Reflexive transitive input-closure of the fetch set."""
    closure: set[str] = set()
    stack = list(fetches)
    while stack:
        node_id = stack.pop()
        if node_id in closure:
            continue
        closure.add(node_id)
        stack.extend(g.nodes[node_id].inputs)
    return closure


def topo_order(g: ShapeGraph, fetches: Sequence[str]) -> list[str]:
    """Evaluation order for the minimal subgraph that feeds the fetches.

    Every node appears after all of its inputs; among ready nodes the
    lexicographically smallest id goes first, so the order is deterministic.
    """
    for f in fetches:
        if f not in g.nodes:
            raise ReferenceError(f, "fetch list")
    closure = ancestors(g, fetches)
    indegree = {i: 0 for i in closure}
    out_edges: dict[str, list[str]] = {i: [] for i in closure}
    for node_id in closure:
        for inp in g.nodes[node_id].inputs:
            indegree[node_id] += 1
            out_edges[inp].append(node_id)
    heap = [i for i, d in indegree.items() if d == 0]
    heapq.heapify(heap)
    order: list[str] = []
    while heap:
        cur = heapq.heappop(heap)
        order.append(cur)
        for succ in sorted(out_edges[cur]):
            indegree[succ] -= 1
            if indegree[succ] == 0:
                heapq.heappush(heap, succ)
    return order
