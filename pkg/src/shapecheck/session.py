"""Session semantics: feed placeholders, evaluate transfers, carry variables.

A run binds fed shapes to placeholders (by meet with the declared shape),
evaluates every ancestor of the fetch nodes in topological order, and stops
at the first conflict, which it reports as a :class:`Diagnostic`.  Variables
are the only mutable state: their shapes live in the session and survive
across runs, so a shape bug can surface on the second or a later iteration
of a feed loop even though each individual run is deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Mapping, Sequence

from . import ops
from .graph import ShapeGraph, topo_order
from .shapes import BOTTOM, Shape, format_shape, meet


class DiagnosticKind(str, Enum):
    SHAPE_MISMATCH = "ShapeMismatch"
    UNBOUND_PLACEHOLDER = "UnboundPlaceholder"
    ILLEGAL_ATTRIBUTE = "IllegalAttribute"


@dataclass(frozen=True)
class Diagnostic:
    """A detected shape error: where, what, and on which iteration."""

    node_id: str
    op: str
    input_shapes: tuple[Shape, ...]
    iteration: int
    kind: DiagnosticKind
    message: str


@dataclass(frozen=True)
class FeedSet:
    """Shapes of the data a run feeds into placeholders, keyed by node id."""

    bindings: Mapping[str, Shape]

    @staticmethod
    def of(**bindings: Shape) -> "FeedSet":
        return FeedSet(bindings)


EMPTY_FEED = FeedSet({})


@dataclass
class SessionState:
    """Mutable per-session state: current variable shapes and the iteration counter."""

    graph: ShapeGraph
    var_shapes: dict[str, Shape] = field(default_factory=dict)
    iteration: int = 1

    @classmethod
    def for_graph(cls, graph: ShapeGraph) -> "SessionState":
        shapes: dict[str, Shape] = {}
        for node_id in graph.variable_ids:
            declared = graph.node(node_id).shape
            assert declared is not None  # enforced at build time
            shapes[node_id] = declared
        return cls(graph=graph, var_shapes=shapes)


@dataclass(frozen=True)
class RunResult:
    """Shapes of every node evaluated so far plus the aborting diagnostic, if any."""

    shapes: dict[str, Shape]
    diagnostic: Diagnostic | None = None

    @property
    def ok(self) -> bool:
        return self.diagnostic is None


@dataclass(frozen=True)
class LoopResult:
    diagnostic: Diagnostic | None
    iterations: int

    @property
    def ok(self) -> bool:
        return self.diagnostic is None


def _mismatch(node, shapes: Sequence[Shape], iteration: int, reason: str,
              kind: DiagnosticKind = DiagnosticKind.SHAPE_MISMATCH) -> Diagnostic:
    rendered = ", ".join(format_shape(s) for s in shapes)
    message = (
        f"node {node.id!r} ({node.op}): {reason}; "
        f"input shapes: {rendered or '(none)'}; iteration {iteration}"
    )
    return Diagnostic(node.id, node.op, tuple(shapes), iteration, kind, message)


def run(state: SessionState, fetches: Sequence[str], feed: FeedSet) -> RunResult:
    """Evaluate the fetches' ancestor closure once under one feed binding.

    Returns the abstract shape of every evaluated node, or the diagnostic
    for the first node whose evaluation conflicts.  On success the session's
    iteration counter advances and assign nodes have updated the variable
    shapes; an aborted run leaves the counter where it was.
    """
    graph = state.graph
    order = topo_order(graph, fetches)
    it = state.iteration
    shapes: dict[str, Shape] = {}

    for node_id in order:
        node = graph.node(node_id)

        if node.op == "placeholder":
            declared = node.shape
            assert declared is not None
            if node_id not in feed.bindings:
                return RunResult(shapes, _mismatch(
                    node, [declared], it,
                    "placeholder is reachable from the fetches but was not fed",
                    DiagnosticKind.UNBOUND_PLACEHOLDER))
            fed = feed.bindings[node_id]
            bound = meet(declared, fed)
            if bound.is_bottom:
                return RunResult(shapes, _mismatch(
                    node, [declared, fed], it,
                    f"fed shape {format_shape(fed)} conflicts with declared shape "
                    f"{format_shape(declared)}"))
            shapes[node_id] = bound
            continue

        if node.op == "constant":
            if node.shape is not None:
                shapes[node_id] = node.shape
            else:
                shapes[node_id] = Shape.ranked(ops.literal_shape(node.attrs["value"]))
            continue

        if node.op == "variable":
            shapes[node_id] = state.var_shapes[node_id]
            continue

        if node.op == "set_shape":
            current = shapes[node.inputs[0]]
            asserted = node.shape
            assert asserted is not None
            refined = meet(current, asserted)
            if refined.is_bottom:
                return RunResult(shapes, _mismatch(
                    node, [current, asserted], it,
                    f"re-asserted shape {format_shape(asserted)} conflicts with the "
                    f"already established shape {format_shape(current)}",
                    DiagnosticKind.ILLEGAL_ATTRIBUTE))
            shapes[node_id] = refined
            continue

        if node.op == "assign":
            target = node.inputs[0]
            current = state.var_shapes[target]
            value = shapes[node.inputs[1]]
            if node.attrs.get("validate", True):
                merged = meet(current, value)
                if merged.is_bottom:
                    return RunResult(shapes, _mismatch(
                        node, [current, value], it,
                        f"assigned shape {format_shape(value)} conflicts with variable "
                        f"{target!r} of shape {format_shape(current)}"))
            else:
                merged = value
            state.var_shapes[target] = merged
            shapes[node_id] = merged
            continue

        input_shapes = [shapes[i] for i in node.inputs]
        out = ops.apply_transfer(node.op, input_shapes, node.attrs)
        if out.is_bottom:
            return RunResult(shapes, _mismatch(
                node, input_shapes, it,
                "input shapes violate the operation's requirements"))
        shapes[node_id] = out

    state.iteration += 1
    return RunResult(shapes)


TraceSink = Callable[[int, str, Shape], None]


def run_loop(
    state: SessionState,
    fetches: Sequence[str],
    feeds: Sequence[FeedSet],
    repeat: int = 1,
    max_iterations: int | None = None,
    sink: "TraceSink | None" = None,
) -> LoopResult:
    """Run once per feed per repeat, cycling the feeds, stopping at the first error.

    Variable shapes persist between iterations; the returned diagnostic, if
    any, carries the 1-based iteration on which it fired.
    """
    cycle = list(feeds) or [EMPTY_FEED]
    total = repeat * len(cycle)
    if max_iterations is not None:
        total = min(total, max_iterations)
    completed = 0
    for i in range(total):
        result = run(state, fetches, cycle[i % len(cycle)])
        if sink is not None:
            for node_id, shape in result.shapes.items():
                sink(i + 1, node_id, shape)
        if result.diagnostic is not None:
            return LoopResult(result.diagnostic, completed)
        completed += 1
    return LoopResult(None, completed)
