"""shapecheck: abstract shape checking for tensor dataflow graphs.

The package propagates tensor *shapes* (never data) through a graph IR to
diagnose shape incompatibilities in a fraction of the cost of running the
real computation.  See ``shapes`` for the abstract domain, ``ops`` for the
per-operation transfer functions, ``session``/``checker`` for execution,
``ir`` for the JSON format, ``oracle`` for the concrete reference
interpreter, and ``service`` for the HTTP facade.
"""

from .checker import ExitReport, RunVerdict, TraceEvent, check
from .graph import NodeSpec, ShapeGraph, build_graph, topo_order
from .ir import ProgramIR, RunPlan, parse_ir, serialize_ir
from .session import Diagnostic, DiagnosticKind, FeedSet, SessionState, run, run_loop
from .shapes import (
    BOTTOM,
    SCALAR,
    UNRANKED,
    DesiredShape,
    Shape,
    broadcast,
    element_count,
    meet,
)

__all__ = [
    "BOTTOM",
    "SCALAR",
    "UNRANKED",
    "Diagnostic",
    "DiagnosticKind",
    "DesiredShape",
    "ExitReport",
    "FeedSet",
    "NodeSpec",
    "ProgramIR",
    "RunPlan",
    "RunVerdict",
    "SessionState",
    "Shape",
    "ShapeGraph",
    "TraceEvent",
    "broadcast",
    "build_graph",
    "check",
    "element_count",
    "meet",
    "parse_ir",
    "run",
    "run_loop",
    "serialize_ir",
    "topo_order",
]

__version__ = "0.1.0"
