"""Top-level checking: execute every run plan of a program and aggregate verdicts.

Exit-code contract: 0 when every run is clean, 1 when any run produced a
diagnostic, 2 when the document itself could not be parsed (the latter is
raised as an IRError by the parser, not reported here).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

from .ir import ProgramIR
from .session import Diagnostic, SessionState, run_loop
from .shapes import Shape


@dataclass(frozen=True)
class TraceEvent:
    """One evaluated node: which run, which iteration, what shape."""

    run_index: int
    iteration: int
    node_id: str
    shape: Shape


@dataclass(frozen=True)
class RunVerdict:
    run_index: int
    graph: str
    fetches: tuple[str, ...]
    iterations: int  # completed without error
    diagnostic: Diagnostic | None

    @property
    def ok(self) -> bool:
        return self.diagnostic is None


@dataclass(frozen=True)
class ExitReport:
    verdicts: tuple[RunVerdict, ...]

    @property
    def ok(self) -> bool:
        return all(v.ok for v in self.verdicts)

    @property
    def exit_code(self) -> int:
        return 0 if self.ok else 1

    @property
    def first_diagnostic(self) -> Diagnostic | None:
        for v in self.verdicts:
            if v.diagnostic is not None:
                return v.diagnostic
        return None


def check(
    ir: ProgramIR,
    max_iterations: int | None = None,
    sink: "Callable[[TraceEvent], None] | None" = None,
) -> ExitReport:
    """Run every plan in order; a diagnostic stops its own plan only.

    Each plan gets a fresh session (variables reset to their declared
    shapes); state never leaks between plans.
    """
    verdicts = []
    for idx, plan in enumerate(ir.runs):
        state = SessionState.for_graph(ir.graph_of(plan.graph))
        plan_sink = None
        if sink is not None:
            plan_sink = lambda it, node, shape, _i=idx: sink(TraceEvent(_i, it, node, shape))
        outcome = run_loop(state, list(plan.fetches), list(plan.feeds),
                           repeat=plan.repeat, max_iterations=max_iterations,
                           sink=plan_sink)
        verdicts.append(RunVerdict(idx, plan.graph, plan.fetches,
                                   outcome.iterations, outcome.diagnostic))
    return ExitReport(tuple(verdicts))


def diagnostic_to_json(d: Diagnostic) -> dict:
    """The fixed machine-readable form of a diagnostic."""
    return {
        "node": d.node_id,
        "op": d.op,
        "inputs": [str(s) for s in d.input_shapes],
        "iteration": d.iteration,
        "kind": d.kind.value,
        "message": d.message,
    }


def report_to_json(report: ExitReport, trace: Sequence[TraceEvent] = ()) -> dict:
    out = {
        "exit_code": report.exit_code,
        "ok": report.ok,
        "runs": [
            {
                "graph": v.graph,
                "fetches": list(v.fetches),
                "verdict": "ok" if v.ok else "error",
                "iterations": v.iterations,
                "diagnostic": None if v.diagnostic is None else diagnostic_to_json(v.diagnostic),
            }
            for v in report.verdicts
        ],
    }
    if trace:
        out["trace"] = [
            {"run": e.run_index, "iteration": e.iteration, "node": e.node_id,
             "shape": str(e.shape)}
            for e in trace
        ]
    return out
