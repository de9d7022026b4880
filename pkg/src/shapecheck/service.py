"""HTTP facade over the checker, for long-running / multi-client use.

POST /check     -- check an IR document, optionally with a per-node trace
POST /validate  -- parse + validate only
GET  /ops       -- the operation catalog
GET  /health

Responses mirror the CLI contract: ``exit_code`` is 0 (clean), 1 (shape
error diagnosed) or 2 (the document is invalid); invalid documents still
yield HTTP 200 so batch clients can treat verdicts uniformly.
"""

from __future__ import annotations

from typing import Any, Optional

from fastapi import FastAPI
from pydantic import BaseModel, Field

from . import ops
from .checker import TraceEvent, check, report_to_json
from .ir import IRError, parse_ir
import json


class CheckRequest(BaseModel):
    program: dict[str, Any] = Field(description="an IR document (version 1)")
    trace: bool = False
    max_iterations: Optional[int] = None


class IRProblem(BaseModel):
    path: str
    message: str
    kind: str


class DiagnosticModel(BaseModel):
    node: str
    op: str
    inputs: list[str]
    iteration: int
    kind: str
    message: str


class RunVerdictModel(BaseModel):
    graph: str
    fetches: list[str]
    verdict: str
    iterations: int
    diagnostic: Optional[DiagnosticModel] = None


class TraceEventModel(BaseModel):
    run: int
    iteration: int
    node: str
    shape: str


class CheckResponse(BaseModel):
    exit_code: int
    ok: bool
    runs: list[RunVerdictModel] = []
    trace: Optional[list[TraceEventModel]] = None
    error: Optional[IRProblem] = None


class ValidateResponse(BaseModel):
    valid: bool
    error: Optional[IRProblem] = None


class OpInfo(BaseModel):
    name: str
    category: str
    arity: Optional[int] = Field(description="null means variadic (at least one input)")
    attrs: list[str]
    required_attrs: list[str]
    takes_shape: bool


app = FastAPI(
    title="shapecheck",
    description="Shape checking for tensor dataflow graph IR documents.",
    version="0.1.0",
)


def _problem(e: IRError) -> IRProblem:
    return IRProblem(path=e.path, message=e.message, kind=type(e).__name__)


@app.get("/health")
def health() -> dict[str, str]:
    return {"status": "ok"}


@app.post("/check", response_model=CheckResponse, response_model_exclude_none=True)
def check_program(req: CheckRequest) -> CheckResponse:
    try:
        ir = parse_ir(json.dumps(req.program))
    except IRError as e:
        return CheckResponse(exit_code=2, ok=False, error=_problem(e))
    events: list[TraceEvent] = []
    report = check(ir, max_iterations=req.max_iterations,
                   sink=events.append if req.trace else None)
    payload = report_to_json(report, events)
    return CheckResponse(
        exit_code=payload["exit_code"],
        ok=payload["ok"],
        runs=[RunVerdictModel(**r) for r in payload["runs"]],
        trace=[TraceEventModel(**t) for t in payload.get("trace", [])] if req.trace else None,
    )


@app.post("/validate", response_model=ValidateResponse, response_model_exclude_none=True)
def validate_program(req: CheckRequest) -> ValidateResponse:
    try:
        parse_ir(json.dumps(req.program))
    except IRError as e:
        return ValidateResponse(valid=False, error=_problem(e))
    return ValidateResponse(valid=True)


@app.get("/ops", response_model=list[OpInfo])
def list_ops() -> list[OpInfo]:
    out = []
    for name in ops.OP_NAMES:
        spec = ops.REGISTRY[name]
        fields = ops.attr_schema(name)
        out.append(OpInfo(
            name=name,
            category=spec.category,
            arity=spec.arity,
            attrs=[f.name for f in fields],
            required_attrs=[f.name for f in fields if f.required],
            takes_shape=spec.takes_shape_field,
        ))
    return out
