"""Buggy/fixed corpus harness.

A corpus directory holds IR files plus a ``cases.json`` manifest::

    {"cases": [
      {"name": "feed_order",
       "buggy": "feed_order_buggy.json",
       "fixed": "feed_order_fixed.json",
       "expected_error_node": "images",
       "expected_iteration": 1},
      {"name": "control", "buggy": null, "fixed": "control_fixed.json"}
    ]}

A buggy file must produce a diagnostic (otherwise the bug was *missed*, a
false negative); a fixed file must check clean (otherwise the harness
reports a *false positive*).  Control cases may omit the buggy side.  The
harness aggregates recall and precision and records the wall time of each
abstract check.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass
from pathlib import Path

from .checker import check
from .ir import IRError, parse_ir
from .session import Diagnostic


@dataclass(frozen=True)
class CorpusCase:
    name: str
    buggy: Path | None
    fixed: Path
    expected_error_node: str | None = None
    expected_iteration: int | None = None


@dataclass(frozen=True)
class CaseResult:
    name: str
    detected: bool | None        # None when the case has no buggy side
    false_positive: bool
    node_matches: bool | None    # vs expected_error_node, when given
    iteration_matches: bool | None
    diagnostic: Diagnostic | None
    seconds: float

    @property
    def conforming(self) -> bool:
        return (
            self.detected is not False
            and not self.false_positive
            and self.node_matches is not False
            and self.iteration_matches is not False
        )


@dataclass(frozen=True)
class CorpusReport:
    results: tuple[CaseResult, ...]

    @property
    def buggy_total(self) -> int:
        return sum(1 for r in self.results if r.detected is not None)

    @property
    def detected_total(self) -> int:
        return sum(1 for r in self.results if r.detected)

    @property
    def false_positives(self) -> int:
        return sum(1 for r in self.results if r.false_positive)

    @property
    def recall(self) -> float:
        return self.detected_total / self.buggy_total if self.buggy_total else 1.0

    @property
    def precision(self) -> float:
        flagged = self.detected_total + self.false_positives
        return self.detected_total / flagged if flagged else 1.0

    @property
    def ok(self) -> bool:
        return all(r.conforming for r in self.results)


def load_cases(corpus_dir: "Path | str") -> list[CorpusCase]:
    """Read the manifest; IRError on a missing or malformed manifest."""
    root = Path(corpus_dir)
    manifest = root / "cases.json"
    try:
        doc = json.loads(manifest.read_text())
    except FileNotFoundError:
        raise IRError(str(manifest), "corpus manifest not found") from None
    except json.JSONDecodeError as e:
        raise IRError(str(manifest), f"malformed manifest: {e}") from None
    cases = []
    for i, entry in enumerate(doc.get("cases", [])):
        if not isinstance(entry, dict) or "name" not in entry or "fixed" not in entry:
            raise IRError(f"{manifest}:cases[{i}]", "case needs at least a name and a fixed file")
        buggy = entry.get("buggy")
        cases.append(CorpusCase(
            name=entry["name"],
            buggy=root / buggy if buggy else None,
            fixed=root / entry["fixed"],
            expected_error_node=entry.get("expected_error_node"),
            expected_iteration=entry.get("expected_iteration"),
        ))
    return cases


def _timed_check(path: Path):
    ir = parse_ir(path.read_bytes())
    start = time.perf_counter()
    report = check(ir)
    return report, time.perf_counter() - start


def run_case(case: CorpusCase) -> CaseResult:
    seconds = 0.0
    detected: bool | None = None
    node_matches: bool | None = None
    iteration_matches: bool | None = None
    diagnostic = None

    if case.buggy is not None:
        report, dt = _timed_check(case.buggy)
        seconds += dt
        diagnostic = report.first_diagnostic
        detected = diagnostic is not None
        if detected and case.expected_error_node is not None:
            node_matches = diagnostic.node_id == case.expected_error_node
        if detected and case.expected_iteration is not None:
            iteration_matches = diagnostic.iteration == case.expected_iteration

    fixed_report, dt = _timed_check(case.fixed)
    seconds += dt
    return CaseResult(
        name=case.name,
        detected=detected,
        false_positive=not fixed_report.ok,
        node_matches=node_matches,
        iteration_matches=iteration_matches,
        diagnostic=diagnostic,
        seconds=seconds,
    )


def run_corpus(cases: "list[CorpusCase]") -> CorpusReport:
    return CorpusReport(tuple(run_case(c) for c in cases))


def report_to_json(report: CorpusReport) -> dict:
    return {
        "ok": report.ok,
        "recall": report.recall,
        "precision": report.precision,
        "buggy_cases": report.buggy_total,
        "detected": report.detected_total,
        "false_positives": report.false_positives,
        "cases": [
            {
                "name": r.name,
                "detected": r.detected,
                "false_positive": r.false_positive,
                "node_matches": r.node_matches,
                "iteration_matches": r.iteration_matches,
                "seconds": round(r.seconds, 6),
                "diagnostic": None if r.diagnostic is None else {
                    "node": r.diagnostic.node_id,
                    "iteration": r.diagnostic.iteration,
                    "kind": r.diagnostic.kind.value,
                },
            }
            for r in report.results
        ],
    }
