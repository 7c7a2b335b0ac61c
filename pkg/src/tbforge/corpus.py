"""Corpus row schemas and JSONL persistence.

Every dataset is a JSONL file: one UTF-8 JSON object per line, unique ids
per file. JSONL keeps long batch runs streamable and append-safe, and
fixture diffs readable.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator


@dataclass(frozen=True)
class SpecCodePair:
    id: str
    spec: str
    code: str


class JsonlError(ValueError):
    def __init__(self, path, lineno: int, msg: str):
        super().__init__(f"{path}:{lineno}: {msg}")
        self.lineno = lineno


def iter_jsonl(path) -> Iterator[tuple[int, dict]]:
    """Yield (lineno, object) pairs; malformed lines raise JsonlError."""
    with open(path, "r", encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except ValueError as exc:
                raise JsonlError(path, lineno, f"bad JSON: {exc}")
            if not isinstance(obj, dict):
                raise JsonlError(path, lineno, "row is not a JSON object")
            yield lineno, obj


def iter_jsonl_tolerant(path, on_error) -> Iterator[dict]:
    """Like iter_jsonl but reports malformed lines to on_error and skips."""
    with open(path, "r", encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                if not isinstance(obj, dict):
                    raise ValueError("row is not a JSON object")
            except ValueError as exc:
                on_error(lineno, str(exc))
                continue
            yield obj


def read_jsonl(path) -> list[dict]:
    return [obj for _, obj in iter_jsonl(path)]


def write_jsonl(path, rows: Iterable[dict]) -> int:
    """Write rows as JSONL; returns the row count. Field order is preserved,
    so identical inputs produce byte-identical files."""
    count = 0
    path = Path(path)
    if path.parent != Path("."):
        path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as handle:
        for row in rows:
            handle.write(json.dumps(row, ensure_ascii=False))
            handle.write("\n")
            count += 1
    return count


def check_unique_ids(rows: list[dict], key: str = "id") -> None:
    seen = set()
    for row in rows:
        value = row.get(key)
        if value in seen:
            raise ValueError(f"duplicate {key} in corpus: {value!r}")
        seen.add(value)


def testbench_row(pair_id: str, record) -> dict:
    """Serialize a pipeline TestbenchRecord; coverage_percent is omitted
    when coverage was skipped."""
    row = {
        "id": pair_id,
        "tb": record.testbench,
        "testcase_count": record.testcase_count,
    }
    if record.coverage_percent is not None:
        row["coverage_percent"] = record.coverage_percent
    row["provenance"] = {
        "draft_attempts": record.provenance.draft_attempts,
        "improve_rounds": record.provenance.improve_rounds,
        "rectify_iterations": record.provenance.rectify_iterations,
    }
    return row


def eval_row(pair_id: str, candidate_idx: int, evaluation) -> dict:
    if evaluation.no_code:
        status = "no_code"
    elif not evaluation.compile_ok:
        status = "compile_error"
    elif evaluation.aborted:
        status = evaluation.outcome.reason if evaluation.outcome else "crash"
    else:
        status = "report"
    return {
        "id": pair_id,
        "candidate_idx": candidate_idx,
        "compile_ok": evaluation.compile_ok,
        "passed": evaluation.passed,
        "total": evaluation.total,
        "status": status,
    }


def pair_row(pair_id: str, pair) -> dict:
    return {
        "id": pair_id,
        "method": pair.method.value,
        "spec": pair.spec,
        "chosen": pair.chosen,
        "rejected": pair.rejected,
        "chosen_passed": pair.chosen_passed,
        "rejected_passed": pair.rejected_passed,
    }


def task_result_row(result) -> dict:
    return {
        "task": result.task,
        "n": result.n,
        "c_syntax": result.c_syntax,
        "c_function": result.c_function,
    }


def outcome_json(outcome) -> dict:
    """Render a SimOutcome as a JSON-friendly dict for the CLI."""
    from tbforge.sim.outcomes import CompileError, Report, RuntimeAbort

    if isinstance(outcome, Report):
        return {
            "status": "report",
            "total_cases": outcome.total_cases,
            "failures": outcome.failures,
            "passed": outcome.passed,
            "inconsistent": outcome.inconsistent,
            "case_lines": [
                {"case": c.case, "expected": c.expected, "actual": c.actual}
                for c in outcome.case_lines
            ],
        }
    if isinstance(outcome, CompileError):
        return {"status": "compile_error", "log": outcome.log}
    if isinstance(outcome, RuntimeAbort):
        return {"status": "runtime_abort", "reason": outcome.reason,
                "log": outcome.log}
    raise TypeError(f"not a simulation outcome: {outcome!r}")


def load_spec_code_pairs(path, on_error=None) -> list[SpecCodePair]:
    pairs = []
    errors: list[str] = []

    def record(lineno, msg):
        if on_error:
            on_error(lineno, msg)

    for obj in iter_jsonl_tolerant(path, record):
        try:
            pairs.append(SpecCodePair(id=str(obj["id"]), spec=str(obj["spec"]),
                                      code=str(obj["code"])))
        except KeyError as exc:
            record(-1, f"row missing field {exc}")
    check_unique_ids([{"id": p.id} for p in pairs])
    return pairs
