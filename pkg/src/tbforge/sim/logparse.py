"""Parsers for simulator stdout and line-coverage reports.

The testbenches the pipeline produces report one "Test Case N. Expected ..."
/ "Test Case N. Actual ..." line pair per case and finish with either
"Your Design Passed" or a failure-count line. Both failure phrasings seen in
the wild ("Test with N failures", "Test completed with N failure") are
accepted, singular or plural.
"""

from __future__ import annotations

import re

from tbforge.errors import UnparseableLog, UnparseableReport
from tbforge.sim.outcomes import CaseLine, CoverageReport, Report

_CASE_INDEX = re.compile(r"Test Case (\d+)\.")
_CASE_EXPECTED = re.compile(r"Test Case (\d+)\.\s*Expected\s?(.*)")
_CASE_ACTUAL = re.compile(r"Test Case (\d+)\.\s*Actual\s?(.*)")
_FAILURES = re.compile(r"^\s*Test (?:completed )?with (\d+) failures?\.?\s*$")
_PASS_MARKER = "Your Design Passed"

_COVERAGE_TOTAL = re.compile(r"^TOTAL\s+(\d+)\s+(\d+)\s+(\d+(?:\.\d+)?)\s*$")
_COVERAGE_MODULE = re.compile(r"^Line Coverage for Module\s*:\s*(\S+)")
_LINE_FLAG = re.compile(r"^\s*([01])/1(?!\d)")


def parse_sim_log(stdout: str) -> Report:
    """Parse simulator stdout into a Report.

    Raises UnparseableLog when neither the pass marker nor a failure-count
    line is present.
    """
    failures = None
    for line in stdout.splitlines():
        m = _FAILURES.match(line)
        if m:
            failures = int(m.group(1))
    if _PASS_MARKER in stdout:
        failures = 0
    if failures is None:
        raise UnparseableLog("no terminal pass/failure marker in simulation log")

    indices = {int(m.group(1)) for m in _CASE_INDEX.finditer(stdout)}
    expected: dict[int, str] = {}
    actual: dict[int, str] = {}
    for line in stdout.splitlines():
        m = _CASE_EXPECTED.search(line)
        if m:
            expected.setdefault(int(m.group(1)), m.group(2).rstrip())
            continue
        m = _CASE_ACTUAL.search(line)
        if m:
            actual.setdefault(int(m.group(1)), m.group(2).rstrip())

    total = max(indices) if indices else 0
    inconsistent = False
    if failures > total:
        total = failures
        inconsistent = True

    case_lines = tuple(
        CaseLine(case=i, expected=expected.get(i, ""), actual=actual.get(i, ""))
        for i in sorted(indices)
    )
    return Report(total_cases=total, failures=failures, case_lines=case_lines,
                  inconsistent=inconsistent)


def render_sim_log(report: Report) -> str:
    """Render a Report back into the display format parse_sim_log reads."""
    lines = ["===========TestCases==========="]
    for case in report.case_lines:
        lines.append(f"Test Case {case.case}. Expected {case.expected}")
        lines.append(f"Test Case {case.case}. Actual {case.actual}")
    lines.append("===========End===========")
    if report.failures == 0:
        lines.append(_PASS_MARKER)
    else:
        lines.append(f"Test with {report.failures} failures")
    return "\n".join(lines) + "\n"


def parse_coverage(report: str) -> CoverageReport:
    """Parse a textual line-coverage report.

    The TOTAL row carries total/covered/percent; lines prefixed ``1/1`` are
    covered and ``0/1 ==>`` uncovered, keyed by their 1-based position in
    the report text. Raises UnparseableReport when the TOTAL row is absent.
    """
    module_name = ""
    total = covered = None
    percent = 0.0
    flags: list[tuple[int, bool]] = []

    for lineno, line in enumerate(report.splitlines(), start=1):
        m = _COVERAGE_MODULE.match(line)
        if m:
            module_name = m.group(1)
            continue
        m = _COVERAGE_TOTAL.match(line.replace("\t", " ").strip())
        if m and total is None:
            total = int(m.group(1))
            covered = int(m.group(2))
            percent = float(m.group(3))
            continue
        m = _LINE_FLAG.match(line)
        if m:
            flags.append((lineno, m.group(1) == "1"))

    if total is None or covered is None:
        raise UnparseableReport("no TOTAL row in coverage report")
    return CoverageReport(module_name=module_name, total_lines=total,
                          covered_lines=covered, percent=percent,
                          line_flags=tuple(flags))
