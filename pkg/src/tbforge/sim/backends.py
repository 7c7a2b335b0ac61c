"""Simulator backends: real external processes and a scripted mock.

Every external invocation gets a fresh private working directory, so any
number of concurrent invocations never share files. The mock consumes a
fixed script of outcomes under a lock, which makes pipeline state-machine
tests fully deterministic with zero external tools.
"""

from __future__ import annotations

import shlex
import shutil
import subprocess
import tempfile
import threading
from pathlib import Path
from typing import Protocol, Sequence, Union

from tbforge.errors import ConfigError, ScriptExhausted, ToolMissing, UnparseableLog
from tbforge.sim.config import SimulatorConfig
from tbforge.sim.logparse import parse_coverage, parse_sim_log
from tbforge.sim.outcomes import (
    CompiledUnit,
    CompileError,
    CoverageReport,
    Report,
    RuntimeAbort,
    SimOutcome,
)


class SimulatorBackend(Protocol):
    def compile(self, dut: str, tb: str) -> CompiledUnit | CompileError: ...

    def run(self, unit: CompiledUnit) -> SimOutcome: ...

    def run_test(self, dut: str, tb: str) -> SimOutcome: ...

    def coverage(self, dut: str, tb: str) -> CoverageReport: ...

    @property
    def supports_coverage(self) -> bool: ...


class CommandSimulator:
    """Drives an external compile/run simulator pair via command templates."""

    def __init__(self, config: SimulatorConfig | None = None):
        self.config = config or SimulatorConfig()

    @property
    def supports_coverage(self) -> bool:
        return self.config.coverage_command is not None

    def _fresh_dir(self) -> Path:
        root = self.config.workdir_root
        if root:
            Path(root).mkdir(parents=True, exist_ok=True)
        return Path(tempfile.mkdtemp(prefix="sim-", dir=root))

    def _invoke(self, template: str, timeout: float | None = None, **paths) -> tuple[int, str]:
        argv = [part.format(**paths) for part in shlex.split(template)]
        try:
            proc = subprocess.run(
                argv, capture_output=True, text=True, timeout=timeout,
                cwd=paths.get("workdir"),
            )
        except FileNotFoundError as exc:
            raise ToolMissing(f"simulator command not found: {argv[0]}") from exc
        return proc.returncode, (proc.stdout or "") + (proc.stderr or "")

    def compile(self, dut: str, tb: str) -> CompiledUnit | CompileError:
        if not dut.strip() or not tb.strip():
            return CompileError(log="empty DUT or testbench source")
        workdir = self._fresh_dir()
        dut_path = workdir / "dut.v"
        tb_path = workdir / "tb.v"
        out_path = workdir / "sim.out"
        dut_path.write_text(dut, encoding="utf-8")
        tb_path.write_text(tb, encoding="utf-8")
        code, log = self._invoke(
            self.config.compile_command,
            dut=str(dut_path), tb=str(tb_path), out=str(out_path),
            workdir=str(workdir),
        )
        if code != 0:
            shutil.rmtree(workdir, ignore_errors=True)
            return CompileError(log=log)
        return CompiledUnit(workdir=workdir, out_path=out_path,
                            dut_path=dut_path, tb_path=tb_path)

    def run(self, unit: CompiledUnit, cleanup: bool = True) -> SimOutcome:
        try:
            argv = [part.format(out=str(unit.out_path), workdir=str(unit.workdir))
                    for part in shlex.split(self.config.run_command)]
            try:
                proc = subprocess.run(
                    argv, capture_output=True, text=True,
                    timeout=self.config.timeout, cwd=str(unit.workdir),
                )
            except FileNotFoundError as exc:
                raise ToolMissing(f"simulator command not found: {argv[0]}") from exc
            except subprocess.TimeoutExpired:
                return RuntimeAbort(reason="timeout",
                                    log=f"no result within {self.config.timeout}s")
            output = (proc.stdout or "") + (proc.stderr or "")
            try:
                return parse_sim_log(output)
            except UnparseableLog:
                if proc.returncode != 0:
                    return RuntimeAbort(reason="crash", log=output)
                raise
        finally:
            if cleanup:
                shutil.rmtree(unit.workdir, ignore_errors=True)

    def run_test(self, dut: str, tb: str) -> SimOutcome:
        compiled = self.compile(dut, tb)
        if isinstance(compiled, CompileError):
            return compiled
        return self.run(compiled)

    def coverage(self, dut: str, tb: str) -> CoverageReport:
        if self.config.coverage_command is None:
            raise ConfigError("no coverage_command configured")
        workdir = self._fresh_dir()
        try:
            dut_path = workdir / "dut.v"
            tb_path = workdir / "tb.v"
            dut_path.write_text(dut, encoding="utf-8")
            tb_path.write_text(tb, encoding="utf-8")
            _, log = self._invoke(
                self.config.coverage_command,
                timeout=self.config.timeout,
                dut=str(dut_path), tb=str(tb_path),
                out=str(workdir / "cov.out"), workdir=str(workdir),
            )
            return parse_coverage(log)
        finally:
            shutil.rmtree(workdir, ignore_errors=True)


_COMPILE_OK = "ok"

ScriptEntry = Union[str, CompileError, Report, RuntimeAbort, CoverageReport, float]


class MockSimulator:
    """Replays a fixed script of outcomes.

    Script entries are consumed one per backend call, in order:
    ``"ok"``/CompileError for compile calls, Report/RuntimeAbort for run
    calls, CoverageReport or a bare percentage for coverage calls. A
    ``run_test`` consumes a compile entry and, if it compiled, a run entry.
    """

    def __init__(self, script: Sequence[ScriptEntry]):
        if not script:
            raise ValueError("mock simulator script must be nonempty")
        self._script = list(script)
        self._cursor = 0
        self._lock = threading.Lock()
        self.calls: list[str] = []

    @property
    def supports_coverage(self) -> bool:
        return True

    def _next(self, call: str) -> ScriptEntry:
        with self._lock:
            self.calls.append(call)
            if self._cursor >= len(self._script):
                raise ScriptExhausted(f"mock script exhausted at call {call!r}")
            entry = self._script[self._cursor]
            self._cursor += 1
            return entry

    def compile(self, dut: str, tb: str) -> CompiledUnit | CompileError:
        entry = self._next("compile")
        if entry == _COMPILE_OK:
            root = Path(tempfile.gettempdir())
            return CompiledUnit(workdir=root, out_path=root / "mock.out",
                                dut_path=root / "dut.v", tb_path=root / "tb.v")
        if isinstance(entry, CompileError):
            return entry
        raise ValueError(f"mock script expected compile entry, got {entry!r}")

    def run(self, unit: CompiledUnit) -> SimOutcome:
        entry = self._next("run")
        if isinstance(entry, (Report, RuntimeAbort)):
            return entry
        raise ValueError(f"mock script expected run entry, got {entry!r}")

    def run_test(self, dut: str, tb: str) -> SimOutcome:
        compiled = self.compile(dut, tb)
        if isinstance(compiled, CompileError):
            return compiled
        return self.run(compiled)

    def coverage(self, dut: str, tb: str) -> CoverageReport:
        entry = self._next("coverage")
        if isinstance(entry, CoverageReport):
            return entry
        if isinstance(entry, (int, float)) and not isinstance(entry, bool):
            # 10000 lines keeps two-decimal percentages exactly consistent.
            covered = round(100.0 * float(entry))
            return CoverageReport(module_name="mock", total_lines=10000,
                                  covered_lines=covered, percent=float(entry))
        raise ValueError(f"mock script expected coverage entry, got {entry!r}")
