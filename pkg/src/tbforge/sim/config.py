"""Simulator invocation configuration.

The simulator is abstracted behind command templates so that any
compile-then-run tool pair can by plugged in; the defaults target Icarus
Verilog (iverilog/vvp). Line coverage needs a separate tool, so
coverage_command is optional; pipelines can run with coverage skipped.
"""

from __future__ import annotations

from dataclasses import dataclass

from tbforge.errors import ConfigError

DEFAULT_COMPILE_COMMAND = "iverilog -o {out} {dut} {tb}"
DEFAULT_RUN_COMMAND = "vvp {out}"

# Desk-scale designs simulate in milliseconds; a hang is a combinational
# loop or a missing $finish.
DEFAULT_TIMEOUT_SECONDS = 30.0


@dataclass(frozen=True)
class SimulatorConfig:
    compile_command: str = DEFAULT_COMPILE_COMMAND
    run_command: str = DEFAULT_RUN_COMMAND
    coverage_command: str | None = None
    timeout: float = DEFAULT_TIMEOUT_SECONDS
    workdir_root: str | None = None

    def __post_init__(self):
        if self.timeout <= 0:
            raise ConfigError("simulator timeout must be > 0")
        for placeholder in ("{dut}", "{tb}", "{out}"):
            if placeholder not in self.compile_command:
                raise ConfigError(f"compile_command missing {placeholder}")
        if "{out}" not in self.run_command:
            raise ConfigError("run_command missing {out}")
        if self.coverage_command is not None:
            for placeholder in ("{dut}", "{tb}"):
                if placeholder not in self.coverage_command:
                    raise ConfigError(f"coverage_command missing {placeholder}")
