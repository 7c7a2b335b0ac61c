"""Toolkit configuration: a simple INI file with strict key validation.

Secrets never live in the file; the LLM API key is read from the
environment variable named by ``llm.api_key_env``. Mock backends are
configured with JSON script files and are instantiated fresh per pipeline
row, so batch runs stay deterministic at any worker count.
"""

from __future__ import annotations

import configparser
import json
from dataclasses import dataclass, field
from pathlib import Path

from tbforge.errors import ConfigError
from tbforge.llm.client import EndpointConfig, HttpChatClient, MockChatClient
from tbforge.pipeline import PipelineConfig
from tbforge.preference import DEFAULT_PAIR_CAP, SamplingParams
from tbforge.sim.backends import CommandSimulator, MockSimulator
from tbforge.sim.config import (
    DEFAULT_COMPILE_COMMAND,
    DEFAULT_RUN_COMMAND,
    DEFAULT_TIMEOUT_SECONDS,
    SimulatorConfig,
)
from tbforge.sim.outcomes import CompileError, Report, RuntimeAbort


@dataclass(frozen=True)
class LlmSettings:
    backend: str = "http"  # http | mock
    endpoint: str = ""
    model: str = ""
    api_key_env: str = "TBFORGE_API_KEY"
    max_tokens: int = 4096
    retries: int = 3
    backoff_seconds: float = 0.5
    temperature: float = 0.0  # pipeline prompts run deterministically
    request_timeout: float = 120.0
    mock_script: str = ""


@dataclass(frozen=True)
class SimulatorSettings:
    backend: str = "command"  # command | mock
    config: SimulatorConfig = field(default_factory=SimulatorConfig)
    mock_script: str = ""


@dataclass(frozen=True)
class Config:
    llm: LlmSettings = field(default_factory=LlmSettings)
    simulator: SimulatorSettings = field(default_factory=SimulatorSettings)
    pipeline: PipelineConfig = field(default_factory=PipelineConfig)
    sampling: SamplingParams = field(default_factory=SamplingParams)
    max_pairs_per_spec: int = DEFAULT_PAIR_CAP


_SCHEMA = {
    "llm": {"backend", "endpoint", "model", "api_key_env", "max_tokens",
            "retries", "backoff_seconds", "temperature", "request_timeout",
            "mock_script"},
    "simulator": {"backend", "compile_command", "run_command",
                  "coverage_command", "timeout", "mock_script"},
    "pipeline": {"max_draft_attempts", "max_improve_attempts",
                 "max_rectify_iterations", "coverage_threshold",
                 "skip_coverage"},
    "sampling": {"n", "temperatures", "top_p", "top_k", "max_pairs_per_spec",
                 "max_tokens"},
    "paths": {"workdir_root"},
}


def _typed(section, key, cast, default):
    raw = section.get(key)
    if raw is None or raw == "":
        return default
    try:
        if cast is bool:
            lowered = raw.strip().lower()
            if lowered in ("1", "true", "yes", "on"):
                return True
            if lowered in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        return cast(raw)
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {raw!r}") from exc


def load_config(path) -> Config:
    """Parse and validate the INI config; unknown sections/keys reject."""
    parser = configparser.ConfigParser()
    try:
        read = parser.read(path, encoding="utf-8")
    except configparser.Error as exc:
        raise ConfigError(f"bad config file: {exc}") from exc
    if not read:
        raise ConfigError(f"config file not found: {path}")

    for section in parser.sections():
        if section not in _SCHEMA:
            raise ConfigError(f"unknown config section [{section}]")
        unknown = set(parser[section]) - _SCHEMA[section]
        if unknown:
            raise ConfigError(
                f"unknown keys in [{section}]: {', '.join(sorted(unknown))}")

    llm_raw = parser["llm"] if parser.has_section("llm") else {}
    sim_raw = parser["simulator"] if parser.has_section("simulator") else {}
    pipe_raw = parser["pipeline"] if parser.has_section("pipeline") else {}
    samp_raw = parser["sampling"] if parser.has_section("sampling") else {}
    paths_raw = parser["paths"] if parser.has_section("paths") else {}

    llm = LlmSettings(
        backend=_typed(llm_raw, "backend", str, "http"),
        endpoint=_typed(llm_raw, "endpoint", str, ""),
        model=_typed(llm_raw, "model", str, ""),
        api_key_env=_typed(llm_raw, "api_key_env", str, "TBFORGE_API_KEY"),
        max_tokens=_typed(llm_raw, "max_tokens", int, 4096),
        retries=_typed(llm_raw, "retries", int, 3),
        backoff_seconds=_typed(llm_raw, "backoff_seconds", float, 0.5),
        temperature=_typed(llm_raw, "temperature", float, 0.0),
        request_timeout=_typed(llm_raw, "request_timeout", float, 120.0),
        mock_script=_typed(llm_raw, "mock_script", str, ""),
    )
    if llm.backend not in ("http", "mock"):
        raise ConfigError(f"llm backend must be http or mock, got {llm.backend!r}")
    if llm.backend == "mock" and not llm.mock_script:
        raise ConfigError("llm backend mock needs mock_script")

    coverage_command = _typed(sim_raw, "coverage_command", str, "") or None
    sim_config = SimulatorConfig(
        compile_command=_typed(sim_raw, "compile_command", str, DEFAULT_COMPILE_COMMAND),
        run_command=_typed(sim_raw, "run_command", str, DEFAULT_RUN_COMMAND),
        coverage_command=coverage_command,
        timeout=_typed(sim_raw, "timeout", float, DEFAULT_TIMEOUT_SECONDS),
        workdir_root=_typed(paths_raw, "workdir_root", str, "") or None,
    )
    simulator = SimulatorSettings(
        backend=_typed(sim_raw, "backend", str, "command"),
        config=sim_config,
        mock_script=_typed(sim_raw, "mock_script", str, ""),
    )
    if simulator.backend not in ("command", "mock"):
        raise ConfigError(
            f"simulator backend must be command or mock, got {simulator.backend!r}")
    if simulator.backend == "mock" and not simulator.mock_script:
        raise ConfigError("simulator backend mock needs mock_script")

    pipeline = PipelineConfig(
        max_draft_attempts=_typed(pipe_raw, "max_draft_attempts", int, 3),
        max_improve_attempts=_typed(pipe_raw, "max_improve_attempts", int, 3),
        max_rectify_iterations=_typed(pipe_raw, "max_rectify_iterations", int, 3),
        coverage_threshold=_typed(pipe_raw, "coverage_threshold", float, 90.0),
        skip_coverage=_typed(pipe_raw, "skip_coverage", bool, False),
    )

    temps_raw = _typed(samp_raw, "temperatures", str, "0.2, 0.5, 0.8")
    try:
        temperatures = tuple(float(part) for part in temps_raw.split(",") if part.strip())
    except ValueError as exc:
        raise ConfigError(f"bad sampling temperatures: {temps_raw!r}") from exc
    sampling = SamplingParams(
        n=_typed(samp_raw, "n", int, 2),
        temperatures=temperatures,
        top_p=_typed(samp_raw, "top_p", float, 0.95),
        top_k=_typed(samp_raw, "top_k", int, 50),
        max_tokens=_typed(samp_raw, "max_tokens", int, 4096),
    )
    cap = _typed(samp_raw, "max_pairs_per_spec", int, DEFAULT_PAIR_CAP)

    return Config(llm=llm, simulator=simulator, pipeline=pipeline,
                  sampling=sampling, max_pairs_per_spec=cap)


# -- backend factories --

def _load_sim_script(path) -> list:
    try:
        entries = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, ValueError) as exc:
        raise ConfigError(f"bad simulator mock script {path}: {exc}") from exc
    script = []
    for entry in entries:
        kind = entry.get("kind")
        if kind == "compile":
            script.append("ok" if entry.get("ok", True)
                          else CompileError(log=entry.get("log", "compile failed")))
        elif kind == "run":
            if "abort" in entry:
                script.append(RuntimeAbort(reason=entry["abort"],
                                           log=entry.get("log", "")))
            else:
                script.append(Report(total_cases=int(entry["total"]),
                                     failures=int(entry["failures"])))
        elif kind == "coverage":
            script.append(float(entry["percent"]))
        else:
            raise ConfigError(f"unknown mock simulator entry kind {kind!r}")
    return script


def _load_llm_script(path) -> list[str]:
    try:
        entries = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, ValueError) as exc:
        raise ConfigError(f"bad llm mock script {path}: {exc}") from exc
    if not isinstance(entries, list) or not all(isinstance(e, str) for e in entries):
        raise ConfigError("llm mock script must be a JSON list of strings")
    return entries


def make_simulator_factory(config: Config):
    """Returns a zero-arg callable producing a simulator backend. Mock
    backends are fresh per call so each pipeline row replays the script
    from the top."""
    if config.simulator.backend == "mock":
        script = _load_sim_script(config.simulator.mock_script)
        return lambda: MockSimulator(list(script))
    shared = CommandSimulator(config.simulator.config)
    return lambda: shared


def make_chat_client_factory(config: Config):
    if config.llm.backend == "mock":
        script = _load_llm_script(config.llm.mock_script)
        return lambda: MockChatClient(list(script))
    endpoint = EndpointConfig(
        url=config.llm.endpoint,
        model=config.llm.model,
        api_key_env=config.llm.api_key_env,
        request_timeout=config.llm.request_timeout,
        retries=config.llm.retries,
        backoff_seconds=config.llm.backoff_seconds,
    )
    if not endpoint.url:
        raise ConfigError("llm backend http needs an endpoint URL")
    shared = HttpChatClient(endpoint)
    return lambda: shared
