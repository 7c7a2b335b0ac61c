import json

import pytest

from tbforge.config import load_config, make_chat_client_factory, make_simulator_factory
from tbforge.corpus import (
    JsonlError,
    check_unique_ids,
    iter_jsonl,
    load_spec_code_pairs,
    read_jsonl,
    write_jsonl,
)
from tbforge.errors import ConfigError
from tbforge.sim import CompileError, Report


# ---- JSONL ----

def test_write_read_roundtrip(tmp_path):
    rows = [
        {"id": "a", "spec": "s1", "code": "c1"},
        {"id": "b", "spec": "unicode ✓", "code": "module m; endmodule\n"},
    ]
    path = tmp_path / "rows.jsonl"
    assert write_jsonl(path, rows) == 2
    assert read_jsonl(path) == rows


def test_byte_stable_output(tmp_path):
    rows = [{"id": "x", "value": 1.25, "nested": {"a": [1, 2]}}]
    p1, p2 = tmp_path / "one.jsonl", tmp_path / "two.jsonl"
    write_jsonl(p1, rows)
    write_jsonl(p2, rows)
    assert p1.read_bytes() == p2.read_bytes()


def test_malformed_line_raises_with_lineno(tmp_path):
    path = tmp_path / "bad.jsonl"
    path.write_text('{"id": "a"}\nnot json\n', encoding="utf-8")
    with pytest.raises(JsonlError) as exc:
        list(iter_jsonl(path))
    assert exc.value.lineno == 2


def test_tolerant_loader_skips_and_reports(tmp_path):
    path = tmp_path / "mixed.jsonl"
    path.write_text(
        '{"id": "a", "spec": "s", "code": "c"}\n'
        "...garbage...\n"
        '{"id": "b", "spec": "s", "code": "c"}\n',
        encoding="utf-8")
    errors = []
    pairs = load_spec_code_pairs(path, on_error=lambda n, m: errors.append(n))
    assert [p.id for p in pairs] == ["a", "b"]
    assert errors == [2]


def test_duplicate_ids_rejected():
    with pytest.raises(ValueError):
        check_unique_ids([{"id": "a"}, {"id": "a"}])


# ---- config ----

GOOD_CONFIG = """\
[llm]
backend = mock
mock_script = {llm_script}

[simulator]
backend = mock
mock_script = {sim_script}
timeout = 15

[pipeline]
max_draft_attempts = 2
coverage_threshold = 85.5
skip_coverage = false

[sampling]
n = 3
temperatures = 0.2, 0.8
top_p = 0.9
top_k = 40
"""


@pytest.fixture
def scripts(tmp_path):
    llm_script = tmp_path / "llm.json"
    llm_script.write_text(json.dumps(["module m; endmodule"]), encoding="utf-8")
    sim_script = tmp_path / "sim.json"
    sim_script.write_text(json.dumps([
        {"kind": "compile", "ok": True},
        {"kind": "compile", "ok": False, "log": "boom"},
        {"kind": "run", "total": 5, "failures": 2},
        {"kind": "coverage", "percent": 91.5},
    ]), encoding="utf-8")
    return llm_script, sim_script


def write_config(tmp_path, text):
    path = tmp_path / "tbforge.ini"
    path.write_text(text, encoding="utf-8")
    return path


def test_config_loads_and_types(tmp_path, scripts):
    llm_script, sim_script = scripts
    path = write_config(tmp_path, GOOD_CONFIG.format(
        llm_script=llm_script, sim_script=sim_script))
    config = load_config(path)
    assert config.llm.backend == "mock"
    assert config.simulator.config.timeout == 15.0
    assert config.pipeline.max_draft_attempts == 2
    assert config.pipeline.coverage_threshold == 85.5
    assert config.sampling.n == 3
    assert config.sampling.temperatures == (0.2, 0.8)


def test_unknown_key_rejected(tmp_path, scripts):
    llm_script, sim_script = scripts
    text = GOOD_CONFIG.format(llm_script=llm_script, sim_script=sim_script)
    path = write_config(tmp_path, text.replace(
        "max_draft_attempts = 2", "max_draft_attempts = 2\nbogus_key = 1"))
    with pytest.raises(ConfigError):
        load_config(path)


def test_unknown_section_rejected(tmp_path):
    path = write_config(tmp_path, "[nonsense]\nx = 1\n")
    with pytest.raises(ConfigError):
        load_config(path)


def test_missing_file_rejected(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "absent.ini")


def test_mock_backend_requires_script(tmp_path):
    path = write_config(tmp_path, "[llm]\nbackend = mock\n")
    with pytest.raises(ConfigError):
        load_config(path)


def test_sim_script_parses_to_domain_objects(tmp_path, scripts):
    llm_script, sim_script = scripts
    path = write_config(tmp_path, GOOD_CONFIG.format(
        llm_script=llm_script, sim_script=sim_script))
    config = load_config(path)
    sim = make_simulator_factory(config)()
    assert not isinstance(sim.compile("d", "t"), CompileError)
    assert sim.compile("d", "t") == CompileError("boom")
    assert sim.run(None) == Report(5, 2)
    assert sim.coverage("d", "t").percent == 91.5


def test_mock_factories_give_fresh_instances(tmp_path, scripts):
    llm_script, sim_script = scripts
    path = write_config(tmp_path, GOOD_CONFIG.format(
        llm_script=llm_script, sim_script=sim_script))
    config = load_config(path)
    sim_factory = make_simulator_factory(config)
    a, b = sim_factory(), sim_factory()
    a.compile("d", "t")
    # b replays from the top regardless of a's cursor
    assert not isinstance(b.compile("d", "t"), CompileError)
    llm_factory = make_chat_client_factory(config)
    assert llm_factory() is not llm_factory()
