import random

import pytest

from tbforge.errors import ScriptExhausted
from tbforge.llm import MockChatClient
from tbforge.preference import (
    CandidateEval,
    Discard,
    PairMethod,
    PreferencePair,
    SamplingParams,
    build_pair_similarity,
    build_pair_testbench,
    build_pair_with_fails,
    build_pairs,
    code_line_count,
    evaluate_candidate,
    ppo_reward,
    sample_candidates,
)
from tbforge.sim import CompileError, MockSimulator, Report, RuntimeAbort


def ev(passed, total=5, compile_ok=True, aborted=False, code=None):
    if aborted or not compile_ok:
        passed, total = 0, 0
    return CandidateEval(code=code or f"module c_{passed}_{compile_ok}; endmodule",
                         compile_ok=compile_ok, outcome=None,
                         passed=passed, total=total, aborted=aborted)


# ---- sampling ----

def test_sample_two_candidates():
    client = MockChatClient([
        "```verilog\nmodule a; endmodule\n```",
        "```verilog\nmodule b; endmodule\n```",
    ])
    codes = sample_candidates(client, "spec", SamplingParams(n=2), backoff=0)
    assert len(codes) == 2
    assert "module a" in codes[0]
    assert "module b" in codes[1]


def test_sample_prose_yields_empty_marker():
    client = MockChatClient(["module only; endmodule", "no code at all"])
    codes = sample_candidates(client, "spec", SamplingParams(n=2), backoff=0)
    assert codes[1] == ""


def test_sample_call_count_over_batch():
    client = MockChatClient(["module m; endmodule"] * 20)
    for _ in range(10):
        sample_candidates(client, "spec", SamplingParams(n=2), backoff=0)
    assert len(client.calls) == 20
    with pytest.raises(ScriptExhausted):
        sample_candidates(client, "spec", SamplingParams(n=2), backoff=0)


def test_sample_forwards_sampling_params():
    client = MockChatClient(["module m; endmodule"] * 2)
    sample_candidates(client, "spec",
                      SamplingParams(n=2, temperatures=(0.2, 0.5), top_p=0.95, top_k=50),
                      backoff=0)
    assert [c.temperature for c in client.calls] == [0.2, 0.5]
    assert all(c.top_p == 0.95 and c.top_k == 50 for c in client.calls)


# ---- evaluation ----

def test_evaluate_partial_pass():
    sim = MockSimulator(["ok", Report(5, 2)])
    result = evaluate_candidate("module m; endmodule", "module tb; endmodule", sim)
    assert result.passed == 3
    assert result.total == 5
    assert result.compile_ok


def test_evaluate_compile_error():
    sim = MockSimulator([CompileError("nope")])
    result = evaluate_candidate("module m; endmodule", "tb", sim)
    assert not result.compile_ok
    assert result.passed == 0


def test_evaluate_full_pass():
    sim = MockSimulator(["ok", Report(5, 0)])
    result = evaluate_candidate("module m; endmodule", "tb", sim)
    assert result.passed == 5


def test_evaluate_abort_flagged():
    sim = MockSimulator(["ok", RuntimeAbort("timeout")])
    result = evaluate_candidate("module m; endmodule", "tb", sim)
    assert result.aborted
    assert result.passed == 0


def test_evaluate_empty_code_marker():
    sim = MockSimulator(["ok"])
    result = evaluate_candidate("", "tb", sim)
    assert result.no_code
    assert not result.compile_ok
    assert sim.calls == []


# ---- testbench rule ----

def test_testbench_rule_prefers_more_passes():
    pair = build_pair_testbench("s", ev(5), ev(3))
    assert isinstance(pair, PreferencePair)
    assert pair.chosen_passed == 5
    assert pair.rejected_passed == 3
    assert pair.method is PairMethod.Testbench


def test_testbench_rule_discards_compile_failure():
    assert build_pair_testbench("s", ev(0, compile_ok=False), ev(5)) == \
        Discard("compile_failure")


def test_testbench_rule_discards_tie():
    assert build_pair_testbench("s", ev(4), ev(4)) == Discard("tie")


def test_testbench_rule_discards_abort():
    assert build_pair_testbench("s", ev(0, aborted=True), ev(5)) == Discard("aborted")


def test_symmetry_in_argument_order():
    a, b = ev(5), ev(3)
    x = build_pair_testbench("s", a, b)
    y = build_pair_testbench("s", b, a)
    assert x == y


# ---- similarity rules ----

REF = "module r(input a, b, output y); assign y = a & b; endmodule"
NEAR = "module c(input a, b, output y); assign y = a & b; endmodule"
FAR = "module c(input p, q, output z); wire t; assign t = p | q; assign z = ~t; endmodule"


def test_similarity_rule_prefers_higher_score():
    a = ev(2, code=NEAR)
    b = ev(4, code=FAR)
    for method in (PairMethod.Bleu, PairMethod.Ast, PairMethod.Dfg):
        pair = build_pair_similarity("s", REF, a, b, method)
        assert isinstance(pair, PreferencePair), method
        assert pair.chosen == NEAR
        assert pair.method is method


def test_similarity_rule_requires_compiling_candidates():
    outcome = build_pair_similarity("s", REF, ev(0, compile_ok=False, code=NEAR),
                                    ev(3, code=FAR), PairMethod.Bleu)
    assert outcome == Discard("compile_failure")


def test_similarity_rule_parse_failure_discards():
    broken = "module c; generate endgenerate endmodule"
    outcome = build_pair_similarity("s", REF, ev(1, code=broken), ev(2, code=FAR),
                                    PairMethod.Ast)
    assert outcome == Discard("parse")


def test_similarity_rule_tie_discards():
    outcome = build_pair_similarity("s", REF, ev(1, code=NEAR), ev(2, code=NEAR),
                                    PairMethod.Dfg)
    assert outcome == Discard("tie")


def test_bleu_fixture_chooses_higher():
    # NEAR shares the reference token stream exactly; FAR shares little.
    pair = build_pair_similarity("s", REF, ev(0, total=5, code=FAR),
                                 ev(5, code=NEAR), PairMethod.Bleu)
    assert isinstance(pair, PreferencePair)
    assert pair.chosen == NEAR


# ---- compile-status rule ----

def test_with_fails_emits_on_status_difference():
    pair = build_pair_with_fails("s", ev(3), ev(0, compile_ok=False))
    assert isinstance(pair, PreferencePair)
    assert pair.method is PairMethod.TestbenchWithFails
    assert pair.chosen_passed == 3


def test_with_fails_both_fail_discards():
    outcome = build_pair_with_fails("s", ev(0, compile_ok=False),
                                    ev(0, compile_ok=False))
    assert outcome == Discard("compile_failure")


def test_with_fails_both_ok_falls_back_to_testbench_rule():
    pair = build_pair_with_fails("s", ev(5), ev(3))
    assert isinstance(pair, PreferencePair)
    assert pair.method is PairMethod.Testbench


def test_with_fails_aborting_compiler_still_wins():
    pair = build_pair_with_fails("s", ev(0, aborted=True), ev(0, compile_ok=False))
    assert isinstance(pair, PreferencePair)
    assert pair.method is PairMethod.TestbenchWithFails


# ---- rewards ----

def test_ppo_reward_values():
    assert ppo_reward(ev(3, total=5)) == pytest.approx(0.6)
    assert ppo_reward(ev(0, compile_ok=False)) == 0.0
    assert ppo_reward(ev(5, total=5)) == 1.0
    assert ppo_reward(ev(0, aborted=True)) == 0.0


# ---- randomized property suite ----

def random_eval(rng):
    roll = rng.random()
    if roll < 0.2:
        return ev(0, compile_ok=False, code=f"module x{rng.random()}; endmodule")
    if roll < 0.3:
        return ev(0, aborted=True, code=f"module x{rng.random()}; endmodule")
    total = rng.randint(1, 8)
    return ev(rng.randint(0, total), total=total,
              code=f"module x{rng.random()}; endmodule")


def test_randomized_pair_properties():
    rng = random.Random(1234)
    for _ in range(1000):
        a, b = random_eval(rng), random_eval(rng)
        tb_pair = build_pair_testbench("s", a, b)
        wf_pair = build_pair_with_fails("s", a, b)

        if isinstance(tb_pair, PreferencePair):
            assert a.compile_ok and b.compile_ok
            assert not a.aborted and not b.aborted
            assert tb_pair.chosen_passed > tb_pair.rejected_passed
        elif a.compile_ok and b.compile_ok and not a.aborted and not b.aborted:
            assert tb_pair == Discard("tie")
            assert a.passed == b.passed

        emitted_wf = isinstance(wf_pair, PreferencePair) and \
            wf_pair.method is PairMethod.TestbenchWithFails
        assert emitted_wf == (a.compile_ok != b.compile_ok)

        # symmetry
        assert build_pair_testbench("s", b, a) == tb_pair
        assert build_pair_with_fails("s", b, a) == wf_pair


def test_accounting_pairs_plus_discards():
    rng = random.Random(7)
    outcomes = []
    for _ in range(200):
        a, b = random_eval(rng), random_eval(rng)
        outcomes.append(build_pair_testbench("s", a, b))
    pairs = sum(isinstance(o, PreferencePair) for o in outcomes)
    discards = sum(isinstance(o, Discard) for o in outcomes)
    assert pairs + discards == 200


def test_build_pairs_cap():
    evals = [ev(i, total=8, code=f"module m{i}; endmodule") for i in range(5)]
    outcomes = build_pairs("s", REF, evals, PairMethod.Testbench, cap=3)
    pairs = [o for o in outcomes if isinstance(o, PreferencePair)]
    assert len(pairs) == 3


# ---- corpus filter ----

def test_code_line_count_skips_blank_and_comments():
    code = """\
module m;
// a comment

/* block
   comment */
assign x = 1; // trailing comment counts as code
endmodule
"""
    assert code_line_count(code) == 3


def test_fifty_line_filter_boundary():
    code = "\n".join(f"assign x{i} = {i};" for i in range(50))
    assert code_line_count(code) == 50
    assert code_line_count(code + "\nassign y = 0;") == 51
