"""Candidate sampling, testbench evaluation, and preference-pair construction.

A pair prefers the candidate with more passed testcases (testbench rule) or
higher similarity to the reference code (ablation rules). Ties are always
discarded: preference needs a strict inequality, equal evidence carries no
learning signal. Candidates that abort at runtime are discarded wherever a
pass count or similarity is compared; the compile-status rule
(tb-with-fails) looks at compile status alone, so a compiling-but-aborting
candidate still beats one with syntax errors.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from enum import Enum
from typing import Sequence, Union

from tbforge.errors import EmptyInput, LexError, ParseError
from tbforge.frontend import extract_dfg, lex, parse_module
from tbforge.llm.client import ChatRequest, Message, complete
from tbforge.llm.postprocess import extract_code_block
from tbforge.errors import NoCodeFound
from tbforge.pipeline import TestbenchRecord
from tbforge.sim.outcomes import CompileError, RuntimeAbort, SimOutcome
from tbforge.similarity import ast_similarity, bleu, dfg_similarity


class PairMethod(Enum):
    Testbench = "testbench"
    Bleu = "bleu"
    Ast = "ast"
    Dfg = "dfg"
    TestbenchWithFails = "tb-with-fails"


SIMILARITY_METHODS = (PairMethod.Bleu, PairMethod.Ast, PairMethod.Dfg)

# With more than two candidates per spec, emit at most this many strict
# pairs per spec unless configured otherwise.
DEFAULT_PAIR_CAP = 4


@dataclass(frozen=True)
class CandidateEval:
    code: str
    compile_ok: bool
    outcome: SimOutcome | None
    passed: int
    total: int
    aborted: bool = False
    no_code: bool = False

    def __post_init__(self):
        if not self.compile_ok and self.passed != 0:
            raise ValueError("non-compiling candidate cannot pass testcases")
        if self.passed > self.total:
            raise ValueError("passed exceeds total")


@dataclass(frozen=True)
class PreferencePair:
    spec: str
    chosen: str
    rejected: str
    chosen_passed: int
    rejected_passed: int
    method: PairMethod

    def __post_init__(self):
        if self.method is PairMethod.Testbench:
            if self.chosen_passed <= self.rejected_passed:
                raise ValueError("testbench pair needs a strict pass-count win")


@dataclass(frozen=True)
class Discard:
    reason: str  # compile_failure | aborted | tie | parse


PairOutcome = Union[PreferencePair, Discard]


@dataclass(frozen=True)
class SamplingParams:
    n: int = 2
    temperatures: tuple[float, ...] = (0.2, 0.5, 0.8)
    top_p: float | None = 0.95
    top_k: int | None = 50
    max_tokens: int = 4096

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("need at least two candidates per spec")
        if not self.temperatures:
            raise ValueError("need at least one sampling temperature")


def sample_candidates(client, spec: str, params: SamplingParams | None = None,
                      retries: int = 3, backoff: float = 0.5) -> list[str]:
    """Draw n independent completions for a specification and extract the
    code. Responses with no code yield an empty-code marker; they evaluate
    as non-compiling."""
    params = params or SamplingParams()
    if not spec.strip():
        raise EmptyInput("empty specification")
    codes = []
    for i in range(params.n):
        temperature = params.temperatures[i % len(params.temperatures)]
        request = ChatRequest(
            messages=(Message("user", spec),),
            temperature=temperature,
            max_tokens=params.max_tokens,
            top_p=params.top_p,
            top_k=params.top_k,
        )
        response = complete(client, request, retries=retries, backoff=backoff)
        try:
            codes.append(extract_code_block(response))
        except NoCodeFound:
            codes.append("")
    return codes


def evaluate_candidate(code: str, testbench: Union[str, TestbenchRecord],
                       simulator) -> CandidateEval:
    """Compile and run one candidate under a pipeline-produced testbench."""
    tb_text = testbench.testbench if isinstance(testbench, TestbenchRecord) else testbench
    if not code.strip():
        return CandidateEval(code=code, compile_ok=False, outcome=None,
                             passed=0, total=0, no_code=True)
    outcome = simulator.run_test(code, tb_text)
    if isinstance(outcome, CompileError):
        return CandidateEval(code=code, compile_ok=False, outcome=outcome,
                             passed=0, total=0)
    if isinstance(outcome, RuntimeAbort):
        return CandidateEval(code=code, compile_ok=True, outcome=outcome,
                             passed=0, total=0, aborted=True)
    return CandidateEval(code=code, compile_ok=True, outcome=outcome,
                         passed=outcome.passed, total=outcome.total_cases)


def build_pair_testbench(spec: str, a: CandidateEval, b: CandidateEval) -> PairOutcome:
    """Prefer the candidate passing more testcases; discard compile
    failures, aborts, and ties."""
    if not a.compile_ok or not b.compile_ok:
        return Discard("compile_failure")
    if a.aborted or b.aborted:
        return Discard("aborted")
    if a.passed == b.passed:
        return Discard("tie")
    chosen, rejected = (a, b) if a.passed > b.passed else (b, a)
    return PreferencePair(spec=spec, chosen=chosen.code, rejected=rejected.code,
                          chosen_passed=chosen.passed,
                          rejected_passed=rejected.passed,
                          method=PairMethod.Testbench)


def _similarity_to_reference(method: PairMethod, candidate_code: str,
                             reference_code: str) -> float:
    if method is PairMethod.Bleu:
        return bleu(lex(candidate_code), lex(reference_code)).value
    if method is PairMethod.Ast:
        return ast_similarity(parse_module(lex(candidate_code)),
                              parse_module(lex(reference_code))).value
    if method is PairMethod.Dfg:
        return dfg_similarity(extract_dfg(parse_module(lex(candidate_code))),
                              extract_dfg(parse_module(lex(reference_code)))).value
    raise ValueError(f"not a similarity method: {method}")


def build_pair_similarity(spec: str, reference_code: str, a: CandidateEval,
                          b: CandidateEval, method: PairMethod) -> PairOutcome:
    """Prefer the candidate more similar to the reference code; both
    candidates must compile, and parse failures or ties discard the pair."""
    if method not in SIMILARITY_METHODS:
        raise ValueError(f"not a similarity method: {method}")
    if not a.compile_ok or not b.compile_ok:
        return Discard("compile_failure")
    if a.aborted or b.aborted:
        return Discard("aborted")
    try:
        score_a = _similarity_to_reference(method, a.code, reference_code)
        score_b = _similarity_to_reference(method, b.code, reference_code)
    except (ParseError, LexError, EmptyInput):
        return Discard("parse")
    if score_a == score_b:
        return Discard("tie")
    chosen, rejected = (a, b) if score_a > score_b else (b, a)
    return PreferencePair(spec=spec, chosen=chosen.code, rejected=rejected.code,
                          chosen_passed=chosen.passed,
                          rejected_passed=rejected.passed,
                          method=method)


def build_pair_with_fails(spec: str, a: CandidateEval, b: CandidateEval) -> PairOutcome:
    """Compile-status rule: a syntax-valid candidate is preferred over one
    with syntax errors; equal compile statuses fall back to the testbench
    rule (both ok) or discard (both failed)."""
    if a.compile_ok != b.compile_ok:
        chosen, rejected = (a, b) if a.compile_ok else (b, a)
        return PreferencePair(spec=spec, chosen=chosen.code, rejected=rejected.code,
                              chosen_passed=chosen.passed,
                              rejected_passed=rejected.passed,
                              method=PairMethod.TestbenchWithFails)
    if not a.compile_ok:
        return Discard("compile_failure")
    return build_pair_testbench(spec, a, b)


def build_pairs(spec: str, reference_code: str, evals: Sequence[CandidateEval],
                method: PairMethod, cap: int = DEFAULT_PAIR_CAP) -> list[PairOutcome]:
    """All strict pairs over the candidate set, capped per spec."""
    outcomes: list[PairOutcome] = []
    emitted = 0
    for a, b in itertools.combinations(evals, 2):
        if method is PairMethod.Testbench:
            outcome = build_pair_testbench(spec, a, b)
        elif method is PairMethod.TestbenchWithFails:
            outcome = build_pair_with_fails(spec, a, b)
        else:
            outcome = build_pair_similarity(spec, reference_code, a, b, method)
        if isinstance(outcome, PreferencePair):
            if emitted >= cap:
                continue
            emitted += 1
        outcomes.append(outcome)
    return outcomes


def ppo_reward(candidate: CandidateEval) -> float:
    """Reward in [0, 1]: the proportion of testcases passed; compile
    failures and aborts earn 0."""
    if not candidate.compile_ok or candidate.aborted or candidate.total == 0:
        return 0.0
    return candidate.passed / candidate.total


_COMMENT_ONLY = re.compile(r"^\s*(//.*)?$")


def code_line_count(code: str) -> int:
    """Count non-blank lines that are not comment-only; block comments are
    stripped first. Used by the corpus-prep filter for RL data."""
    without_blocks = re.sub(r"/\*.*?\*/", "", code, flags=re.DOTALL)
    return sum(1 for line in without_blocks.splitlines()
               if not _COMMENT_ONLY.match(line))
