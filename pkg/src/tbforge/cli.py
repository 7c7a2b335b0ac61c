"""Command-line entry points tying the toolkit into batch workflows.

Outputs are JSONL (streamable, append-safe, diff-friendly); logs are
line-oriented with stage tags. Batch commands run a bounded worker pool
over input rows and write results in input order, so repeat runs produce
byte-identical files.

Exit codes: 0 success, 1 usage/config, 2 IO, 3 backend unavailable.
Per-row pipeline terminations are reported in the summary, never as a
nonzero exit.
"""

from __future__ import annotations

import json
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import click

from tbforge import corpus
from tbforge.config import load_config, make_chat_client_factory, \
    make_simulator_factory
from tbforge.errors import (
    ConfigError,
    EmptyInput,
    KExceedsN,
    LexError,
    NonPositiveBeta,
    ParseError,
    RateLimited,
    TbforgeError,
    ToolMissing,
    TransportError,
)
from tbforge.dpo import DEFAULT_BETA, PairLogProbs, dpo_loss, random_grad_check
from tbforge.frontend import extract_dfg, lex, parse_module
from tbforge.metrics import TaskResults, pass_at_k
from tbforge.pipeline import Finished, TestbenchPipeline
from tbforge.preference import (
    PairMethod,
    PreferencePair,
    SamplingParams,
    build_pairs,
    code_line_count,
    evaluate_candidate,
    sample_candidates,
)
from tbforge.similarity import ast_similarity, bleu, dfg_similarity

log = logging.getLogger("tbforge")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_IO = 2
EXIT_BACKEND = 3

METHOD_CHOICES = [m.value for m in PairMethod]


@click.group()
@click.option("--verbose", is_flag=True, help="Log at debug level.")
def cli(verbose):
    logging.basicConfig(stream=sys.stderr, level=logging.DEBUG if verbose else logging.INFO,
                        format="%(levelname)s %(message)s")


# ---- gen-testbench ----

@cli.command("gen-testbench")
@click.option("--input", "input_path", required=True, type=click.Path(exists=True),
              help="Spec/code JSONL with id, spec, code fields.")
@click.option("--out", "out_path", required=True, type=click.Path(),
              help="Output testbench JSONL.")
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--jobs", default=1, show_default=True,
              help="Bounded worker pool; also caps concurrent simulators.")
@click.option("--min-code-lines", default=0, show_default=True,
              help="Skip rows whose code has at most this many real lines.")
@click.option("--trace-log", "trace_path", type=click.Path(), default=None,
              help="Write per-row stage traces to this file.")
def cmd_gen_testbench(input_path, out_path, config_path, jobs, min_code_lines,
                      trace_path):
    """Run the testbench pipeline over a spec/code corpus."""
    config = load_config(config_path)
    client_factory = make_chat_client_factory(config)
    simulator_factory = make_simulator_factory(config)

    skipped_rows = []
    pairs = corpus.load_spec_code_pairs(
        input_path,
        on_error=lambda lineno, msg: skipped_rows.append((lineno, msg)))
    for lineno, msg in skipped_rows:
        log.error("[input] line %s skipped: %s", lineno, msg)

    if min_code_lines > 0:
        before = len(pairs)
        pairs = [p for p in pairs if code_line_count(p.code) > min_code_lines]
        log.info("[input] %d of %d rows pass the %d-line filter",
                 len(pairs), before, min_code_lines)

    def run_row(pair):
        pipeline = TestbenchPipeline(
            client_factory(), simulator_factory(), config.pipeline,
            temperature=config.llm.temperature,
            max_tokens=config.llm.max_tokens,
            retries=config.llm.retries,
            backoff=config.llm.backoff_seconds,
        )
        return pipeline.run(pair)

    with ThreadPoolExecutor(max_workers=max(1, jobs)) as pool:
        results = list(pool.map(run_row, pairs))

    trace_lines = []
    rows = []
    termination_counts: dict[str, int] = {}
    for pair, result in zip(pairs, results):
        for entry in result.trace:
            trace_lines.append(
                f"{pair.id} [{entry.stage.value}] {entry.action} {entry.status}")
        if isinstance(result.outcome, Finished):
            rows.append(corpus.testbench_row(pair.id, result.outcome.record))
            trace_lines.append(f"{pair.id} [finish] ok")
        else:
            stage = result.outcome.stage.value
            termination_counts[stage] = termination_counts.get(stage, 0) + 1
            log.warning("[terminated] %s at %s after %d attempts", pair.id,
                        stage, result.outcome.attempts)
            trace_lines.append(
                f"{pair.id} [terminate] {stage} attempts={result.outcome.attempts}")

    corpus.write_jsonl(out_path, rows)
    if trace_path:
        Path(trace_path).write_text("\n".join(trace_lines) + "\n", encoding="utf-8")

    click.echo(f"rows: {len(pairs)}  finished: {len(rows)}  "
               f"terminated: {sum(termination_counts.values())}  "
               f"skipped_input_lines: {len(skipped_rows)}")
    for stage in sorted(termination_counts):
        click.echo(f"  terminated at {stage}: {termination_counts[stage]}")


# ---- collect-pairs ----

@cli.command("collect-pairs")
@click.option("--specs", "specs_path", required=True, type=click.Path(exists=True))
@click.option("--testbenches", "tb_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--method", required=True, type=click.Choice(METHOD_CHOICES))
@click.option("--n", "n_candidates", default=None, type=int,
              help="Candidates per spec (default: sampling.n from config).")
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--evals-out", "evals_path", type=click.Path(), default=None,
              help="Also write per-candidate evaluation rows.")
@click.option("--jobs", default=1, show_default=True)
def cmd_collect_pairs(specs_path, tb_path, out_path, method, n_candidates,
                      config_path, evals_path, jobs):
    """Sample candidate codes and build preference pairs against testbenches."""
    config = load_config(config_path)
    client_factory = make_chat_client_factory(config)
    simulator_factory = make_simulator_factory(config)
    pair_method = PairMethod(method)

    specs = corpus.load_spec_code_pairs(
        specs_path, on_error=lambda lineno, msg: log.error(
            "[specs] line %s skipped: %s", lineno, msg))
    tb_rows = {row["id"]: row for row in corpus.read_jsonl(tb_path)}
    corpus.check_unique_ids(list(tb_rows.values()))

    sampling = config.sampling
    if n_candidates is not None:
        sampling = SamplingParams(n=n_candidates,
                                  temperatures=sampling.temperatures,
                                  top_p=sampling.top_p, top_k=sampling.top_k,
                                  max_tokens=sampling.max_tokens)

    joined = [(spec, tb_rows[spec.id]) for spec in specs if spec.id in tb_rows]
    missing = len(specs) - len(joined)
    if missing:
        log.info("[join] %d specs have no testbench and are skipped", missing)

    def run_row(item):
        spec, tb_row = item
        client = client_factory()
        simulator = simulator_factory()
        codes = sample_candidates(client, spec.spec, sampling,
                                  retries=config.llm.retries,
                                  backoff=config.llm.backoff_seconds)
        evals = [evaluate_candidate(code, tb_row["tb"], simulator)
                 for code in codes]
        outcomes = build_pairs(spec.spec, spec.code, evals, pair_method,
                               cap=config.max_pairs_per_spec)
        return evals, outcomes

    with ThreadPoolExecutor(max_workers=max(1, jobs)) as pool:
        per_row = list(pool.map(run_row, joined))

    pair_rows = []
    eval_rows = []
    discard_counts: dict[str, int] = {}
    for (spec, _), (evals, outcomes) in zip(joined, per_row):
        for idx, evaluation in enumerate(evals):
            eval_rows.append(corpus.eval_row(spec.id, idx, evaluation))
        emitted_for_spec = 0
        for outcome in outcomes:
            if isinstance(outcome, PreferencePair):
                pair_id = spec.id if len(outcomes) == 1 else \
                    f"{spec.id}#{emitted_for_spec}"
                pair_rows.append(corpus.pair_row(pair_id, outcome))
                emitted_for_spec += 1
            else:
                discard_counts[outcome.reason] = \
                    discard_counts.get(outcome.reason, 0) + 1

    corpus.write_jsonl(out_path, pair_rows)
    if evals_path:
        corpus.write_jsonl(evals_path, eval_rows)

    click.echo(f"specs: {len(joined)}  pairs: {len(pair_rows)}  "
               f"discards: {sum(discard_counts.values())}  method: {method}")
    for reason in sorted(discard_counts):
        click.echo(f"  discarded ({reason}): {discard_counts[reason]}")


# ---- passk ----

@cli.command("passk")
@click.option("--results", "results_path", required=True, type=click.Path(exists=True),
              help="Task results JSONL: task, n, c_syntax, c_function.")
@click.option("--k", "k_list", required=True,
              help="Comma-separated k values, e.g. 1,5,10.")
@click.option("--n", "default_n", default=20, show_default=True,
              help="Trials per task for rows that omit n.")
@click.option("--mode", type=click.Choice(["syntax", "function"]),
              default="function", show_default=True)
@click.option("--out", "out_path", type=click.Path(), default=None,
              help="Write the metrics JSON here instead of stdout.")
def cmd_passk(results_path, k_list, default_n, mode, out_path):
    """Unbiased pass@k over per-task outcome counts."""
    try:
        ks = [int(part) for part in k_list.split(",") if part.strip()]
    except ValueError:
        raise ConfigError(f"bad --k list: {k_list!r}")
    if not ks:
        raise ConfigError("empty --k list")

    tasks = []
    for row in corpus.read_jsonl(results_path):
        tasks.append(TaskResults(
            task=str(row["task"]),
            n=int(row.get("n", default_n)),
            c_syntax=int(row["c_syntax"]),
            c_function=int(row["c_function"]),
        ))

    summary = {"mode": mode, "tasks": len(tasks), "results": {}}
    for k in ks:
        summary["results"][f"pass@{k}"] = pass_at_k(tasks, k, mode)
    text = json.dumps(summary, indent=2)
    if out_path:
        Path(out_path).write_text(text + "\n", encoding="utf-8")
    else:
        click.echo(text)


# ---- similarity ----

@cli.command("similarity")
@click.option("--method", required=True, type=click.Choice(["bleu", "ast", "dfg"]))
@click.argument("file_a", type=click.Path(exists=True))
@click.argument("file_b", type=click.Path(exists=True))
def cmd_similarity(method, file_a, file_b):
    """Score FILE_A (candidate) against FILE_B (reference)."""
    source_a = Path(file_a).read_text(encoding="utf-8")
    source_b = Path(file_b).read_text(encoding="utf-8")
    if method == "bleu":
        score = bleu(lex(source_a), lex(source_b))
    elif method == "ast":
        score = ast_similarity(parse_module(lex(source_a)),
                               parse_module(lex(source_b)))
    else:
        score = dfg_similarity(extract_dfg(parse_module(lex(source_a))),
                               extract_dfg(parse_module(lex(source_b))))
    click.echo(f"{score.value:.6f}")


# ---- dpo ----

@cli.command("dpo")
@click.option("--pairs", "pairs_path", type=click.Path(exists=True), default=None,
              help="Pair log-probability JSONL.")
@click.option("--beta", default=DEFAULT_BETA, show_default=True)
@click.option("--gradcheck", "gradcheck_seeds", type=int, default=None,
              help="Run this many seeded finite-difference gradient checks.")
@click.option("--out", "out_path", type=click.Path(), default=None)
def cmd_dpo(pairs_path, beta, gradcheck_seeds, out_path):
    """Preference-loss report and optional gradient check."""
    if beta <= 0:
        raise NonPositiveBeta(f"--beta must be > 0, got {beta}")
    if pairs_path is None and gradcheck_seeds is None:
        raise ConfigError("nothing to do: pass --pairs and/or --gradcheck")

    report = {"beta": beta}
    if pairs_path is not None:
        batch = []
        for row in corpus.read_jsonl(pairs_path):
            batch.append(PairLogProbs(
                policy_chosen=float(row["policy_chosen"]),
                ref_chosen=float(row["ref_chosen"]),
                policy_rejected=float(row["policy_rejected"]),
                ref_rejected=float(row["ref_rejected"]),
            ))
        report["pairs"] = len(batch)
        report["mean_loss"] = dpo_loss(batch, beta=beta)

    if gradcheck_seeds is not None:
        tolerance = 1e-5
        errors = [random_grad_check(seed, beta=beta)
                  for seed in range(gradcheck_seeds)]
        report["gradcheck"] = {
            "seeds": gradcheck_seeds,
            "max_rel_error": max(errors) if errors else 0.0,
            "tolerance": tolerance,
            "pass": bool(errors and max(errors) < tolerance),
        }

    text = json.dumps(report, indent=2)
    if out_path:
        Path(out_path).write_text(text + "\n", encoding="utf-8")
    else:
        click.echo(text)


# ---- simulate ----

@cli.command("simulate")
@click.option("--dut", "dut_path", required=True, type=click.Path(exists=True))
@click.option("--tb", "tb_path", required=True, type=click.Path(exists=True))
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
def cmd_simulate(dut_path, tb_path, config_path):
    """Compile and run one DUT/testbench pair; print the parsed outcome."""
    config = load_config(config_path)
    simulator = make_simulator_factory(config)()
    outcome = simulator.run_test(Path(dut_path).read_text(encoding="utf-8"),
                                 Path(tb_path).read_text(encoding="utf-8"))
    click.echo(json.dumps(corpus.outcome_json(outcome), indent=2))


def main(argv=None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False)
        return EXIT_OK
    except click.exceptions.Abort:
        return EXIT_USAGE
    except click.ClickException as exc:
        exc.show(file=sys.stderr)
        return EXIT_USAGE
    except (ConfigError, NonPositiveBeta, KExceedsN, EmptyInput,
            ParseError, LexError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ToolMissing, TransportError, RateLimited) as exc:
        print(f"backend unavailable: {exc}", file=sys.stderr)
        return EXIT_BACKEND
    except corpus.JsonlError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO
    except TbforgeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        # e.g. duplicate ids or schema violations in input corpora
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
