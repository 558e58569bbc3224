"""Command-line entry point: single-run reduction and a benchmark batch
runner.

Exit codes: 0 success, 1 configuration error, 2 oracle setup failure,
3 budget-forced stop (the partial result is still written).
"""

from __future__ import annotations

import argparse
import datetime as _dt
import json
import subprocess
import sys
import time
from pathlib import Path

from . import grammar as G
from .errors import AuthError, CodetrimError, OracleSetupError, SchemaError
from .llm import LiveTransport, LlmClient, MockTransport
from .oracle import ScriptOracle
from .orchestrator import Budgets, Orchestrator, SamplingConfig
from .program import SourceProgram
from .reducer import ReductionConfig
from .report import ReductionReport, bench_csv_rows
from .transforms import builtin_transformations, load_custom

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_ORACLE = 2
EXIT_BUDGET = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_CONFIG)


def _add_reduce_flags(p):
    p.add_argument("--input", required=True, help="program file to reduce")
    p.add_argument("--test", required=True, help="interestingness script")
    p.add_argument("--lang", default=None, help="built-in grammar id (c, js)")
    p.add_argument("--grammar", default=None, help="grammar definition file")
    p.add_argument("--model", default="gpt-3.5-turbo")
    p.add_argument("--temperature", type=float, default=1.0)
    p.add_argument("--num-responses", type=int, default=5)
    p.add_argument("--transforms", default=None, help="transformation file")
    p.add_argument("--prompting", choices=["multi", "single"], default="multi")
    p.add_argument("--mock-fixtures", default=None,
                   help="fixture directory; selects the offline mock transport")
    p.add_argument("--base-url", default="https://api.openai.com/v1")
    p.add_argument("--max-iterations", type=int, default=None)
    p.add_argument("--max-llm-queries", type=int, default=None)
    p.add_argument("--wall-clock-budget", type=float, default=None,
                   help="seconds")
    p.add_argument("--timeout", type=float, default=60.0,
                   help="per-check oracle timeout in seconds")
    p.add_argument("--jobs", type=int, default=1,
                   help="max concurrent oracle checks (script must be parallel-safe)")
    p.add_argument("--out-dir", default=None)
    p.add_argument("--max-passes", type=int, default=20)
    p.add_argument("--no-replacement", action="store_true",
                   help="disable same-kind subtree replacement in the reducer")


def build_parser():
    parser = _Parser(prog="codetrim")
    sub = parser.add_subparsers(dest="command", required=True)
    _add_reduce_flags(sub.add_parser("reduce", help="reduce one program"))
    bench = sub.add_parser("bench", help="run a benchmark corpus")
    bench.add_argument("--corpus", required=True)
    bench.add_argument("--config", action="append", required=True,
                       help="generic | llm | external:<command>; repeatable")
    bench.add_argument("--repeat", type=int, default=5)
    bench.add_argument("--out", default=None, help="CSV output path")
    bench.add_argument("--timeout", type=float, default=60.0)
    bench.add_argument("--max-passes", type=int, default=20)
    return parser


def _load_grammar(args):
    if args.grammar:
        return G.load_file(args.grammar)
    if args.lang:
        return G.builtin(args.lang)
    raise G.GrammarError("one of --lang or --grammar is required")


def _config_error(message):
    print(f"error: {message}", file=sys.stderr)
    return EXIT_CONFIG


def _make_run_dir(out_dir):
    base = Path(out_dir) if out_dir else Path.cwd()
    stamp = _dt.datetime.now().strftime("%Y%m%dT%H%M%S.%f")
    run_dir = base / "run" / stamp
    run_dir.mkdir(parents=True)
    return run_dir


def cmd_reduce(args) -> int:
    try:
        grammar = _load_grammar(args)
        input_path = Path(args.input)
        if not input_path.is_file():
            return _config_error(f"input file not found: {input_path}")
        transforms = (load_custom(args.transforms) if args.transforms
                      else builtin_transformations())
        if args.mock_fixtures:
            transport = MockTransport.from_fixture_dir(args.mock_fixtures)
        else:
            transport = LiveTransport(base_url=args.base_url)
    except (SchemaError, G.GrammarError, OSError, ValueError, KeyError) as exc:
        return _config_error(str(exc))

    try:
        oracle = ScriptOracle(args.test, candidate_name=input_path.name,
                              timeout=args.timeout)
        program = SourceProgram(input_path.read_text(), grammar)
        run_dir = _make_run_dir(args.out_dir)
        orchestrator = Orchestrator(
            oracle=oracle,
            transforms=transforms,
            llm_client=LlmClient(
                transport,
                backoff=0.0 if args.mock_fixtures else 1.0),
            sampling=SamplingConfig(temperature=args.temperature,
                                    n=args.num_responses,
                                    model_id=args.model),
            reducer_cfg=ReductionConfig(
                max_passes=args.max_passes,
                enable_subtree_replacement=not args.no_replacement),
            budgets=Budgets(max_iterations=args.max_iterations,
                            max_llm_queries=args.max_llm_queries,
                            wall_clock_seconds=args.wall_clock_budget),
            prompting=args.prompting,
            run_dir=run_dir,
        )
        start = time.monotonic()
        original_tokens = program.token_count
        result, state = orchestrator.run(program)
        wall_time = time.monotonic() - start
    except OracleSetupError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ORACLE
    except AuthError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    min_path = input_path.with_name(input_path.name + ".min")
    min_path.write_text(result.text)
    report = ReductionReport.from_run(
        state, original_tokens, wall_time,
        oracle.snapshot_counters(), orchestrator.llm.stats,
        model_id=args.model)
    (run_dir / "report.json").write_text(report.to_json())
    (run_dir / "report.txt").write_text(report.render_text())
    sys.stdout.write(report.render_text())
    print(f"wrote {min_path}")
    return EXIT_OK if state.completed else EXIT_BUDGET


def _bench_one(entry_dir: Path, config: str, timeout, max_passes):
    manifest = json.loads((entry_dir / "manifest.json").read_text())
    grammar = G.builtin(manifest["language"])
    program = SourceProgram((entry_dir / manifest["program"]).read_text(), grammar)
    script = entry_dir / manifest["script"]
    oracle = ScriptOracle(script, candidate_name=manifest["program"],
                          timeout=timeout)
    start = time.monotonic()
    if config == "generic":
        from .reducer import perses_reduce
        outcome = perses_reduce(program.parse(), oracle,
                                ReductionConfig(max_passes=max_passes))
        size = outcome.size_after
    elif config == "llm":
        fixtures = entry_dir / manifest.get("fixtures", "fixtures")
        transport = MockTransport.from_fixture_dir(fixtures)
        orchestrator = Orchestrator(
            oracle=oracle, transforms=builtin_transformations(),
            llm_client=LlmClient(transport),
            reducer_cfg=ReductionConfig(max_passes=max_passes))
        result, _ = orchestrator.run(program)
        size = result.token_count
    elif config.startswith("external:"):
        command = config.split(":", 1)[1]
        size = _run_external(command, entry_dir, manifest, grammar)
    else:
        raise ValueError(f"unknown bench config {config!r}")
    return size, time.monotonic() - start


def _run_external(command, entry_dir, manifest, grammar):
    """Extension point: an external reducer command is run with the program
    and script paths substituted for {program} and {script}; it must leave
    the reduced file at <program>.min."""
    program = entry_dir / manifest["program"]
    rendered = command.format(program=program, script=entry_dir / manifest["script"])
    subprocess.run(rendered, shell=True, check=True, cwd=entry_dir)
    reduced = program.with_name(program.name + ".min")
    return len(grammar.lex(reduced.read_text()))


def cmd_bench(args) -> int:
    corpus = Path(args.corpus)
    entries = sorted(p for p in corpus.iterdir()
                     if p.is_dir() and (p / "manifest.json").is_file())
    if not entries:
        return _config_error(f"no corpus entries under {corpus}")
    results = []
    for entry in entries:
        for config in args.config:
            sizes, times = [], []
            error = None
            for _ in range(args.repeat):
                try:
                    size, elapsed = _bench_one(entry, config, args.timeout,
                                               args.max_passes)
                except Exception as exc:  # per-entry failures never stop the batch
                    error = str(exc)
                    break
                sizes.append(size)
                times.append(elapsed)
            results.append({"entry": entry.name, "config": config,
                            "sizes": sizes, "times": times, "error": error})
    csv_text = bench_csv_rows(results)
    if args.out:
        Path(args.out).write_text(csv_text)
    sys.stdout.write(csv_text)
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_CONFIG
    try:
        if args.command == "reduce":
            return cmd_reduce(args)
        return cmd_bench(args)
    except CodetrimError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
