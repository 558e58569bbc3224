"""Reduction orchestration: alternate the generic reducer with LLM-driven
transformations until the program size reaches a fixpoint.

Loop shape: one initial generic reduction, then repeat {remember best; for
each transformation: ask for targets, transform each target keeping the
smallest passing candidate, re-run the generic reducer} until an iteration
fails to strictly shrink the program.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from pathlib import Path

from . import tree as T
from .errors import AuthError, OracleSetupError, RateLimited, TransportError
from .llm import LlmClient, LlmRequest, extract_code, parse_target_list
from .program import SourceProgram
from .reducer import ReductionConfig, perses_reduce
from .transforms import TransformationSpec, instantiate

SYSTEM_PROMPT = (
    "You are a source-to-source program transformation assistant. "
    "Apply exactly the requested transformation and keep the program's "
    "behavior relevant to the user's test unchanged."
)


@dataclass
class Budgets:
    max_iterations: int | None = None
    max_llm_queries: int | None = None
    wall_clock_seconds: float | None = None


@dataclass
class SamplingConfig:
    temperature: float = 1.0
    n: int = 5
    model_id: str = "gpt-3.5-turbo"


class _BudgetExhausted(Exception):
    pass


@dataclass
class RunState:
    current: SourceProgram
    best: SourceProgram
    iteration: int = 0
    events: list[dict] = field(default_factory=list)
    completed: bool = True

    def log(self, phase, **fields):
        event = {"seq": len(self.events), "phase": phase, "ts": time.time()}
        event.update(fields)
        self.events.append(event)
        return event


def accept_candidate(current: SourceProgram, candidates: list[SourceProgram]) -> SourceProgram:
    """Smallest passing candidate, ties broken by completion order; the
    current program when there are none. Candidates larger than the current
    program are still accepted: the follow-up generic reduction exploits
    them, and monotonicity is enforced only at the outer loop."""
    if not candidates:
        return current
    return min(candidates, key=lambda p: p.token_count)


class Orchestrator:
    def __init__(self, oracle, transforms, llm_client: LlmClient,
                 sampling: SamplingConfig | None = None,
                 reducer_cfg: ReductionConfig | None = None,
                 budgets: Budgets | None = None,
                 prompting: str = "multi",
                 run_dir=None):
        if prompting not in ("multi", "single"):
            raise ValueError("prompting must be 'multi' or 'single'")
        self.oracle = oracle
        self.transforms = list(transforms)
        self.llm = llm_client
        self.sampling = sampling or SamplingConfig()
        self.reducer_cfg = reducer_cfg or ReductionConfig()
        self.budgets = budgets or Budgets()
        self.prompting = prompting
        self.run_dir = Path(run_dir) if run_dir else None
        self._start_time = None
        self._candidate_seq = 0
        if self.run_dir:
            (self.run_dir / "iterations").mkdir(parents=True, exist_ok=True)
            (self.run_dir / "candidates").mkdir(parents=True, exist_ok=True)

    # -- public entry point -------------------------------------------------

    def run(self, program: SourceProgram) -> tuple[SourceProgram, RunState]:
        if not self.oracle.check(program):
            raise OracleSetupError("the input program does not satisfy the property")
        self._start_time = time.monotonic()
        state = RunState(current=program, best=program)
        try:
            state.current = self._reduce(state, trigger="initial")
            while True:
                state.best = state.current
                state.iteration += 1
                state.log("iteration", n=state.iteration,
                          size=state.current.token_count)
                self._snapshot_iteration(state)
                for spec in self.transforms:
                    self.apply_transformation(state, spec)
                    state.current = self._reduce(state, trigger=spec.name)
                if state.current.token_count >= state.best.token_count:
                    break
                self._check_budgets(state)
        except _BudgetExhausted:
            state.completed = False
            if state.current.token_count < state.best.token_count:
                state.best = state.current
        state.log("done", size=state.best.token_count, completed=state.completed)
        self._flush_events(state)
        return state.best, state

    # -- transformation rounds ----------------------------------------------

    def apply_transformation(self, state: RunState, spec: TransformationSpec):
        size_before = state.current.token_count
        accepted_any = False
        if self.prompting == "multi":
            targets = self._ask_targets(state, spec)
            for target in targets:
                accepted_any |= self._transform_once(
                    state, spec, spec.followup_question, target)
        else:
            state.log("primary", transformation=spec.name, targets=None,
                      mode="single")
            accepted_any |= self._transform_once(
                state, spec, spec.single_level_question, None)
        state.log("transform_summary", transformation=spec.name,
                  size_before=size_before,
                  size_after_llm=state.current.token_count,
                  accepted=accepted_any)
        return state

    def _ask_targets(self, state: RunState, spec: TransformationSpec) -> list[str]:
        prompt = instantiate(spec.primary_question, state.current.text)
        completions = self._query(state, prompt)
        # First completion that parses to a non-empty list wins.
        targets: list[str] = []
        for completion in completions:
            targets = parse_target_list(completion)
            if targets:
                break
        state.log("primary", transformation=spec.name, targets=list(targets))
        return targets

    def _transform_once(self, state: RunState, spec, template, target) -> bool:
        self._check_budgets(state)
        prompt = instantiate(template, state.current.text, target)
        completions = self._query(state, prompt)
        candidates = []
        rejected = 0
        unparseable = 0
        for completion in completions:
            text = extract_code(completion)
            try:
                parsed = T.parse(text, state.current.grammar)
            except Exception:
                unparseable += 1
                continue  # rejected without an oracle query
            candidate = SourceProgram.from_tree(parsed)
            self._persist_candidate(candidate, spec.name, target)
            if self.oracle.check(candidate):
                candidates.append(candidate)
            else:
                rejected += 1
        chosen = accept_candidate(state.current, candidates)
        accepted = chosen is not state.current
        state.log("followup", transformation=spec.name, target=target,
                  candidate_sizes=[c.token_count for c in candidates],
                  rejected=rejected, unparseable=unparseable,
                  accepted=accepted,
                  size=chosen.token_count,
                  oracle=vars(self.oracle.snapshot_counters()))
        state.current = chosen
        return accepted

    def _query(self, state: RunState, prompt: str) -> list[str]:
        if self.budgets.max_llm_queries is not None \
                and self.llm.stats.queries >= self.budgets.max_llm_queries:
            raise _BudgetExhausted("LLM query budget exhausted")
        request = LlmRequest(
            system_prompt=SYSTEM_PROMPT,
            user_prompt=prompt,
            temperature=self.sampling.temperature,
            n=self.sampling.n,
            model_id=self.sampling.model_id,
        )
        try:
            return self.llm.complete(request).completions
        except AuthError:
            raise
        except (RateLimited, TransportError) as exc:
            # One failing query degrades to "no candidates", never aborts.
            state.log("llm_error", error=str(exc))
            return []

    # -- plumbing -------------------------------------------------------------

    def _reduce(self, state: RunState, trigger: str) -> SourceProgram:
        parsed = state.current.parse()
        outcome = perses_reduce(parsed, self.oracle, self.reducer_cfg)
        state.log("reduce", trigger=trigger,
                  size_before=outcome.size_before, size_after=outcome.size_after,
                  oracle_queries=outcome.oracle_queries,
                  invalid_candidates=outcome.invalid_candidates)
        self._check_budgets(state)
        return outcome.program

    def _check_budgets(self, state: RunState):
        b = self.budgets
        if b.max_iterations is not None and state.iteration >= b.max_iterations:
            raise _BudgetExhausted("iteration budget exhausted")
        if b.wall_clock_seconds is not None \
                and time.monotonic() - self._start_time > b.wall_clock_seconds:
            raise _BudgetExhausted("wall-clock budget exhausted")
        if b.max_llm_queries is not None \
                and self.llm.stats.queries > b.max_llm_queries:
            raise _BudgetExhausted("LLM query budget exhausted")

    def _persist_candidate(self, candidate, transformation, target):
        if not self.run_dir:
            return
        name = f"{self._candidate_seq:05d}_{transformation}.txt"
        self._candidate_seq += 1
        (self.run_dir / "candidates" / name).write_text(candidate.text)

    def _snapshot_iteration(self, state: RunState):
        if not self.run_dir:
            return
        path = self.run_dir / "iterations" / f"iter_{state.iteration:03d}.txt"
        path.write_text(state.current.text)

    def _flush_events(self, state: RunState):
        if not self.run_dir:
            return
        with open(self.run_dir / "events.jsonl", "w") as fh:
            for event in state.events:
                fh.write(json.dumps(event, sort_keys=True) + "\n")


def attribute_sizes(events: list[dict]) -> dict[str, dict]:
    """Per-transformation size attribution from the event log.

    For every transformation round the "alone" delta is the size change from
    the LLM phase and the "combined" delta additionally includes the generic
    reduction that follows it. Means are taken over rounds where the
    transformation changed the program; a transformation that never fired
    reports zeros.
    """
    rounds: dict[str, list[tuple[int, int]]] = {}
    pending: dict | None = None
    for event in events:
        if event["phase"] == "transform_summary":
            pending = event
        elif event["phase"] == "reduce" and pending is not None \
                and event.get("trigger") == pending["transformation"]:
            alone = pending["size_after_llm"] - pending["size_before"]
            combined = event["size_after"] - pending["size_before"]
            if pending["accepted"]:
                rounds.setdefault(pending["transformation"], []).append((alone, combined))
            else:
                rounds.setdefault(pending["transformation"], [])
            pending = None
    out = {}
    for name, deltas in rounds.items():
        if deltas:
            alone = [a for a, _ in deltas]
            combined = [c for _, c in deltas]
            out[name] = {
                "rounds": len(deltas),
                "mean_alone": sum(alone) / len(alone),
                "mean_combined": sum(combined) / len(combined),
                "decrease_count": sum(1 for c in combined if c < 0),
            }
        else:
            out[name] = {"rounds": 0, "mean_alone": 0.0,
                         "mean_combined": 0.0, "decrease_count": 0}
    return out
