"""Run reports: JSON for machines, an aligned table for humans, CSV for
benchmark batches."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

from .orchestrator import RunState, attribute_sizes


@dataclass
class ReductionReport:
    original_tokens: int
    final_tokens: int
    wall_time_seconds: float
    completed: bool
    iterations: int
    oracle: dict
    llm: dict
    attribution: dict
    cost_estimate: float | None = None

    @classmethod
    def from_run(cls, state: RunState, original_tokens: int,
                 wall_time: float, oracle_counters, llm_stats,
                 price_table: dict | None = None,
                 model_id: str | None = None) -> "ReductionReport":
        cost = None
        if price_table and model_id and model_id in price_table:
            prices = price_table[model_id]
            cost = (llm_stats.prompt_tokens * prices.get("prompt", 0.0)
                    + llm_stats.completion_tokens * prices.get("completion", 0.0)) / 1000.0
        return cls(
            original_tokens=original_tokens,
            final_tokens=state.best.token_count,
            wall_time_seconds=wall_time,
            completed=state.completed,
            iterations=state.iteration,
            oracle=vars(oracle_counters),
            llm={
                "queries": llm_stats.queries,
                "prompt_tokens": llm_stats.prompt_tokens,
                "completion_tokens": llm_stats.completion_tokens,
                "latency_seconds": llm_stats.latency_total,
            },
            attribution=attribute_sizes(state.events),
            cost_estimate=cost,
        )

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)

    def render_text(self) -> str:
        lines = [
            f"{'original tokens':<24}{self.original_tokens}",
            f"{'final tokens':<24}{self.final_tokens}",
            f"{'wall time':<24}{format_hms(self.wall_time_seconds)}",
            f"{'iterations':<24}{self.iterations}",
            f"{'completed':<24}{str(self.completed).lower()}",
            f"{'oracle queries':<24}{self.oracle['queries_total']}"
            f" (cache hits {self.oracle['cache_hits']},"
            f" timeouts {self.oracle['timeouts']})",
            f"{'llm queries':<24}{self.llm['queries']}",
            f"{'llm tokens':<24}{self.llm['prompt_tokens']}+"
            f"{self.llm['completion_tokens']}",
            f"{'cost estimate':<24}"
            f"{'n/a' if self.cost_estimate is None else f'${self.cost_estimate:.4f}'}",
        ]
        if self.attribution:
            lines.append("")
            lines.append(f"{'transformation':<26}{'rounds':>7}{'alone':>9}"
                         f"{'combined':>10}{'decreases':>10}")
            for name, row in self.attribution.items():
                lines.append(
                    f"{name:<26}{row['rounds']:>7}{row['mean_alone']:>9.1f}"
                    f"{row['mean_combined']:>10.1f}{row['decrease_count']:>10}")
        return "\n".join(lines) + "\n"


def format_hms(seconds: float) -> str:
    seconds = int(round(seconds))
    return f"{seconds // 3600}:{seconds % 3600 // 60:02d}:{seconds % 60:02d}"


BENCH_CSV_HEADER = ("entry,config,runs,size_mean,size_std,time_mean_s,"
                    "time_std_s,status")


def bench_csv_rows(results: list[dict]) -> str:
    """Render benchmark results in a fixed CSV schema. Each result carries
    entry, config, and per-repeat (size, time) samples, or an error."""
    lines = [BENCH_CSV_HEADER]
    for row in results:
        if row.get("error"):
            lines.append(f"{row['entry']},{row['config']},0,,,,,ERROR")
            continue
        sizes = row["sizes"]
        times = row["times"]
        lines.append(
            f"{row['entry']},{row['config']},{len(sizes)},"
            f"{_mean(sizes):.1f},{_std(sizes):.1f},"
            f"{_mean(times):.2f},{_std(times):.2f},ok")
    return "\n".join(lines) + "\n"


def _mean(xs):
    return sum(xs) / len(xs)


def _std(xs):
    m = _mean(xs)
    return (sum((x - m) ** 2 for x in xs) / len(xs)) ** 0.5
