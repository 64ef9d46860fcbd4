"""Per-heuristic aggregate metrics over a benchmark CSV."""

from __future__ import annotations

import csv
import io
import statistics
from dataclasses import dataclass, fields
from typing import Iterable, Sequence

from .bench import RunRecord

BASELINE = "Nomerge"


@dataclass
class HeuristicSummary:
    heuristic: str
    wins_time: int = 0
    avg_time: float = 0.0
    avg_time_merge: float = 0.0
    avg_time_nomerge: float = 0.0
    median_time: float = 0.0
    norm_time: float = 0.0
    norm_time_merge: float = 0.0
    norm_time_nomerge: float = 0.0
    wins_states: int = 0
    avg_states: float = 0.0
    avg_states_merge: float = 0.0
    avg_states_nomerge: float = 0.0
    median_states: float = 0.0
    norm_states: float = 0.0
    norm_states_merge: float = 0.0
    norm_states_nomerge: float = 0.0


METRICS = [f.name for f in fields(HeuristicSummary)][1:]


@dataclass
class SummaryTable:
    rows: list[HeuristicSummary]
    executions: int
    merge_executions: int

    def get(self, heuristic: str) -> HeuristicSummary:
        for r in self.rows:
            if r.heuristic == heuristic:
                return r
        raise KeyError(heuristic)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["heuristic"] + METRICS)
        for r in self.rows:
            w.writerow([r.heuristic] + [_fmt(getattr(r, m)) for m in METRICS])
        return buf.getvalue()

    def to_markdown(self) -> str:
        lines = [f"Executions: {self.executions} ({self.merge_executions} with merges)", "",
                 "| heuristic | " + " | ".join(METRICS) + " |",
                 "|---" * (len(METRICS) + 1) + "|"]
        for r in self.rows:
            lines.append(f"| {r.heuristic} | " + " | ".join(_fmt(getattr(r, m)) for m in METRICS)
                         + " |")
        return "\n".join(lines) + "\n"


def _fmt(v) -> str:
    if isinstance(v, int):
        return str(v)
    return f"{v:.4f}"


def _mean(xs: Sequence[float]) -> float:
    return statistics.fmean(xs) if xs else 0.0


def _ratio(a: float, b: float) -> float:
    # values below the 1 ms / 1 state resolution are clamped so ratios stay defined
    return max(a, 1) / max(b, 1)


def summarize(records: Iterable[RunRecord]) -> SummaryTable:
    """Aggregate runs grouped into executions (one per model and goal).

    Executions where no configuration completed are left out. An execution belongs
    to the merge subset when some run on it performed at least one merge.
    """
    by_exec: dict[tuple[str, str], dict[str, RunRecord]] = {}
    order: list[str] = []
    for r in records:
        by_exec.setdefault((r.model, r.goal), {})[r.heuristic] = r
        if r.heuristic not in order:
            order.append(r.heuristic)
    execs = {k: v for k, v in by_exec.items() if any(r.completed for r in v.values())}
    for key, runs in execs.items():
        if BASELINE not in runs:
            raise ValueError(f"no {BASELINE} baseline run for execution {key}")
    heuristics = [h for h in order if any(h in runs for runs in execs.values())]
    merge_keys = {k for k, runs in execs.items() if any(r.merges > 0 for r in runs.values())}

    rows = []
    for h in heuristics:
        row = HeuristicSummary(h)
        for metric, get in (("time", lambda r: r.time_ms), ("states", lambda r: r.states)):
            vals, vals_m, vals_n, norm, norm_m, norm_n, wins = [], [], [], [], [], [], 0
            for key, runs in execs.items():
                if h not in runs:
                    continue
                v = get(runs[h])
                best = min(get(r) for r in runs.values())
                wins += v == best
                n = _ratio(v, get(runs[BASELINE]))
                vals.append(v)
                norm.append(n)
                if key in merge_keys:
                    vals_m.append(v)
                    norm_m.append(n)
                else:
                    vals_n.append(v)
                    norm_n.append(n)
            setattr(row, f"wins_{metric}", wins)
            setattr(row, f"avg_{metric}", _mean(vals))
            setattr(row, f"avg_{metric}_merge", _mean(vals_m))
            setattr(row, f"avg_{metric}_nomerge", _mean(vals_n))
            setattr(row, f"median_{metric}", float(statistics.median(vals)) if vals else 0.0)
            setattr(row, f"norm_{metric}", _mean(norm))
            setattr(row, f"norm_{metric}_merge", _mean(norm_m))
            setattr(row, f"norm_{metric}_nomerge", _mean(norm_n))
        rows.append(row)
    return SummaryTable(rows, len(execs), len(merge_keys))
