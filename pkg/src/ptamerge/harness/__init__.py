"""Benchmark runner, summarizer, random model generator and concrete oracle."""

from .bench import RunRecord, read_csv, run_matrix, run_single, write_csv
from .generator import gen_random_pta
from .oracle import Verdict, concrete_oracle, sample_inside, sample_outside
from .summary import HeuristicSummary, SummaryTable, summarize

__all__ = [
    "RunRecord", "read_csv", "run_matrix", "run_single", "write_csv",
    "gen_random_pta",
    "Verdict", "concrete_oracle", "sample_inside", "sample_outside",
    "HeuristicSummary", "SummaryTable", "summarize",
]
