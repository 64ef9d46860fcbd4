"""Run heuristics over model files and record one CSV row per run."""

from __future__ import annotations

import csv
import io
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Iterable, Optional, Sequence

from ..geometry import clear_caches
from ..explorer import ExplorationLimits, Status, parse_heuristic
from ..model import goal_locations, load_model
from ..synthesis import ef_synth

log = logging.getLogger(__name__)

ERROR_STATUS = "Error"


@dataclass
class RunRecord:
    model: str
    goal: str
    heuristic: str
    status: str
    time_ms: int
    states: int
    transitions: int
    merges: int
    mergeability_tests: int
    result: str

    @property
    def completed(self) -> bool:
        return self.status == Status.COMPLETED.value


COLUMNS = [f.name for f in fields(RunRecord)]
_INT_COLUMNS = {"time_ms", "states", "transitions", "merges", "mergeability_tests"}


def run_single(model_path, goal, heuristic: str,
               limits: ExplorationLimits = ExplorationLimits()) -> RunRecord:
    """One synthesis run. Parse and validation errors propagate."""
    pta = load_model(model_path)
    goal = goal_locations(pta, goal)
    config = parse_heuristic(heuristic)
    clear_caches()
    res = ef_synth(pta, goal, config, limits)
    st = res.stats
    time_ms = int(round(st.wall_time * 1000))
    if st.status is not Status.COMPLETED and limits.wall_timeout is not None:
        time_ms = int(round(limits.wall_timeout * 1000))
    return RunRecord(
        model=Path(model_path).stem,
        goal=",".join(goal),
        heuristic=config.code,
        status=st.status.value,
        time_ms=time_ms,
        states=st.states_final,
        transitions=st.transitions_final,
        merges=st.merges_performed,
        mergeability_tests=st.mergeability_tests,
        result=res.result.render(),
    )


def _cell(args) -> RunRecord:
    path, heuristic, limits = args
    try:
        return run_single(path, None, heuristic, limits)
    except Exception as exc:  # recorded in the row, the matrix goes on
        log.warning("%s/%s failed: %s", path, heuristic, exc)
        return RunRecord(Path(path).stem, "", heuristic, ERROR_STATUS, 0, 0, 0, 0, 0,
                         f"{type(exc).__name__}: {exc}")


def model_files(models_dir) -> list[Path]:
    return sorted(Path(models_dir).glob("*.json"))


def run_matrix(models: Iterable | str | os.PathLike, heuristics: Sequence[str],
               limits: ExplorationLimits = ExplorationLimits(),
               workers: Optional[int] = 1) -> list[RunRecord]:
    """Every model against every heuristic, rows ordered by (model, heuristic).

    ``models`` is a directory of ``*.json`` files or an iterable of paths. The goal
    of each model is the one stored in its document.
    """
    if not heuristics:
        raise ValueError("empty heuristic list")
    codes = [parse_heuristic(h).code for h in heuristics]
    if isinstance(models, (str, os.PathLike)):
        paths = model_files(models)
    else:
        paths = [Path(m) for m in models]
    cells = [(str(p), h, limits) for p in paths for h in codes]
    if workers is None or workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_cell, cells))
    return [_cell(c) for c in cells]


def write_csv(records: Iterable[RunRecord], out=None) -> str:
    """Write rows to ``out`` (path or text stream); the CSV text is returned too."""
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=COLUMNS, lineterminator="\n")
    w.writeheader()
    for r in records:
        w.writerow(asdict(r))
    text = buf.getvalue()
    if out is not None:
        if hasattr(out, "write"):
            out.write(text)
        else:
            Path(out).write_text(text, encoding="utf-8")
    return text


def read_csv(src) -> list[RunRecord]:
    """Rows from a path, a text stream, or CSV text containing a newline."""
    if hasattr(src, "read"):
        text = src.read()
    elif isinstance(src, str) and "\n" in src:
        text = src
    else:
        text = Path(src).read_text(encoding="utf-8")
    reader = csv.DictReader(io.StringIO(text))
    missing = [c for c in COLUMNS if c not in (reader.fieldnames or [])]
    if missing:
        raise ValueError(f"CSV lacks column(s) {missing}")
    out = []
    for row in reader:
        vals = {c: (int(row[c]) if c in _INT_COLUMNS else row[c]) for c in COLUMNS}
        out.append(RunRecord(**vals))
    return out
