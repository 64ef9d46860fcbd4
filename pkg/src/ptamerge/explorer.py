"""Layered breadth-first construction of the parametric zone graph with merging.

Each layer expands the current queue, deduplicates successors by exact zone
equality, and then hands the new layer to :func:`merge_sets`. The merging
strategy is chosen by a heuristic code of three or four letters:

=======  ==========================================================
letter   meaning
=======  ==========================================================
1        ``R`` rebuild the reachable part / ``O`` update in place
2        candidates from ``V`` visited, ``Q`` queue, ``O`` queue then visited
3        structural update after each ``M`` merge / after all ``C`` candidates
4        optional ``r``: rescan the candidates after every successful merge
=======  ==========================================================

``Nomerge`` disables merging.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Optional, Sequence

from .geometry import LT, Polyhedron, try_merge
from .model import PTA
from .symbolic import SymbolicState, initial_state, successor_zone


class UpdateMode(Enum):
    RECONSTRUCT = "R"
    ON_THE_FLY = "O"


class Candidates(Enum):
    VISITED = "V"
    QUEUE = "Q"
    ORDERED = "O"


class Timing(Enum):
    EACH_MERGE = "M"
    AFTER_CANDIDATES = "C"


class HeuristicError(ValueError):
    pass


@dataclass(frozen=True)
class HeuristicConfig:
    enabled: bool = False
    update_mode: UpdateMode = UpdateMode.ON_THE_FLY
    candidates: Candidates = Candidates.QUEUE
    timing: Timing = Timing.EACH_MERGE
    restart: bool = False

    @property
    def code(self) -> str:
        if not self.enabled:
            return "Nomerge"
        return (self.update_mode.value + self.candidates.value + self.timing.value
                + ("r" if self.restart else ""))

    def __str__(self):
        return self.code


NOMERGE = HeuristicConfig()


def parse_heuristic(code: str) -> HeuristicConfig:
    if code.lower() in ("nomerge", "none"):
        return NOMERGE
    if len(code) not in (3, 4) or (len(code) == 4 and code[3] != "r"):
        raise HeuristicError(f"unrecognized heuristic code {code!r}")
    try:
        return HeuristicConfig(True, UpdateMode(code[0]), Candidates(code[1]), Timing(code[2]),
                               len(code) == 4)
    except ValueError:
        raise HeuristicError(f"unrecognized heuristic code {code!r}") from None


ALL_HEURISTICS: tuple[str, ...] = ("Nomerge",) + tuple(
    u + c + t + r for u, c, t, r in itertools.product("RO", "VQO", "MC", ("r", ""))
)


class Status(str, Enum):
    COMPLETED = "Completed"
    LAYER_LIMIT = "LayerLimit"
    STATE_LIMIT = "StateLimit"
    TIMEOUT = "Timeout"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class ExplorationLimits:
    max_layers: Optional[int] = None
    max_states: Optional[int] = None
    wall_timeout: Optional[float] = None  # seconds

    def __post_init__(self):
        for name in ("max_layers", "max_states", "wall_timeout"):
            v = getattr(self, name)
            if v is not None and v <= 0:
                raise ValueError(f"{name} must be positive")


@dataclass
class ExplorationStats:
    states_final: int = 0
    transitions_final: int = 0
    merges_performed: int = 0
    mergeability_tests: int = 0
    layers: int = 0
    wall_time: float = 0.0
    status: Status = Status.COMPLETED
    goal_reached: bool = False


class ZoneGraph:
    """Mutable store of symbolic states and edge-labelled transitions.

    Transitions are ``(source id, edge index, target id)`` triples kept as an
    insertion-ordered set with per-state in/out indexes.
    """

    def __init__(self):
        self.states: dict[int, SymbolicState] = {}
        self.transitions: dict[tuple[int, int, int], None] = {}
        self.initial: Optional[int] = None
        self.queue: list[int] = []
        self._out: dict[int, set] = {}
        self._in: dict[int, set] = {}
        self._ids = itertools.count()
        self._by_key: dict[tuple, int] = {}
        self._by_loc: dict[str, dict[int, None]] = {}
        self._closure_keys: dict[int, tuple] = {}

    @property
    def visited(self) -> list[int]:
        return list(self.states)

    def __len__(self):
        return len(self.states)

    # states

    @staticmethod
    def _key(loc: str, constr: Polyhedron) -> tuple:
        return (loc, constr.canonical_atoms())

    def add_state(self, loc: str, constr: Polyhedron) -> int:
        sid = next(self._ids)
        constr = constr.minimize()
        self.states[sid] = SymbolicState(loc, constr, sid)
        self._by_key.setdefault(self._key(loc, constr), sid)
        self._by_loc.setdefault(loc, {})[sid] = None
        self._out[sid] = set()
        self._in[sid] = set()
        return sid

    def set_constr(self, sid: int, constr: Polyhedron) -> None:
        s = self.states[sid]
        self._unindex(sid)
        s.constr = constr.minimize()
        self._by_key.setdefault(self._key(s.loc, s.constr), sid)

    def _unindex(self, sid: int) -> None:
        s = self.states[sid]
        key = self._key(s.loc, s.constr)
        if self._by_key.get(key) == sid:
            del self._by_key[key]
        self._closure_keys.pop(sid, None)

    def remove_state(self, sid: int) -> None:
        """Delete the state record; transitions are left for the caller."""
        self._unindex(sid)
        s = self.states.pop(sid)
        del self._by_loc[s.loc][sid]
        if sid in self.queue:
            self.queue.remove(sid)

    def _closure_key(self, sid: int, constr: Polyhedron) -> tuple:
        key = self._closure_keys.get(sid)
        if key is None:
            key = self._closure_keys[sid] = constr.closure().canonical_atoms()
        return key

    def find_equal(self, loc: str, constr: Polyhedron) -> Optional[int]:
        """Id of a stored state with this location and an equal zone."""
        constr = constr.minimize()
        hit = self._by_key.get(self._key(loc, constr))
        if hit is not None:
            return hit
        if not any(a.rel == LT for a in constr.atoms):
            return None
        # minimal strict representations are not unique; fall back to inclusion
        ckey = constr.closure().canonical_atoms()
        for sid in self._by_loc.get(loc, ()):
            other = self.states[sid].constr
            if not any(a.rel == LT for a in other.atoms):
                continue
            if self._closure_key(sid, other) == ckey and other.equals(constr):
                return sid
        return None

    def siblings_pool(self, loc: str) -> list[int]:
        return list(self._by_loc.get(loc, ()))

    # transitions

    def add_transition(self, src: int, edge: int, dst: int) -> None:
        t = (src, edge, dst)
        if t in self.transitions:
            return
        self.transitions[t] = None
        self._out.setdefault(src, set()).add(t)
        self._in.setdefault(dst, set()).add(t)

    def _drop_transition(self, t) -> None:
        if t in self.transitions:
            del self.transitions[t]
        self._out.get(t[0], set()).discard(t)
        self._in.get(t[2], set()).discard(t)

    def outgoing(self, sid: int) -> list[tuple[int, int, int]]:
        return sorted(self._out.get(sid, ()))

    def redirect(self, old: int, new: int, keep_outgoing: bool = True) -> None:
        """Move transitions of ``old`` onto ``new``; drop outgoing ones unless kept."""
        for t in sorted(self._in.pop(old, ())):
            self._drop_transition(t)
            self.add_transition(new if t[0] == old else t[0], t[1], new)
        for t in sorted(self._out.pop(old, ())):
            self._drop_transition(t)
            if keep_outgoing:
                self.add_transition(new, t[1], new if t[2] == old else t[2])
        if self.initial == old:
            self.initial = new

    def prune_unreachable(self) -> int:
        """Keep only states reachable from the initial one; returns how many were dropped."""
        seen = {self.initial}
        todo = [self.initial]
        while todo:
            sid = todo.pop()
            for t in self._out.get(sid, ()):
                if t[2] not in seen and t[2] in self.states:
                    seen.add(t[2])
                    todo.append(t[2])
        dead = [sid for sid in self.states if sid not in seen]
        for sid in dead:
            for t in list(self._out.get(sid, ())) + list(self._in.get(sid, ())):
                self._drop_transition(t)
            self.remove_state(sid)
            self._out.pop(sid, None)
            self._in.pop(sid, None)
        return len(dead)

    # export

    def to_dot(self, pta: Optional[PTA] = None) -> str:
        lines = ["digraph pzg {"]
        for sid in sorted(self.states):
            s = self.states[sid]
            shape = ", peripheries=2" if sid == self.initial else ""
            label = f"{s.loc} | {s.constr.to_text()}".replace('"', '\\"')
            lines.append(f'  s{sid} [label="{label}"{shape}];')
        for src, e, dst in sorted(self.transitions):
            label = pta.edges[e].action if pta is not None else f"e{e}"
            lines.append(f'  s{src} -> s{dst} [label="{label}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"


def reconstruct_reachable(zg: ZoneGraph) -> ZoneGraph:
    """Restrict ``zg`` to the part reachable from its initial state (ids kept)."""
    zg.prune_unreachable()
    zg.queue = [sid for sid in zg.queue if sid in zg.states]
    return zg


def get_siblings(sid: int, pool: Iterable[int], zg: ZoneGraph) -> list[int]:
    loc = zg.states[sid].loc
    return [y for y in pool if y != sid and y in zg.states and zg.states[y].loc == loc]


class _Updates:
    """Structural updates (redirection, reconstruction) pending for one scan."""

    def __init__(self, zg: ZoneGraph, config: HeuristicConfig):
        self.zg = zg
        self.config = config
        self.pending: list[tuple[int, int]] = []

    def add(self, old: int, new: int) -> None:
        self.pending.append((old, new))
        if self.config.timing is Timing.EACH_MERGE:
            self.flush()

    def flush(self) -> None:
        if not self.pending:
            return
        rebuild = self.config.update_mode is UpdateMode.RECONSTRUCT
        for old, new in self.pending:
            # outgoing transitions of a replaced state are recomputed from the
            # survivor on the next layer when rebuilding
            self.zg.redirect(old, new, keep_outgoing=not rebuild)
        self.pending.clear()
        if rebuild:
            reconstruct_reachable(self.zg)


def merge_one_state(sid: int, zg: ZoneGraph, sibling_candidates: Sequence[int],
                    config: HeuristicConfig, stats: Optional[ExplorationStats] = None) -> bool:
    """Merge state ``sid`` with mergeable siblings taken from ``sibling_candidates``.

    The surviving state carries the union. When the candidate already contains
    ``sid`` the candidate survives and ``sid`` is absorbed, which ends the scan.
    """
    if sid not in zg.states:
        raise KeyError(f"state {sid} was deleted")
    stats = stats if stats is not None else ExplorationStats()
    updates = _Updates(zg, config)
    merged = False
    scanning = True
    while scanning:
        scanning = False
        for y in get_siblings(sid, sibling_candidates, zg):
            if y not in zg.states or sid not in zg.states:
                continue
            s, other = zg.states[sid], zg.states[y]
            stats.mergeability_tests += 1
            union = try_merge(s.constr, other.constr)
            if union is None:
                continue
            stats.merges_performed += 1
            merged = True
            if union is other.constr:
                zg.remove_state(sid)
                updates.add(sid, y)
                updates.flush()
                return True
            zg.set_constr(sid, union)
            zg.remove_state(y)
            updates.add(y, sid)
            if sid not in zg.states:
                return True
            if config.restart:
                scanning = True
                break
    updates.flush()
    return merged


def merge_sets(zg: ZoneGraph, config: HeuristicConfig, qnew: Sequence[int],
               stats: Optional[ExplorationStats] = None) -> list[int]:
    """Merge every new state per ``config``; returns the surviving queue."""
    zg.queue = list(qnew)
    for sid in list(qnew):
        if sid not in zg.states:
            continue
        loc = zg.states[sid].loc
        if config.candidates in (Candidates.QUEUE, Candidates.ORDERED):
            merge_one_state(sid, zg, list(zg.queue), config, stats)
        if sid in zg.states and config.candidates in (Candidates.VISITED, Candidates.ORDERED):
            merge_one_state(sid, zg, zg.siblings_pool(loc), config, stats)
    zg.queue = [sid for sid in zg.queue if sid in zg.states]
    return list(zg.queue)


class _Stop(Exception):
    def __init__(self, status: Status):
        self.status = status


def layer_bfs(pta: PTA, config: HeuristicConfig = NOMERGE,
              limits: ExplorationLimits = ExplorationLimits(),
              goal: Iterable[str] = (), stop_on_goal: bool = False
              ) -> tuple[ZoneGraph, ExplorationStats]:
    """Build the (merged) parametric zone graph layer by layer.

    States in a goal location are stored but never expanded.
    """
    goal = frozenset(goal)
    start = time.perf_counter()
    deadline = start + limits.wall_timeout if limits.wall_timeout else None
    stats = ExplorationStats()
    zg = ZoneGraph()
    init = initial_state(pta)
    zg.initial = zg.add_state(init.loc, init.constr)
    queue = [zg.initial]
    if init.loc in goal:
        stats.goal_reached = True
    edges_from = {loc.name: pta.edges_from(loc.name) for loc in pta.locations}

    try:
        if stop_on_goal and stats.goal_reached:
            queue = []
        while queue:
            if limits.max_layers is not None and stats.layers >= limits.max_layers:
                raise _Stop(Status.LAYER_LIMIT)
            qnew: list[int] = []
            for sid in queue:
                if sid not in zg.states:
                    continue
                s = zg.states[sid]
                if s.loc in goal:
                    continue
                for idx, edge in edges_from[s.loc]:
                    if deadline is not None and time.perf_counter() > deadline:
                        raise _Stop(Status.TIMEOUT)
                    z = successor_zone(s.constr, edge, pta)
                    if z is None:
                        continue
                    tid = zg.find_equal(edge.target, z)
                    if tid is None:
                        if limits.max_states is not None and len(zg) >= limits.max_states:
                            raise _Stop(Status.STATE_LIMIT)
                        tid = zg.add_state(edge.target, z)
                        qnew.append(tid)
                        if edge.target in goal:
                            stats.goal_reached = True
                    zg.add_transition(sid, idx, tid)
                    if stop_on_goal and stats.goal_reached:
                        raise _Stop(Status.COMPLETED)
            stats.layers += 1
            if config.enabled:
                queue = merge_sets(zg, config, qnew, stats)
            else:
                queue = qnew
            zg.queue = list(queue)
            if deadline is not None and time.perf_counter() > deadline and queue:
                raise _Stop(Status.TIMEOUT)
    except _Stop as stop:
        stats.status = stop.status

    stats.states_final = len(zg.states)
    stats.transitions_final = len(zg.transitions)
    stats.wall_time = time.perf_counter() - start
    return zg, stats
