"""Reachability synthesis over the merged zone graph, and exact comparison of results."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .explorer import (NOMERGE, ExplorationLimits, ExplorationStats, HeuristicConfig, Status,
                       ZoneGraph, layer_bfs, parse_heuristic)
from .geometry import Atom, Polyhedron, SpaceMismatch, VarSpace, negate, split_equalities
from .model import PTA, goal_locations


class ParamConstraint:
    """Finite union of convex parameter constraints.

    Empty disjuncts and disjuncts contained in another one are dropped.
    """

    def __init__(self, space: VarSpace, disjuncts: Iterable[Polyhedron] = ()):
        self.space = space
        kept: list[Polyhedron] = []
        for d in disjuncts:
            if d.space != space:
                raise SpaceMismatch(f"{d.space} vs {space}")
            if d.is_empty():
                continue
            d = d.minimize()
            if any(k.includes(d) for k in kept):
                continue
            kept = [k for k in kept if not d.includes(k)]
            kept.append(d)
        self.disjuncts: tuple[Polyhedron, ...] = tuple(kept)


    @classmethod
    def false(cls, space: VarSpace) -> "ParamConstraint":
        return cls(space)

    def is_false(self) -> bool:
        return not self.disjuncts

    def contains_point(self, point) -> bool:
        return any(d.contains_point(point) for d in self.disjuncts)

    def covers(self, other: "ParamConstraint") -> bool:
        return covers(self, other)

    def equals(self, other: "ParamConstraint") -> bool:
        return result_equal(self, other)

    def render(self) -> str:
        if not self.disjuncts:
            return "FALSE"
        return " OR ".join(d.to_text() for d in sorted(self.disjuncts, key=lambda d: d.to_text()))

    def __str__(self):
        return self.render()

    def __repr__(self):
        return f"ParamConstraint({self.render()!r})"


def _covered(region: Sequence[Atom], space: VarSpace, pieces: Sequence[Polyhedron]) -> bool:
    """Is the convex set given by ``region`` inside the union of ``pieces``?"""
    cur = Polyhedron(space, region)
    if cur.is_empty():
        return True
    if not pieces:
        return False
    first, rest = pieces[0], pieces[1:]
    if first.includes(cur):
        return True
    if cur.conjoin(first).is_empty():
        return _covered(cur.atoms, space, rest)
    # cur minus first, split into disjoint slices
    acc = list(cur.atoms)
    for c in split_equalities(first.canonical_atoms()):
        if not _covered((*acc, negate(c)), space, rest):
            return False
        acc.append(c)
    return True


def covers(a: ParamConstraint, b: ParamConstraint) -> bool:
    """True iff every valuation of ``b`` is a valuation of ``a``."""
    if a.space != b.space:
        raise SpaceMismatch(f"{a.space} vs {b.space}")
    return all(_covered(d.atoms, a.space, a.disjuncts) for d in b.disjuncts)


def result_equal(a: ParamConstraint, b: ParamConstraint) -> bool:
    return covers(a, b) and covers(b, a)


@dataclass
class SynthesisResult:
    result: ParamConstraint
    stats: ExplorationStats
    graph: ZoneGraph

    @property
    def complete(self) -> bool:
        return self.stats.status is Status.COMPLETED


def goal_constraint(pta: PTA, zg: ZoneGraph, goal: Iterable[str]) -> ParamConstraint:
    goal = frozenset(goal)
    pspace = pta.space.param_space()
    return ParamConstraint(pspace, (s.constr.project_params().restrict(pspace)
                                    for s in zg.states.values() if s.loc in goal))


def ef_synth(pta: PTA, goal=None, config: HeuristicConfig | str = NOMERGE,
             limits: ExplorationLimits = ExplorationLimits()) -> SynthesisResult:
    """Parameter valuations for which some goal location is reachable.

    An incomplete run (any limit hit) yields an under-approximation.
    """
    if isinstance(config, str):
        config = parse_heuristic(config)
    goal = goal_locations(pta, goal)
    zg, stats = layer_bfs(pta, config, limits, goal)
    return SynthesisResult(goal_constraint(pta, zg, goal), stats, zg)
