"""Concrete reachability oracle and sampling of parameter valuations."""

from __future__ import annotations

import math
import random
from enum import Enum
from fractions import Fraction
from typing import Iterable, Optional

from ..explorer import NOMERGE, ExplorationLimits, Status, layer_bfs
from ..geometry import EQ, LT, Polyhedron
from ..model import PTA, goal_locations, instantiate
from ..synthesis import ParamConstraint

DENOMINATOR = 8


class Verdict(str, Enum):
    REACHED = "Reached"
    NOT_REACHED = "NotReachedWithinBound"

    def __str__(self):
        return self.value


def concrete_reachability(pta: PTA, goal, valuation, bound: int = 2000) -> tuple[Verdict, bool]:
    """Explore the instantiated automaton; the flag tells whether exploration was exhaustive."""
    inst = instantiate(pta, valuation)
    goal = goal_locations(inst, goal)
    _, stats = layer_bfs(inst, NOMERGE, ExplorationLimits(max_states=bound), goal,
                         stop_on_goal=True)
    if stats.goal_reached:
        return Verdict.REACHED, True
    return Verdict.NOT_REACHED, stats.status is Status.COMPLETED


def concrete_oracle(pta: PTA, goal, valuation, bound: int = 2000) -> Verdict:
    return concrete_reachability(pta, goal, valuation, bound)[0]


# sampling

def _interval(p: Polyhedron, j: int, fixed: dict[int, Fraction]):
    """Bounds on variable j once variables in ``fixed`` are pinned, later ones projected away."""
    dim = p.space.dim
    q = p._eliminate_indices([k for k in range(dim) if k > j])
    lo, lo_strict, hi, hi_strict = None, False, None, False
    for a in q.atoms:
        rest = a.const + sum(c * fixed[k] for k, c in enumerate(a.coeffs) if k != j and c)
        c = a.coeffs[j]
        if c == 0:
            continue
        bound = Fraction(-rest, c)
        strict = a.rel == LT
        if a.rel == EQ:
            return bound, False, bound, False
        if c > 0:  # c*v + rest <= 0  gives  v <= bound
            if hi is None or bound < hi or (bound == hi and strict):
                hi, hi_strict = bound, strict
        else:
            if lo is None or bound > lo or (bound == lo and strict):
                lo, lo_strict = bound, strict
    return lo, lo_strict, hi, hi_strict


def _pick(lo, lo_strict, hi, hi_strict, rng: random.Random, box: int) -> Fraction:
    if lo is not None and hi is not None and lo == hi:
        return lo
    low = lo if lo is not None else Fraction(0)
    high = hi if hi is not None else max(low + 1, Fraction(box))
    k0 = math.floor(low * DENOMINATOR)
    k1 = math.ceil(high * DENOMINATOR)
    grid = []
    for k in range(k0, k1 + 1):
        v = Fraction(k, DENOMINATOR)
        if lo is not None and (v < lo or (lo_strict and v == lo)):
            continue
        if hi is not None and (v > hi or (hi_strict and v == hi)):
            continue
        grid.append(v)
    if grid:
        return rng.choice(grid)
    return (low + high) / 2


def sample_point(p: Polyhedron, rng: random.Random, box: int = 8) -> Optional[dict[str, Fraction]]:
    """A point of ``p``, preferring coordinates on the 1/8 grid."""
    if p.is_empty():
        return None
    p = p.minimize()
    fixed: dict[int, Fraction] = {}
    for j in range(p.space.dim):
        fixed[j] = _pick(*_interval(p, j, fixed), rng, box)
    point = {p.space.names[k]: v for k, v in fixed.items()}
    assert p.contains_point(point)
    return point


def sample_inside(constraint: ParamConstraint, n: int, rng: random.Random,
                  box: int = 8) -> list[dict[str, Fraction]]:
    """Up to ``n`` distinct valuations satisfying the constraint."""
    out: list[dict[str, Fraction]] = []
    if constraint.is_false():
        return out
    seen = set()
    for _ in range(20 * n):
        if len(out) >= n:
            break
        d = rng.choice(constraint.disjuncts)
        v = sample_point(d, rng, box)
        key = tuple(sorted(v.items()))
        if key not in seen:
            seen.add(key)
            out.append(v)
    return out


def sample_outside(constraint: ParamConstraint, params: Iterable[str], n: int,
                   rng: random.Random, box: int = 8, tries: int = 2000) -> list[dict[str, Fraction]]:
    """Up to ``n`` nonnegative grid valuations in [0, box] violating the constraint."""
    params = list(params)
    out: list[dict[str, Fraction]] = []
    seen = set()
    for _ in range(tries):
        if len(out) >= n:
            break
        v = {p: Fraction(rng.randint(0, box * DENOMINATOR), DENOMINATOR) for p in params}
        key = tuple(sorted(v.items()))
        if key in seen:
            continue
        seen.add(key)
        if not constraint.contains_point(v):
            out.append(v)
    return out
