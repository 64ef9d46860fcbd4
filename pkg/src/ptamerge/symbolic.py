"""Symbolic states of the parametric zone graph and their successors."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .geometry import EQ, LE, Atom, Polyhedron
from .model import PTA, Edge


class EmptyInitialZone(ValueError):
    pass


@dataclass
class SymbolicState:
    loc: str
    constr: Polyhedron
    id: int = -1

    def __repr__(self):
        return f"SymbolicState({self.id}, {self.loc!r}, {self.constr.to_text()!r})"


def _unit(dim: int, i: int, sign: int = 1) -> tuple[int, ...]:
    return tuple(sign if k == i else 0 for k in range(dim))


def initial_zone(pta: PTA) -> Polyhedron:
    space = pta.space
    dim, nclk = space.dim, len(space.clocks)
    atoms = [Atom(_unit(dim, i), 0, EQ) for i in range(nclk)]
    atoms += [Atom(_unit(dim, i, -1), 0, LE) for i in range(nclk, dim)]
    elapsed = Polyhedron(space, atoms).time_elapse()
    return elapsed.conjoin(pta.invariant(pta.initial))


def initial_state(pta: PTA) -> SymbolicState:
    zone = initial_zone(pta)
    if zone.is_empty():
        raise EmptyInitialZone(f"initial invariant of {pta.initial!r} is unsatisfiable")
    return SymbolicState(pta.initial, zone.minimize())


def successor_zone(constr: Polyhedron, edge: Edge, pta: PTA) -> Optional[Polyhedron]:
    """((C and g)[R] and I(l'))^ and I(l'), or None when unsatisfiable."""
    inv = pta.invariant(edge.target)
    z = constr.conjoin(edge.guard)
    if z.is_empty():
        return None
    z = z.reset(edge.resets).conjoin(inv)
    if z.is_empty():
        return None
    z = z.time_elapse().conjoin(inv)
    if z.is_empty():
        return None
    return z.minimize()


def successor(state: SymbolicState, edge: Edge, pta: PTA) -> Optional[SymbolicState]:
    if state.loc != edge.source:
        raise ValueError(f"edge leaves {edge.source!r}, state is in {state.loc!r}")
    z = successor_zone(state.constr, edge, pta)
    if z is None:
        return None
    return SymbolicState(edge.target, z)


def succ_all(state: SymbolicState, pta: PTA) -> list[tuple[int, Edge, SymbolicState]]:
    """Nonempty successors in edge declaration order, as (edge index, edge, state)."""
    out = []
    for i, e in pta.edges_from(state.loc):
        s = successor(state, e, pta)
        if s is not None:
            out.append((i, e, s))
    return out
