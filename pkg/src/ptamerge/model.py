"""Parametric timed automata: data model, JSON document format, instantiation."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping

from .geometry import AtomSyntaxError, Polyhedron, VarSpace, parse_atom, render_atom


class ModelError(ValueError):
    """Raised for malformed or inconsistent model documents."""

    def __init__(self, message: str, code: str = "E_SYNTAX", line: int | None = None,
                 col: int | None = None):
        self.code = code
        self.line = line
        self.col = col
        where = ""
        if line is not None:
            where = f" (line {line}, column {col})"
        super().__init__(f"{code}: {message}{where}")


@dataclass(frozen=True)
class Diagnostic:
    code: str
    message: str


@dataclass(frozen=True)
class Location:
    name: str
    invariant: Polyhedron


@dataclass(frozen=True)
class Edge:
    source: str
    guard: Polyhedron
    action: str
    resets: frozenset[str]
    target: str


@dataclass(frozen=True)
class PTA:
    name: str
    space: VarSpace
    locations: tuple[Location, ...]
    initial: str
    edges: tuple[Edge, ...]
    actions: frozenset[str] = field(default=frozenset())
    goal: tuple[str, ...] = ()

    @property
    def clocks(self) -> tuple[str, ...]:
        return self.space.clocks

    @property
    def params(self) -> tuple[str, ...]:
        return self.space.params

    def location(self, name: str) -> Location:
        for loc in self.locations:
            if loc.name == name:
                return loc
        raise KeyError(name)

    def invariant(self, name: str) -> Polyhedron:
        return self.location(name).invariant

    def edges_from(self, name: str) -> list[tuple[int, Edge]]:
        return [(i, e) for i, e in enumerate(self.edges) if e.source == name]


def validate(pta: PTA) -> list[Diagnostic]:
    """Check structural well-formedness; an empty list means valid."""
    out = []
    names = [loc.name for loc in pta.locations]
    seen = set()
    for n in names:
        if n in seen:
            out.append(Diagnostic("E_DUPLICATE_LOCATION", f"location {n!r} declared twice"))
        seen.add(n)
    if pta.initial not in seen:
        out.append(Diagnostic("E_MISSING_INITIAL", f"initial location {pta.initial!r} undeclared"))
    for loc in pta.locations:
        if loc.invariant.space != pta.space:
            out.append(Diagnostic("E_SPACE", f"invariant of {loc.name!r} over foreign variables"))
    for i, e in enumerate(pta.edges):
        for end in (e.source, e.target):
            if end not in seen:
                out.append(Diagnostic("E_UNKNOWN_LOCATION", f"edge {i} refers to {end!r}"))
        if e.guard.space != pta.space:
            out.append(Diagnostic("E_SPACE", f"guard of edge {i} over foreign variables"))
        for x in sorted(e.resets):
            if x not in pta.space.clocks:
                out.append(Diagnostic("E_RESET_NON_CLOCK", f"edge {i} resets non-clock {x!r}"))
        if pta.actions and e.action not in pta.actions:
            out.append(Diagnostic("E_UNKNOWN_ACTION", f"edge {i} uses undeclared action {e.action!r}"))
    for g in pta.goal:
        if g not in seen:
            out.append(Diagnostic("E_UNKNOWN_LOCATION", f"goal {g!r} is not a location"))
    return out


def _constraint(items, space: VarSpace, where: str) -> Polyhedron:
    if items is None:
        return Polyhedron.universe(space)
    if isinstance(items, str):
        items = [items]
    atoms = []
    for k, text in enumerate(items):
        try:
            atoms.append(parse_atom(text, space))
        except AtomSyntaxError as exc:
            code = "E_UNDECLARED" if "unknown identifier" in str(exc) else "E_SYNTAX"
            raise ModelError(f"{where}[{k}]: {exc}", code) from None
    return Polyhedron(space, atoms)


def from_dict(doc: Mapping) -> PTA:
    if not isinstance(doc, Mapping):
        raise ModelError("model document must be an object")
    try:
        space = VarSpace(tuple(doc.get("clocks", ())), tuple(doc.get("parameters", ())))
    except ValueError as exc:
        raise ModelError(str(exc), "E_DUPLICATE_IDENTIFIER") from None
    locations = []
    for k, loc in enumerate(doc.get("locations", ())):
        name = loc["name"] if isinstance(loc, Mapping) else loc
        inv = loc.get("invariant") if isinstance(loc, Mapping) else None
        locations.append(Location(name, _constraint(inv, space, f"locations[{k}].invariant")))
    edges = []
    for k, e in enumerate(doc.get("edges", ())):
        try:
            src, dst = e["from"], e["to"]
        except KeyError as exc:
            raise ModelError(f"edges[{k}] lacks {exc.args[0]!r}") from None
        resets = frozenset(e.get("resets", ()))
        for x in sorted(resets):
            if x not in space.clocks:
                raise ModelError(f"edges[{k}]: reset of a non-clock {x!r}", "E_RESET_NON_CLOCK")
        edges.append(Edge(src, _constraint(e.get("guard"), space, f"edges[{k}].guard"),
                          str(e.get("action", f"e{k}")), resets, dst))
    if "initial" not in doc:
        raise ModelError("missing initial location", "E_MISSING_INITIAL")
    goal = doc.get("goal", ())
    if isinstance(goal, str):
        goal = [goal]
    actions = frozenset(doc.get("actions", ())) or frozenset(e.action for e in edges)
    pta = PTA(str(doc.get("name", "model")), space, tuple(locations), doc["initial"],
              tuple(edges), actions, tuple(goal))
    diags = validate(pta)
    if diags:
        raise ModelError(diags[0].message, diags[0].code)
    return pta


def parse_model(text: str) -> PTA:
    """Parse and validate a JSON model document."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelError(exc.msg, "E_SYNTAX", exc.lineno, exc.colno) from None
    return from_dict(doc)


def load_model(path) -> PTA:
    with open(path, encoding="utf-8") as fh:
        return parse_model(fh.read())


def _atoms_text(p: Polyhedron) -> list[str]:
    if p.is_empty():
        return ["0 < 0"]
    return [render_atom(a, p.space) for a in p.canonical_atoms()]


def to_dict(pta: PTA) -> dict:
    doc = {
        "name": pta.name,
        "clocks": list(pta.clocks),
        "parameters": list(pta.params),
        "actions": sorted(pta.actions),
        "initial": pta.initial,
        "locations": [],
        "edges": [],
    }
    for loc in pta.locations:
        entry = {"name": loc.name}
        if not loc.invariant.is_universe():
            entry["invariant"] = _atoms_text(loc.invariant)
        doc["locations"].append(entry)
    for e in pta.edges:
        entry = {"from": e.source}
        if not e.guard.is_universe():
            entry["guard"] = _atoms_text(e.guard)
        entry["action"] = e.action
        if e.resets:
            entry["resets"] = sorted(e.resets)
        entry["to"] = e.target
        doc["edges"].append(entry)
    if pta.goal:
        doc["goal"] = list(pta.goal)
    return doc


def serialize(pta: PTA) -> str:
    return json.dumps(to_dict(pta), indent=2) + "\n"


def instantiate(pta: PTA, valuation: Mapping[str, object]) -> PTA:
    """Replace every parameter by its value, giving a parameter-free automaton."""
    missing = [p for p in pta.params if p not in valuation]
    if missing:
        raise ModelError(f"no value for parameter(s) {missing}", "E_MISSING_VALUE")
    values = {p: Fraction(valuation[p]) for p in pta.params}
    if any(v < 0 for v in values.values()):
        raise ModelError("parameter values must be nonnegative", "E_NEGATIVE_VALUE")
    if not pta.params:
        return pta
    space = VarSpace(pta.clocks, ())
    locs = tuple(Location(l.name, l.invariant.substitute(values, space)) for l in pta.locations)
    edges = tuple(Edge(e.source, e.guard.substitute(values, space), e.action, e.resets, e.target)
                  for e in pta.edges)
    return PTA(pta.name, space, locs, pta.initial, edges, pta.actions, pta.goal)


def goal_locations(pta: PTA, goal: Iterable[str] | str | None) -> tuple[str, ...]:
    """Resolve an explicit goal (comma list or iterable) or fall back to the model's."""
    if goal is None:
        goal = pta.goal
    elif isinstance(goal, str):
        goal = [g.strip() for g in goal.split(",") if g.strip()]
    goal = tuple(goal)
    names = {l.name for l in pta.locations}
    bad = [g for g in goal if g not in names]
    if bad:
        raise ModelError(f"goal location(s) {bad} not in model", "E_UNKNOWN_LOCATION")
    return goal
