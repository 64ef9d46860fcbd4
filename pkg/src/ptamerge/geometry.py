"""Exact not-necessarily-closed convex polyhedra over clocks and parameters.

A polyhedron is a conjunction of atoms ``term rel 0`` where ``rel`` is one of
``<``, ``<=`` or ``=`` and the term has integer coefficients. Rational input is
scaled to integers on construction, so every computation here is exact.

Variable elimination is Fourier-Motzkin with equality substitution first.
Emptiness, inclusion, redundancy removal and union convexity are all reduced
to emptiness checks of atom sets.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import gcd
from typing import Iterable, Mapping, NamedTuple, Optional, Sequence

LT = "<"
LE = "<="
EQ = "="


class GeometryError(ValueError):
    pass


class SpaceMismatch(GeometryError):
    pass


class AtomSyntaxError(GeometryError):
    def __init__(self, message: str, text: str = "", col: int | None = None):
        self.text = text
        self.col = col
        where = f" at column {col}" if col is not None else ""
        super().__init__(f"{message}{where}: {text!r}" if text else message)


class UnknownIdentifier(AtomSyntaxError):
    pass


@dataclass(frozen=True)
class VarSpace:
    """Ordered clocks followed by ordered parameters."""

    clocks: tuple[str, ...] = ()
    params: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "clocks", tuple(self.clocks))
        object.__setattr__(self, "params", tuple(self.params))
        names = self.clocks + self.params
        if len(set(names)) != len(names):
            raise GeometryError(f"duplicate identifiers in {names}")

    @property
    def names(self) -> tuple[str, ...]:
        return self.clocks + self.params

    @property
    def dim(self) -> int:
        return len(self.clocks) + len(self.params)

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise UnknownIdentifier(f"unknown identifier {name!r}") from None

    def is_clock(self, name: str) -> bool:
        return name in self.clocks

    def param_space(self) -> "VarSpace":
        return VarSpace((), self.params)


class Atom(NamedTuple):
    """``sum(coeffs[i] * var_i) + const  rel  0`` with integer data."""

    coeffs: tuple[int, ...]
    const: int
    rel: str

    @property
    def is_constant(self) -> bool:
        return not any(self.coeffs)

    def holds(self, values: Sequence) -> bool:
        v = sum(c * x for c, x in zip(self.coeffs, values) if c) + self.const
        if self.rel == LT:
            return v < 0
        if self.rel == LE:
            return v <= 0
        return v == 0


def make_atom(coeffs: Sequence, const, rel: str):
    """Normalize a (possibly rational) atom.

    Returns an :class:`Atom`, or a bool when no variable remains.
    """
    if rel == ">":
        coeffs, const, rel = [-c for c in coeffs], -const, LT
    elif rel == ">=":
        coeffs, const, rel = [-c for c in coeffs], -const, LE
    elif rel not in (LT, LE, EQ):
        raise GeometryError(f"bad relation {rel!r}")
    if any(isinstance(c, Fraction) for c in coeffs) or isinstance(const, Fraction):
        den = 1
        for c in (*coeffs, const):
            den = den * Fraction(c).denominator // gcd(den, Fraction(c).denominator)
        coeffs = [int(c * den) for c in coeffs]
        const = int(const * den)
    coeffs = tuple(int(c) for c in coeffs)
    const = int(const)
    if not any(coeffs):
        if rel == LT:
            return const < 0
        if rel == LE:
            return const <= 0
        return const == 0
    g = gcd(*coeffs, const)
    if g != 1:
        coeffs = tuple(c // g for c in coeffs)
        const //= g
    if rel == EQ and next(c for c in coeffs if c) < 0:
        coeffs = tuple(-c for c in coeffs)
        const = -const
    return Atom(coeffs, const, rel)


def negate(a: Atom) -> Atom:
    """Complement of an inequality atom (strictness flips)."""
    if a.rel == EQ:
        raise GeometryError("cannot negate an equality; split it first")
    return Atom(tuple(-c for c in a.coeffs), -a.const, LE if a.rel == LT else LT)


def split_equalities(atoms: Iterable[Atom]) -> list[Atom]:
    out = []
    for a in atoms:
        if a.rel == EQ:
            out.append(Atom(a.coeffs, a.const, LE))
            out.append(Atom(tuple(-c for c in a.coeffs), -a.const, LE))
        else:
            out.append(a)
    return out


def _combine(p: Atom, mp: int, q: Atom, mq: int, rel: str):
    coeffs = [mp * x + mq * y for x, y in zip(p.coeffs, q.coeffs)]
    return make_atom(coeffs, mp * p.const + mq * q.const, rel)


def _simplify(atoms: Iterable[Atom]) -> Optional[list[Atom]]:
    """Cheap syntactic cleanup; ``None`` when a contradiction is detected.

    Keeps the tightest bound per direction and turns opposite non-strict
    bounds that meet into an equality.
    """
    eqs: dict[tuple, tuple[Fraction, Atom]] = {}
    best: dict[tuple, tuple[Fraction, bool, Atom]] = {}
    for a in atoms:
        if a is True:
            continue
        if a is False:
            return None
        if a.is_constant:
            if not a.holds(()):
                return None
            continue
        g = gcd(*a.coeffs)
        direction = a.coeffs if g == 1 else tuple(c // g for c in a.coeffs)
        if a.rel == EQ:
            value = Fraction(a.const, g)
            cur = eqs.get(direction)
            if cur is None:
                eqs[direction] = (value, a)
            elif cur[0] != value:
                return None
            continue
        bound = Fraction(a.const, g)
        strict = a.rel == LT
        cur = best.get(direction)
        if cur is None or bound > cur[0] or (bound == cur[0] and strict and not cur[1]):
            best[direction] = (bound, strict, a)
    out: list[Atom] = [a for _, a in eqs.values()]
    done = set()
    for direction, (bound, strict, a) in best.items():
        if direction in done:
            continue
        opp = tuple(-c for c in direction)
        other = best.get(opp)
        if other is not None:
            done.add(opp)
            # direction.v <= -bound and direction.v >= other_bound
            lo, hi = other[0], -bound
            if lo > hi or (lo == hi and (strict or other[1])):
                return None
            if lo == hi:
                at = make_atom(direction, bound, EQ)
                out.append(at)
                continue
            out.append(other[2])
        out.append(a)
    return out


def _eliminate(atoms: Sequence[Atom], j: int) -> Optional[list[Atom]]:
    """Existentially quantify variable ``j`` out of a simplified atom list."""
    pivot = None
    for a in atoms:
        if a.rel == EQ and a.coeffs[j]:
            if pivot is None or abs(a.coeffs[j]) < abs(pivot.coeffs[j]):
                pivot = a
    if pivot is not None:
        e = pivot.coeffs[j]
        me, sgn = abs(e), (1 if e > 0 else -1)
        out = []
        for a in atoms:
            if a is pivot:
                continue
            b = a.coeffs[j]
            out.append(a if b == 0 else _combine(a, me, pivot, -sgn * b, a.rel))
        return _simplify(out)
    pos, neg, out = [], [], []
    for a in atoms:
        b = a.coeffs[j]
        if b > 0:
            pos.append(a)
        elif b < 0:
            neg.append(a)
        else:
            out.append(a)
    for p in pos:
        bp = p.coeffs[j]
        for n in neg:
            bn = -n.coeffs[j]
            rel = LT if (p.rel == LT or n.rel == LT) else LE
            out.append(_combine(p, bn, n, bp, rel))
    return _simplify(out)


def _pick_variable(atoms: Sequence[Atom]) -> Optional[int]:
    if not atoms:
        return None
    dim = len(atoms[0].coeffs)
    best, best_cost = None, None
    for j in range(dim):
        npos = nneg = 0
        has_eq = False
        for a in atoms:
            c = a.coeffs[j]
            if c:
                if a.rel == EQ:
                    has_eq = True
                    break
                if c > 0:
                    npos += 1
                else:
                    nneg += 1
        if has_eq:
            return j
        if npos + nneg == 0:
            continue
        cost = npos * nneg - npos - nneg
        if best_cost is None or cost < best_cost:
            best, best_cost = j, cost
    return best


@lru_cache(maxsize=200_000)
def _empty_cached(atoms: frozenset) -> bool:
    cur = _simplify(atoms)
    while cur is not None:
        j = _pick_variable(cur)
        if j is None:
            return False
        cur = _eliminate(cur, j)
    return True


def atoms_empty(atoms: Iterable[Atom]) -> bool:
    """True iff no rational point satisfies every atom."""
    return _empty_cached(frozenset(atoms))


def clear_caches() -> None:
    """Forget memoized emptiness checks (used to time runs independently)."""
    _empty_cached.cache_clear()


def _sort_key(a: Atom):
    lead = next(i for i, c in enumerate(a.coeffs) if c)
    return (0 if a.rel == EQ else 1, lead, a.coeffs, a.const, a.rel)


_FALSE_CACHE: dict[int, Atom] = {}


def _false_atom(dim: int) -> Atom:
    a = _FALSE_CACHE.get(dim)
    if a is None:
        a = _FALSE_CACHE[dim] = Atom((0,) * dim, 1, LE)
    return a


class Polyhedron:
    """Immutable conjunction of atoms over a :class:`VarSpace`.

    The empty conjunction is the universe. Emptiness and the minimized form
    are memoized on first use.
    """

    __slots__ = ("space", "atoms", "_empty", "_min")

    def __init__(self, space: VarSpace, atoms: Iterable = ()):
        self.space = space
        clean = _simplify(atoms)
        if clean is None:
            self.atoms: tuple[Atom, ...] = (_false_atom(space.dim),)
            self._empty: Optional[bool] = True
        else:
            self.atoms = tuple(clean)
            self._empty = None if self.atoms else False
        self._min: Optional[Polyhedron] = None

    # construction helpers

    @classmethod
    def universe(cls, space: VarSpace) -> "Polyhedron":
        return cls(space)

    @classmethod
    def empty(cls, space: VarSpace) -> "Polyhedron":
        return cls(space, [False])

    @classmethod
    def from_text(cls, space: VarSpace, constraints: Iterable[str] | str) -> "Polyhedron":
        if isinstance(constraints, str):
            parts = [c for c in re.split(r"\s+AND\s+|&", constraints) if c.strip()]
            if [c.strip() for c in parts] == ["TRUE"]:
                parts = []
        else:
            parts = list(constraints)
        return cls(space, [parse_atom(c, space) for c in parts])

    def _check(self, other: "Polyhedron"):
        if other.space != self.space:
            raise SpaceMismatch(f"{self.space} vs {other.space}")

    # basic queries

    def is_empty(self) -> bool:
        if self._empty is None:
            self._empty = atoms_empty(self.atoms)
        return self._empty

    def is_universe(self) -> bool:
        return not self.atoms

    def contains_point(self, point: Mapping[str, object]) -> bool:
        try:
            values = [Fraction(point[n]) for n in self.space.names]
        except KeyError as exc:
            raise GeometryError(f"point misses a value for {exc.args[0]!r}") from None
        return all(a.holds(values) for a in self.atoms)

    # lattice operations

    def conjoin(self, atoms: Iterable[Atom] | "Polyhedron") -> "Polyhedron":
        if isinstance(atoms, Polyhedron):
            self._check(atoms)
            atoms = atoms.atoms
        else:
            atoms = list(atoms)
            for a in atoms:
                if isinstance(a, Atom) and len(a.coeffs) != self.space.dim:
                    raise SpaceMismatch("atom dimension differs from polyhedron space")
        return Polyhedron(self.space, (*self.atoms, *atoms))

    def eliminate(self, var: str) -> "Polyhedron":
        return self._eliminate_indices([self.space.index(var)])

    def _eliminate_indices(self, indices: Iterable[int]) -> "Polyhedron":
        if self._empty:
            return self
        cur: Optional[list[Atom]] = list(self.atoms)
        for j in indices:
            cur = _eliminate(cur, j)
            if cur is None:
                return Polyhedron.empty(self.space)
        return Polyhedron(self.space, cur)

    def includes(self, other: "Polyhedron") -> bool:
        """True iff ``other`` is a subset of ``self``."""
        self._check(other)
        if other.is_empty():
            return True
        if self.is_empty():
            return False
        base = other.atoms
        for c in split_equalities(self._best_atoms()):
            if not atoms_empty((*base, negate(c))):
                return False
        return True

    def equals(self, other: "Polyhedron") -> bool:
        self._check(other)
        if self.canonical_atoms() == other.canonical_atoms():
            return True
        return self.includes(other) and other.includes(self)

    def _best_atoms(self) -> tuple[Atom, ...]:
        return self._min.atoms if self._min is not None else self.atoms

    def minimize(self) -> "Polyhedron":
        """Same point set, no redundant atom, deterministic order."""
        if self._min is not None:
            return self._min
        if self.is_empty():
            self._min = Polyhedron.empty(self.space)
            self._min._min = self._min
            return self._min
        atoms = _minimize_atoms(self.atoms)
        m = Polyhedron.__new__(Polyhedron)
        m.space, m.atoms, m._empty = self.space, atoms, False
        m._min = m
        self._min = m
        return m

    def canonical_atoms(self) -> tuple[Atom, ...]:
        return self.minimize().atoms

    def closure(self) -> "Polyhedron":
        return Polyhedron(self.space, (Atom(a.coeffs, a.const, LE) if a.rel == LT else a
                                       for a in self.atoms))

    # symbolic-state operators

    def time_elapse(self) -> "Polyhedron":
        """Delay every clock by a common nonnegative amount."""
        if self._empty:
            return self
        nclk = len(self.space.clocks)
        if nclk == 0:
            return self
        ext = []
        for a in self.atoms:
            d = -sum(a.coeffs[:nclk])
            ext.append(Atom(a.coeffs + (d,), a.const, a.rel))
        dim = self.space.dim
        ext.append(Atom((0,) * dim + (-1,), 0, LE))
        cur = _eliminate(_simplify(ext), dim)
        if cur is None:
            return Polyhedron.empty(self.space)
        return Polyhedron(self.space, (Atom(a.coeffs[:dim], a.const, a.rel) for a in cur))

    def reset(self, clocks: Iterable[str]) -> "Polyhedron":
        clocks = list(clocks)
        idx = []
        for x in clocks:
            if not self.space.is_clock(x):
                raise GeometryError(f"{x!r} is not a clock")
            idx.append(self.space.index(x))
        if not idx:
            return self
        p = self._eliminate_indices(idx)
        if p.is_empty():
            return p
        dim = self.space.dim
        pins = [Atom(tuple(1 if i == j else 0 for i in range(dim)), 0, EQ) for j in idx]
        return p.conjoin(pins)

    def project_params(self) -> "Polyhedron":
        return self._eliminate_indices(range(len(self.space.clocks)))

    def restrict(self, space: VarSpace) -> "Polyhedron":
        """Re-express over ``space``, a sub-space whose missing variables are unconstrained."""
        pos = [self.space.index(n) for n in space.names]
        keep = set(pos)
        if self.is_empty():
            return Polyhedron.empty(space)
        out = []
        for a in self.atoms:
            if any(c for i, c in enumerate(a.coeffs) if i not in keep):
                raise GeometryError("polyhedron constrains variables outside the target space")
            out.append(Atom(tuple(a.coeffs[i] for i in pos), a.const, a.rel))
        return Polyhedron(space, out)

    def substitute(self, values: Mapping[str, object], space: VarSpace) -> "Polyhedron":
        """Fix the variables in ``values`` to constants and drop them."""
        pos = [self.space.index(n) for n in space.names]
        fixed = [(self.space.index(n), Fraction(v)) for n, v in values.items()]
        if self.is_empty():
            return Polyhedron.empty(space)
        out = []
        for a in self.atoms:
            const = a.const + sum(a.coeffs[i] * v for i, v in fixed)
            out.append(make_atom([a.coeffs[i] for i in pos], const, a.rel))
        return Polyhedron(space, out)

    # rendering

    def to_text(self) -> str:
        if self.is_empty():
            return "FALSE"
        atoms = self.canonical_atoms()
        if not atoms:
            return "TRUE"
        return " AND ".join(render_atom(a, self.space) for a in atoms)

    def __str__(self):
        return self.to_text()

    def __repr__(self):
        return f"Polyhedron({self.to_text()!r})"


def _reduce_by(a: Atom, e: Atom, j: int):
    """Remove variable ``j`` from ``a`` using equality ``e`` (``e.coeffs[j] > 0``)."""
    b = a.coeffs[j]
    if not b:
        return a
    return _combine(a, e.coeffs[j], e, -b, a.rel)


def _minimize_atoms(atoms: Sequence[Atom]) -> tuple[Atom, ...]:
    eqs = [a for a in atoms if a.rel == EQ]
    ineqs = [a for a in atoms if a.rel != EQ]

    # implicit equalities: skipped when the relative interior is nonempty
    if any(a.rel == LE for a in ineqs) and atoms_empty(
            (*eqs, *(Atom(a.coeffs, a.const, LT) for a in ineqs))):
        keep = []
        for k, a in enumerate(ineqs):
            if a.rel == LE and atoms_empty(
                    (*eqs, *keep, *ineqs[k + 1:], Atom(a.coeffs, a.const, LT))):
                eqs.append(make_atom(a.coeffs, a.const, EQ))
            else:
                keep.append(a)
        ineqs = keep

    # equalities in reduced echelon form
    basis: list[tuple[int, Atom]] = []
    for e in sorted(set(eqs), key=_sort_key):
        for j, b in basis:
            e = _reduce_by(e, b, j)
            if isinstance(e, bool):
                break
        if isinstance(e, bool):
            continue
        j = next(i for i, c in enumerate(e.coeffs) if c)
        basis = [(k, _reduce_by(b, e, j)) for k, b in basis]
        basis.append((j, e))
    basis.sort(key=lambda t: t[0])
    eq_atoms = [b for _, b in basis]

    reduced = []
    for a in ineqs:
        for j, b in basis:
            a = _reduce_by(a, b, j)
            if isinstance(a, bool):
                break
        if a is True:
            continue
        reduced.append(a)
    clean = _simplify(reduced)
    assert clean is not None, "minimize called on an empty polyhedron"
    ineqs = sorted(clean, key=_sort_key)

    # redundancy removal
    kept = list(ineqs)
    k = 0
    while k < len(kept):
        rest = kept[:k] + kept[k + 1:]
        if atoms_empty((*eq_atoms, *rest, negate(kept[k]))):
            kept = rest
        else:
            k += 1
    return tuple(sorted(eq_atoms, key=_sort_key)) + tuple(kept)


# inclusion, envelope and merging


def envelope(p: Polyhedron, q: Polyhedron) -> Polyhedron:
    """Atoms of each operand that hold on the other operand."""
    p._check(q)
    keep = []
    for a, b in ((p, q), (q, p)):
        for c in split_equalities(a.canonical_atoms()):
            if atoms_empty((*b.atoms, negate(c))):
                keep.append(c)
    return Polyhedron(p.space, keep).minimize()


def try_merge(p: Polyhedron, q: Polyhedron) -> Optional[Polyhedron]:
    """Return ``p ∪ q`` when that union is convex, else ``None``.

    When one operand contains the other, that operand object itself is
    returned (``q`` is checked first).
    """
    p._check(q)
    if q.includes(p):
        return q
    if p.includes(q):
        return p
    pa = split_equalities(p.canonical_atoms())
    qa = split_equalities(q.canonical_atoms())
    env, viol_p, viol_q = [], [], []
    for c in pa:
        (env if atoms_empty((*q.atoms, negate(c))) else viol_p).append(c)
    for c in qa:
        (env if atoms_empty((*p.atoms, negate(c))) else viol_q).append(c)
    env_atoms = tuple(env)
    if atoms_empty(env_atoms):
        return None
    for c in viol_p:
        nc = negate(c)
        if atoms_empty((*env_atoms, nc)):
            continue
        for d in viol_q:
            if not atoms_empty((*env_atoms, nc, negate(d))):
                return None
    return Polyhedron(p.space, env_atoms).minimize()


# textual atoms

_TOKEN = re.compile(r"\s*(?:(?P<int>\d+)|(?P<id>[A-Za-z_][A-Za-z_0-9]*)|(?P<rel><=|>=|==|=|<|>)|(?P<op>[-+*]))")


def _tokenize(text: str):
    pos, out = 0, []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise AtomSyntaxError("unexpected character", text, pos + 1)
        kind = m.lastgroup
        out.append((kind, m.group(kind), m.start(kind) + 1))
        pos = m.end()
    return out


def _parse_term(tokens, i, text, space):
    coeffs = [0] * space.dim
    const = 0
    sign = 1
    if i < len(tokens) and tokens[i][:2] == ("op", "-"):
        sign = -1
        i += 1
    while True:
        if i >= len(tokens) or tokens[i][0] in ("rel", "op"):
            col = tokens[i][2] if i < len(tokens) else len(text) + 1
            raise AtomSyntaxError("empty term" if i == 0 or tokens[i - 1][0] == "rel"
                                  else "expected a factor", text, col)
        kind, val, col = tokens[i]
        i += 1
        if kind == "int":
            k = int(val)
            if i < len(tokens) and tokens[i][:2] == ("op", "*"):
                i += 1
                if i >= len(tokens) or tokens[i][0] != "id":
                    c = tokens[i][2] if i < len(tokens) else len(text) + 1
                    raise AtomSyntaxError("expected identifier after '*'", text, c)
                coeffs[_lookup(tokens[i], text, space)] += sign * k
                i += 1
            else:
                const += sign * k
        else:
            coeffs[_lookup(tokens[i - 1], text, space)] += sign
        if i < len(tokens) and tokens[i][:2] == ("op", "*"):
            raise AtomSyntaxError("non-linear term", text, tokens[i][2])
        if i < len(tokens) and tokens[i][0] == "op":
            sign = -1 if tokens[i][1] == "-" else 1
            i += 1
            continue
        return coeffs, const, i


def _lookup(tok, text, space):
    try:
        return space.index(tok[1])
    except UnknownIdentifier:
        raise UnknownIdentifier(f"unknown identifier {tok[1]!r}", text, tok[2]) from None


def parse_atom(text: str, space: VarSpace):
    """Parse ``term REL term`` into a normalized :class:`Atom`.

    Constant-only atoms come back as plain booleans.
    """
    tokens = _tokenize(text)
    lhs, lc, i = _parse_term(tokens, 0, text, space)
    if i >= len(tokens) or tokens[i][0] != "rel":
        c = tokens[i][2] if i < len(tokens) else len(text) + 1
        raise AtomSyntaxError("expected a relation", text, c)
    rel = tokens[i][1]
    if rel == "==":
        rel = EQ
    rhs, rc, j = _parse_term(tokens, i + 1, text, space)
    if j != len(tokens):
        raise AtomSyntaxError("trailing input", text, tokens[j][2])
    return make_atom([a - b for a, b in zip(lhs, rhs)], lc - rc, rel)


def _render_side(terms: list[tuple[int, str]], const: int) -> str:
    parts = []
    for k, name in terms:
        parts.append(name if k == 1 else f"{k}*{name}")
    if const:
        parts.append(str(const))
    return " + ".join(parts) if parts else "0"


def render_atom(a: Atom, space: VarSpace) -> str:
    """Human/grammar form: positive terms on the left, negative on the right."""
    names = space.names
    left = [(c, names[i]) for i, c in enumerate(a.coeffs) if c > 0]
    right = [(-c, names[i]) for i, c in enumerate(a.coeffs) if c < 0]
    lc = a.const if a.const > 0 else 0
    rc = -a.const if a.const < 0 else 0
    return f"{_render_side(left, lc)} {a.rel} {_render_side(right, rc)}"
