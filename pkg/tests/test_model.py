import json
import random
from fractions import Fraction

import pytest

from ptamerge.model import (PTA, ModelError, from_dict, goal_locations, instantiate,
                            parse_model, serialize, validate)

from conftest import CORPUS

LOOP_DOC = {
    "name": "loop",
    "parameters": ["p"],
    "initial": "l0",
    "locations": [{"name": n} for n in ("l0", "l1", "l2", "l3", "l4")],
    "edges": [
        {"from": "l0", "guard": ["p <= 1"], "action": "a", "to": "l1"},
        {"from": "l0", "guard": ["p > 1"], "action": "b", "to": "l2"},
    ],
}


def doc_with(**changes):
    d = json.loads(json.dumps(LOOP_DOC))
    d.update(changes)
    return d


def test_loop_shape(loop):
    assert len(loop.locations) == 5
    assert len(loop.edges) == 6
    assert loop.clocks == () and loop.params == ("p",)
    assert validate(loop) == []


def test_branches_shape(branches):
    assert len(branches.locations) == 2 and len(branches.edges) == 3
    assert branches.clocks == ("x", "y") and branches.params == ("p", "q")
    assert branches.invariant("l1").to_text() == "x <= p"


def test_reset_of_parameter_rejected():
    d = doc_with(edges=[{"from": "l0", "action": "a", "resets": ["p"], "to": "l1"}])
    with pytest.raises(ModelError, match="non-clock") as exc:
        from_dict(d)
    assert exc.value.code == "E_RESET_NON_CLOCK"


@pytest.mark.parametrize("change, code", [
    ({"edges": [{"from": "l0", "action": "a", "to": "nowhere"}]}, "E_UNKNOWN_LOCATION"),
    ({"locations": [{"name": "l0"}, {"name": "l0"}]}, "E_DUPLICATE_LOCATION"),
    ({"initial": "zz"}, "E_MISSING_INITIAL"),
    ({"edges": [{"from": "l0", "guard": ["r <= 1"], "action": "a", "to": "l1"}]}, "E_UNDECLARED"),
])
def test_validation_codes(change, code):
    with pytest.raises(ModelError) as exc:
        from_dict(doc_with(**change))
    assert exc.value.code == code


def test_missing_initial_field():
    d = doc_with()
    del d["initial"]
    with pytest.raises(ModelError) as exc:
        from_dict(d)
    assert exc.value.code == "E_MISSING_INITIAL"


def test_syntax_error_has_position():
    with pytest.raises(ModelError) as exc:
        parse_model('{\n  "name": "x",\n  oops\n}')
    assert exc.value.line == 3 and exc.value.col is not None


@pytest.mark.parametrize("path", sorted(CORPUS.glob("*.json")), ids=lambda p: p.stem)
def test_serialize_roundtrip(path):
    pta = parse_model(path.read_text())
    again = parse_model(serialize(pta))
    assert again.name == pta.name and again.space == pta.space
    assert [l.name for l in again.locations] == [l.name for l in pta.locations]
    for a, b in zip(pta.locations, again.locations):
        assert a.invariant.canonical_atoms() == b.invariant.canonical_atoms()
    for a, b in zip(pta.edges, again.edges):
        assert (a.source, a.action, a.resets, a.target) == (b.source, b.action, b.resets, b.target)
        assert a.guard.canonical_atoms() == b.guard.canonical_atoms()
    assert again.goal == pta.goal


def test_instantiate_loop(loop):
    inst = instantiate(loop, {"p": 2})
    assert inst.params == ()
    guards = {e.action: e.guard for e in inst.edges}
    assert guards["b"].is_universe()
    assert guards["a"].is_empty()


def test_instantiate_branches(branches):
    inst = instantiate(branches, {"p": 1, "q": 1})
    assert inst.invariant("l1").to_text() == "x <= 1"


def test_instantiate_parameter_free(loop):
    inst = instantiate(loop, {"p": 0})
    assert instantiate(inst, {}) is inst


def test_instantiate_errors(branches):
    with pytest.raises(ModelError) as exc:
        instantiate(branches, {"p": 1})
    assert exc.value.code == "E_MISSING_VALUE"
    with pytest.raises(ModelError):
        instantiate(branches, {"p": 1, "q": -1})


def test_instantiate_commutes_with_guards(branches):
    rng = random.Random(7)
    for _ in range(50):
        v = {"p": Fraction(rng.randint(0, 16), 4), "q": Fraction(rng.randint(0, 16), 4)}
        inst = instantiate(branches, v)
        for e, ie in zip(branches.edges, inst.edges):
            w = {"x": Fraction(rng.randint(0, 20), 4), "y": Fraction(rng.randint(0, 20), 4)}
            assert ie.guard.contains_point(w) == e.guard.contains_point({**w, **v})


def test_goal_locations(loop):
    assert goal_locations(loop, "l4, l2") == ("l4", "l2")
    assert goal_locations(loop, None) == loop.goal
    with pytest.raises(ModelError):
        goal_locations(loop, "l9")
