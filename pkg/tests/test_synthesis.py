import pytest

from ptamerge.explorer import ALL_HEURISTICS, NOMERGE, ExplorationLimits, Status
from ptamerge.geometry import Polyhedron, SpaceMismatch, VarSpace
from ptamerge.model import from_dict, load_model, to_dict
from ptamerge.synthesis import ParamConstraint, covers, ef_synth, result_equal

from conftest import CORPUS

P = VarSpace((), ("p",))
PQ = VarSpace((), ("p", "q"))


def pc(space, *disjuncts):
    return ParamConstraint(space, [Polyhedron.from_text(space, list(d)) for d in disjuncts])


def test_covers_examples():
    # parameters range over nonnegative values, so the lower half is bounded by 0
    assert covers(pc(P, ["p >= 0"]), pc(P, ["0 <= p", "p <= 1"], ["p > 1"]))
    assert not covers(pc(P, ["p >= 0"]), pc(P, ["p <= 1"], ["p > 1"]))
    assert not covers(pc(P, ["p <= 1"]), pc(P, ["p >= 0"]))
    assert covers(pc(P), pc(P))


def test_covers_needs_several_pieces():
    a = pc(PQ, ["p <= 1"], ["p >= 1", "q <= 2"], ["q >= 2"])
    assert covers(a, pc(PQ, []))
    assert not covers(pc(PQ, ["p <= 1"], ["q >= 2"]), pc(PQ, []))


def test_result_equal_examples():
    assert result_equal(pc(P, ["0 <= p", "p <= 1"]), pc(P, ["p >= 0", "p <= 1"]))
    assert not result_equal(pc(P, ["p <= 1"]), pc(P, ["p < 1"]))
    a = pc(PQ, ["p <= q"], ["q <= 1"])
    assert result_equal(a, a)


def test_space_mismatch():
    with pytest.raises(SpaceMismatch):
        covers(pc(P, ["p <= 1"]), pc(PQ, ["p <= 1"]))


def test_normalization():
    c = pc(P, ["p <= 1"], ["p <= 2"], ["p < 0"], ["p >= 5"])
    assert len(c.disjuncts) == 2
    assert c.render() == "5 <= p OR p <= 2"
    assert pc(P).render() == "FALSE" and pc(P).is_false()
    assert c.contains_point({"p": 6}) and not c.contains_point({"p": 3})


@pytest.mark.parametrize("code", ALL_HEURISTICS)
def test_loop_goals(loop, code):
    r4 = ef_synth(loop, "l4", code)
    assert r4.complete
    assert result_equal(r4.result, pc(P, ["0 <= p", "p <= 1"]))
    r2 = ef_synth(loop, {"l2"}, code)
    assert result_equal(r2.result, pc(P, ["p >= 0"]))


def test_loop_render(loop):
    assert ef_synth(loop, "l4", "OQM").result.render() == "0 <= p AND p <= 1"


def test_unreachable_goal(loop):
    doc = to_dict(loop)
    doc["locations"].append({"name": "lonely"})
    pta = from_dict(doc)
    res = ef_synth(pta, "lonely", NOMERGE)
    assert res.complete and res.result.is_false()


@pytest.mark.parametrize("path", sorted(CORPUS.glob("*.json")), ids=lambda p: p.stem)
def test_truncated_runs_are_under_approximations(path):
    pta = load_model(path)
    full = ef_synth(pta, None, NOMERGE)
    assert full.complete
    for code in ("Nomerge", "OQM", "RVMr"):
        for layers in (1, 2, 3):
            part = ef_synth(pta, None, code, ExplorationLimits(max_layers=layers))
            if part.stats.status is Status.COMPLETED:
                continue
            assert covers(full.result, part.result), (code, layers)
