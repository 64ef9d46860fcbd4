"""Acceptance criteria 1-7. Each test prints one PASS/FAIL line.

Run alone with ``python3 -m pytest tests/test_acceptance.py -v``.
"""

import random
import sys
import time
from fractions import Fraction
from functools import lru_cache

import pytest

from ptamerge.explorer import (ALL_HEURISTICS, NOMERGE, ExplorationLimits, Status, layer_bfs,
                               parse_heuristic)
from ptamerge.geometry import (LT, Polyhedron, VarSpace, clear_caches, envelope,
                               parse_atom, try_merge)
from ptamerge.harness import (Verdict, gen_random_pta, read_csv, sample_inside, sample_outside,
                              summarize)
from ptamerge.harness.oracle import concrete_reachability, sample_point
from ptamerge.harness.summary import METRICS
from ptamerge.model import from_dict, load_model
from ptamerge.synthesis import ParamConstraint, ef_synth, result_equal

from conftest import CORPUS, FIXTURES, corpus_path

GEN_SEEDS = range(40)
STATE_BOUND = 2000
ALL_CFG = {code: parse_heuristic(code) for code in ALL_HEURISTICS}


def report(capsys, n, ok, detail=""):
    with capsys.disabled():
        sys.stdout.write(f"\nCRITERION {n}: {'PASS' if ok else 'FAIL'} {detail}\n")
    assert ok, f"criterion {n}: {detail}"


# shared corpus runs (criteria 3, 4, 7)

@pytest.fixture(scope="module")
def corpus():
    models = [(p.stem, load_model(p)) for p in sorted(CORPUS.glob("*.json"))]
    for seed in GEN_SEEDS:
        pta = from_dict(gen_random_pta(seed))
        _, st = layer_bfs(pta, NOMERGE, ExplorationLimits(max_states=STATE_BOUND), pta.goal)
        if st.status is Status.COMPLETED:
            models.append((f"gen_{seed}", pta))
    return models


@pytest.fixture(scope="module")
def corpus_runs(corpus):
    start = time.perf_counter()
    runs = {}
    limits = ExplorationLimits(max_states=STATE_BOUND, wall_timeout=60)
    for name, pta in corpus:
        runs[name] = {code: ef_synth(pta, None, code, limits) for code in ALL_HEURISTICS}
    return runs, time.perf_counter() - start


# 1

def test_criterion_1_loop(capsys, loop):
    start = time.perf_counter()
    problems = []
    zg, st = layer_bfs(loop, NOMERGE)
    if (st.states_final, st.transitions_final) != (7, 6):
        problems.append(f"Nomerge {st.states_final}/{st.transitions_final}")
    for code in ("OVM", "RVMr"):
        zg, st = layer_bfs(loop, ALL_CFG[code])
        ids = {s.loc: s.id for s in zg.states.values()}
        arcs = {(t[0], t[2]) for t in zg.transitions}
        cycle = (ids["l2"], ids["l3"]) in arcs and (ids["l3"], ids["l2"]) in arcs
        if st.states_final != 5 or not cycle:
            problems.append(f"{code} {st.states_final} cycle={cycle}")
    _, st = layer_bfs(loop, ALL_CFG["OQM"])
    if st.states_final != 6:
        problems.append(f"OQM {st.states_final}")
    ps = loop.space.param_space()
    want4 = ParamConstraint(ps, [Polyhedron.from_text(ps, ["0 <= p", "p <= 1"])])
    want2 = ParamConstraint(ps, [Polyhedron.from_text(ps, ["p >= 0"])])
    for code in ALL_HEURISTICS:
        if not result_equal(ef_synth(loop, "l4", code).result, want4):
            problems.append(f"{code} goal l4")
        if not result_equal(ef_synth(loop, "l2", code).result, want2):
            problems.append(f"{code} goal l2")
    elapsed = time.perf_counter() - start
    ok = not problems and elapsed < 1.0
    report(capsys, 1, ok, f"spurious-loop regression in {elapsed:.3f}s {problems or ''}")


# 2

AB = VarSpace((), ("a", "b"))


def box(a0, a1, b0, b1):
    return Polyhedron.from_text(AB, [f"{a0} <= a", f"a <= {a1}", f"{b0} <= b", f"b <= {b1}"])


def test_criterion_2_rectangles(capsys):
    c0, c1, c2, c3, c4 = (box(0, 1, 1, 3), box(1, 3, 1, 2), box(1, 3, 3, 4), box(1, 2, 0, 2),
                          box(1, 3, 2, 3))
    m14, m24 = try_merge(c1, c4), try_merge(c2, c4)
    checks = {
        "C1+C4": m14 is not None and m14.equals(box(1, 3, 1, 3)),
        "C2+C4": m24 is not None and m24.equals(box(1, 3, 2, 4)),
        "C1C4+C2C4": (m14 is not None and m24 is not None
                      and (m := try_merge(m14, m24)) is not None and m.equals(box(1, 3, 1, 4))),
        "C1C4+C0": (m14 is not None and (m := try_merge(m14, c0)) is not None
                    and m.equals(box(0, 3, 1, 3))),
        "C0+C4 fails": try_merge(c0, c4) is None,
        "C3+C1 fails": try_merge(c3, c1) is None,
    }
    bad = [k for k, v in checks.items() if not v]
    report(capsys, 2, not bad, f"mergeability table {bad or 'all 6 rows'}")


# 3

def test_criterion_3_heuristic_independence(capsys, corpus, corpus_runs):
    runs, elapsed = corpus_runs
    hand = sum(1 for name, _ in corpus if not name.startswith("gen_"))
    gen = len(corpus) - hand
    bad = []
    for name, by_code in runs.items():
        base = by_code["Nomerge"]
        for code, res in by_code.items():
            if not res.complete:
                bad.append(f"{name}/{code} {res.stats.status.value}")
            elif not result_equal(res.result, base.result):
                bad.append(f"{name}/{code} differs")
    ok = not bad and hand >= 10 and gen >= 30 and elapsed < 300
    report(capsys, 3, ok, f"{hand} hand + {gen} generated models x 25 configs in "
                          f"{elapsed:.1f}s {bad[:5] or ''}")


# 4

@lru_cache(maxsize=None)
def _verdict(name, key, bound):
    pta = _MODELS[name]
    return concrete_reachability(pta, None, dict(key), bound)


_MODELS: dict = {}


def test_criterion_4_concrete_oracle(capsys, corpus, corpus_runs):
    runs, _ = corpus_runs
    _MODELS.update(corpus)
    rng = random.Random(2024)
    disagreements, checked, raised = [], 0, 0
    for name, pta in corpus:
        for code, res in runs[name].items():
            if not res.complete:
                continue
            inside = sample_inside(res.result, 5, rng)
            outside = sample_outside(res.result, pta.params, 5, rng)
            for v, expect in [(v, True) for v in inside] + [(v, False) for v in outside]:
                key = tuple(sorted(v.items()))
                verdict, exhaustive = _verdict(name, key, STATE_BOUND)
                if expect and verdict is not Verdict.REACHED and not exhaustive:
                    raised += 1
                    verdict, exhaustive = _verdict(name, key, STATE_BOUND * 10)
                checked += 1
                if (verdict is Verdict.REACHED) != expect:
                    disagreements.append(f"{name}/{code} {dict(key)} expected "
                                         f"{'inside' if expect else 'outside'}")
    report(capsys, 4, not disagreements,
           f"{checked} valuations checked, {raised} bound raises {disagreements[:3] or ''}")


# 5

def _interval(atoms, dim):
    """Per-variable (lo, lo_strict, hi, hi_strict) of a box given by single-variable atoms."""
    iv = [[None, False, None, False] for _ in range(dim)]
    for a in atoms:
        if a.is_constant:
            continue
        j = next(k for k, c in enumerate(a.coeffs) if c)
        c = a.coeffs[j]
        bound = Fraction(-a.const, c)
        strict = a.rel == LT
        rows = [(c > 0, strict)] if a.rel != "=" else [(True, False), (False, False)]
        for upper, s in rows:
            cur = iv[j]
            if upper:
                if cur[2] is None or bound < cur[2] or (bound == cur[2] and s):
                    cur[2], cur[3] = bound, s
            else:
                if cur[0] is None or bound > cur[0] or (bound == cur[0] and s):
                    cur[0], cur[1] = bound, s
    return iv


def _iv_empty(iv):
    for lo, ls, hi, hs in iv:
        if lo is not None and hi is not None and (lo > hi or (lo == hi and (ls or hs))):
            return True
    return False


def _iv_includes(big, small):
    """Is the nonempty box ``small`` inside ``big``?"""
    for (blo, bls, bhi, bhs), (slo, sls, shi, shs) in zip(big, small):
        if blo is not None:
            if slo is None or slo < blo or (slo == blo and bls and not sls):
                return False
        if bhi is not None:
            if shi is None or shi > bhi or (shi == bhi and bhs and not shs):
                return False
    return True


def _random_box(rng, space):
    atoms = []
    for name in space.names:
        for _ in range(rng.randint(0, 2)):
            k = rng.randint(-3, 3)
            rel = rng.choice(["<", "<=", ">", ">=", "="] if rng.random() < 0.1 else
                             ["<", "<=", ">", ">="])
            atoms.append(parse_atom(f"{name} {rel} {k}", space))
    return Polyhedron(space, atoms), atoms


def _box_pair(rng):
    lo_a, lo_b = rng.randint(0, 3), rng.randint(0, 3)
    hi_a, hi_b = lo_a + rng.randint(0, 2), lo_b + rng.randint(1, 2)
    p = [f"{lo_a} <= a", f"a <= {hi_a}", f"{lo_b} <= b", f"b <= {hi_b}"]
    if rng.random() < 0.6:  # neighbour sharing the a-interval
        lo2 = rng.randint(lo_b, hi_b + 1)
        q = [f"{lo_a} <= a", f"a <= {hi_a}", f"{lo2} {rng.choice(['<', '<='])} b",
             f"b <= {lo2 + rng.randint(0, 2)}"]
    else:
        la, lb = rng.randint(0, 3), rng.randint(0, 3)
        q = [f"{la} <= a", f"a <= {la + rng.randint(0, 2)}", f"{lb} <= b",
             f"b <= {lb + rng.randint(0, 2)}"]
    if rng.random() < 0.3:
        cut = f"a + b <= {rng.randint(2, 8)}"
        p.append(cut)
        if rng.random() < 0.5:
            q.append(cut)
    return Polyhedron.from_text(AB, p), Polyhedron.from_text(AB, q)


def test_criterion_5_geometry_oracles(capsys):
    rng = random.Random(5)
    box_errors = 0
    for i in range(1000):
        dim = rng.randint(1, 3)
        space = VarSpace(tuple("xyz"[:dim]), ())
        (p, raw_p), (q, raw_q) = _random_box(rng, space), _random_box(rng, space)
        ip, iq = _interval(raw_p, dim), _interval(raw_q, dim)
        if p.is_empty() != _iv_empty(ip):
            box_errors += 1
        if not _iv_empty(ip) and not _iv_empty(iq):
            if p.includes(q) != _iv_includes(ip, iq):
                box_errors += 1
        v = rng.randrange(dim)
        e = p.eliminate(space.names[v])
        expect = [[None, False, None, False] if k == v else ip[k] for k in range(dim)]
        if _iv_empty(ip):
            box_errors += not e.is_empty()
        else:
            box_errors += e.is_empty() or _interval(e.atoms, dim) != expect

    merges, violations, env_mismatch = 0, 0, 0
    for _ in range(500):
        p, q = _box_pair(rng)
        if p.is_empty() or q.is_empty():
            continue
        m = try_merge(p, q)
        if m is None:
            continue
        merges += 1
        if not m.equals(envelope(p, q)):
            env_mismatch += 1
        pts_p = [sample_point(p, rng) for _ in range(10)]
        pts_q = [sample_point(q, rng) for _ in range(10)]
        for _ in range(100):
            a, b = rng.choice(pts_p), rng.choice(pts_q)
            lam = Fraction(rng.randint(0, 16), 16)
            c = {n: lam * a[n] + (1 - lam) * b[n] for n in AB.names}
            if not (p.contains_point(c) or q.contains_point(c)):
                violations += 1
    ok = box_errors == 0 and violations == 0 and env_mismatch == 0 and merges > 0
    report(capsys, 5, ok, f"1000 box instances ({box_errors} errors), {merges} merges out of "
                          f"500 pairs ({violations} violations, {env_mismatch} envelope mismatches)")


# 6

def test_criterion_6_summarizer_golden(capsys):
    import json
    table = summarize(read_csv(FIXTURES / "summary_fixture.csv"))
    expected = json.loads((FIXTURES / "summary_expected.json").read_text())
    bad = []
    if (table.executions, table.merge_executions) != (expected["executions"],
                                                      expected["merge_executions"]):
        bad.append("execution counts")
    for row in table.rows:
        for m in METRICS:
            if abs(getattr(row, m) - expected["rows"][row.heuristic][m]) > 1e-9:
                bad.append(f"{row.heuristic}.{m}")
    if [r.heuristic for r in table.rows] != list(expected["rows"]):
        bad.append("row order")
    report(capsys, 6, not bad, f"6-row fixture {bad or 'matches'}")


# 7

def _best_time(pta, code, reps=3):
    best = None
    for _ in range(reps):
        clear_caches()
        res = ef_synth(pta, None, code, ExplorationLimits(max_states=STATE_BOUND, wall_timeout=60))
        best = res.stats.wall_time if best is None else min(best, res.stats.wall_time)
    return best


def test_criterion_7_performance(capsys, corpus, corpus_runs):
    runs, _ = corpus_runs
    bigger = []
    for name, by_code in runs.items():
        base = by_code["Nomerge"].stats.states_final
        for code, res in by_code.items():
            if res.stats.states_final > base:
                bigger.append(f"{name}/{code}")
    merged = [(name, pta) for name, pta in corpus
              if any(r.stats.merges_performed for r in runs[name].values())]
    t_nomerge = sum(_best_time(pta, "Nomerge") for _, pta in merged)
    t_oqm = sum(_best_time(pta, "OQM") for _, pta in merged)
    with capsys.disabled():
        sys.stdout.write(f"\n  merge subset ({len(merged)} models): Nomerge {t_nomerge * 1000:.1f} ms,"
                         f" OQM {t_oqm * 1000:.1f} ms\n")
    ok = not bigger and t_oqm <= t_nomerge
    report(capsys, 7, ok, f"state counts never above Nomerge {bigger[:5] or ''}; "
                          f"OQM {t_oqm * 1000:.1f} ms <= Nomerge {t_nomerge * 1000:.1f} ms")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
