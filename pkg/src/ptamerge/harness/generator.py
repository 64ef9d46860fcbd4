"""Seeded generator of small random parametric timed automata."""

from __future__ import annotations

import random

CLOCK_NAMES = ("x", "y")
PARAM_NAMES = ("p", "q")


def _bound(rng: random.Random, clock: str, params, max_const: int, upper: bool) -> str:
    rhs = rng.choice(params) if params and rng.random() < 0.5 else str(rng.randint(0, max_const))
    if upper:
        return f"{clock} {rng.choice(('<=', '<'))} {rhs}"
    return f"{clock} {rng.choice(('>=', '>'))} {rhs}"


def gen_random_pta(seed: int, n_locations: int = 6, n_clocks: int = 2, n_params: int = 2,
                   max_const: int = 5, n_extra_edges: int = 6) -> dict:
    """Model document for a random automaton, fully determined by ``seed`` and the sizes.

    Locations form a forward chain with a few extra edges. Edges going back to an
    earlier (or the same) location reset every clock.
    """
    if n_locations < 1:
        raise ValueError("need at least one location")
    if not 0 <= n_clocks <= len(CLOCK_NAMES):
        raise ValueError(f"between 0 and {len(CLOCK_NAMES)} clocks supported")
    if not 0 <= n_params <= len(PARAM_NAMES):
        raise ValueError(f"between 0 and {len(PARAM_NAMES)} parameters supported")
    if max_const < 0:
        raise ValueError("max_const must be nonnegative")
    rng = random.Random(seed)
    clocks = list(CLOCK_NAMES[:n_clocks])
    params = list(PARAM_NAMES[:n_params])
    names = [f"l{i}" for i in range(n_locations)]

    locations = []
    for i, name in enumerate(names):
        loc = {"name": name}
        inv = [_bound(rng, c, params, max_const, True) for c in clocks if rng.random() < 0.3]
        if inv and i > 0:
            loc["invariant"] = inv
        locations.append(loc)

    pairs = [(i, i + 1) for i in range(n_locations - 1)]
    for _ in range(n_extra_edges if n_locations > 1 else 0):
        pairs.append((rng.randrange(n_locations), rng.randrange(n_locations)))

    edges = []
    for k, (i, j) in enumerate(pairs):
        guard = []
        for c in clocks:
            r = rng.random()
            if r < 0.35:
                guard.append(_bound(rng, c, params, max_const, False))
            elif r < 0.6:
                guard.append(_bound(rng, c, params, max_const, True))
        if j <= i:
            resets = list(clocks)
        else:
            resets = [c for c in clocks if rng.random() < 0.4]
        edge = {"from": names[i], "to": names[j], "action": f"a{k}"}
        if guard:
            edge["guard"] = guard
        if resets:
            edge["resets"] = resets
        edges.append(edge)

    return {
        "name": f"gen_{seed}",
        "clocks": clocks,
        "parameters": params,
        "initial": names[0],
        "locations": locations,
        "edges": edges,
        "goal": [names[-1]],
    }
