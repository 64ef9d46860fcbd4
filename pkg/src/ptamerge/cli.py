"""Command line entry point: synth, bench, summarize, gen."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .explorer import ALL_HEURISTICS, ExplorationLimits, HeuristicError, Status
from .geometry import GeometryError
from .harness.bench import read_csv, run_matrix, write_csv
from .harness.generator import gen_random_pta
from .harness.summary import summarize
from .model import ModelError, goal_locations, load_model
from .synthesis import ef_synth

EXIT_OK = 0
EXIT_IO = 1
EXIT_INPUT = 3
EXIT_LIMIT = 4


def _limits(args) -> ExplorationLimits:
    return ExplorationLimits(max_layers=args.max_layers, max_states=args.max_states,
                             wall_timeout=args.timeout)


def _add_limit_flags(p: argparse.ArgumentParser, timeout=None):
    p.add_argument("--timeout", type=float, default=timeout, help="wall clock seconds")
    p.add_argument("--max-states", type=int, default=None)
    p.add_argument("--max-layers", type=int, default=None)


def cmd_synth(args) -> int:
    pta = load_model(args.model)
    goal = goal_locations(pta, args.goal)
    res = ef_synth(pta, goal, args.heuristic, _limits(args))
    st = res.stats
    print(res.result.render())
    if not res.complete:
        print(f"# incomplete ({st.status.value}): under-approximation", file=sys.stderr)
    print(f"# status={st.status.value} states={st.states_final} transitions={st.transitions_final}"
          f" merges={st.merges_performed} tests={st.mergeability_tests}"
          f" time={st.wall_time:.3f}s", file=sys.stderr)
    if args.stats_json:
        doc = {
            "model": pta.name, "goal": ",".join(goal), "heuristic": args.heuristic,
            "status": st.status.value,
            "states": st.states_final, "transitions": st.transitions_final,
            "merges": st.merges_performed, "mergeability_tests": st.mergeability_tests,
            "layers": st.layers, "time_ms": int(round(st.wall_time * 1000)),
            "result": res.result.render(),
        }
        Path(args.stats_json).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
    if args.export_graph:
        Path(args.export_graph).write_text(res.graph.to_dot(pta), encoding="utf-8")
    return EXIT_OK if st.status is Status.COMPLETED else EXIT_LIMIT


def cmd_bench(args) -> int:
    heuristics = [h for arg in args.heuristics or () for h in arg.split(",") if h]
    if not args.heuristics or [h.lower() for h in heuristics] == ["all"]:
        heuristics = list(ALL_HEURISTICS)
    records = run_matrix(args.models, heuristics, _limits(args), workers=args.workers)
    write_csv(records, args.out)
    totals: dict[str, list[int]] = {}
    for r in records:
        t = totals.setdefault(r.heuristic, [0, 0, 0])
        t[0] += r.time_ms
        t[1] += r.states
        t[2] += r.completed
    print(f"{'heuristic':<10} {'total_ms':>10} {'states':>8} {'completed':>9}")
    for h, (ms, states, done) in totals.items():
        print(f"{h:<10} {ms:>10} {states:>8} {done:>9}")
    return EXIT_OK


def cmd_summarize(args) -> int:
    table = summarize(read_csv(args.input))
    sys.stdout.write(table.to_markdown() if args.out == "markdown" else table.to_csv())
    return EXIT_OK


def cmd_gen(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for seed in range(args.seed, args.seed + args.count):
        doc = gen_random_pta(seed, n_locations=args.locations, n_clocks=args.clocks,
                             n_params=args.params, max_const=args.max_const,
                             n_extra_edges=args.extra_edges)
        path = out / f"gen_{seed}.json"
        path.write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
        print(path)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ptamerge",
                                     description="Parameter synthesis for parametric timed automata")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="synthesize parameters reaching a goal")
    p.add_argument("--model", required=True)
    p.add_argument("--goal", default=None, help="comma separated locations (default: model goal)")
    p.add_argument("--heuristic", default="Nomerge")
    _add_limit_flags(p)
    p.add_argument("--stats-json", default=None)
    p.add_argument("--export-graph", default=None, help="write the final graph as DOT")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("bench", help="run heuristics over a directory of models")
    p.add_argument("--models", required=True)
    p.add_argument("--heuristics", nargs="*", default=None, help="codes separated by spaces or commas, or 'all' (default)")
    _add_limit_flags(p, timeout=60.0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("summarize", help="aggregate a benchmark CSV")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", choices=("csv", "markdown"), default="markdown")
    p.set_defaults(func=cmd_summarize)

    p = sub.add_parser("gen", help="write random models")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--out", required=True)
    p.add_argument("--locations", type=int, default=6)
    p.add_argument("--clocks", type=int, default=2)
    p.add_argument("--params", type=int, default=2)
    p.add_argument("--max-const", type=int, default=5)
    p.add_argument("--extra-edges", type=int, default=6)
    p.set_defaults(func=cmd_gen)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ModelError, HeuristicError, GeometryError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
