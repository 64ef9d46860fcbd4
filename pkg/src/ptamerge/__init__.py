"""Reachability synthesis for parametric timed automata with convex state merging."""

from .explorer import (ALL_HEURISTICS, NOMERGE, ExplorationLimits, ExplorationStats,
                       HeuristicConfig, Status, ZoneGraph, layer_bfs, parse_heuristic)
from .geometry import Atom, Polyhedron, VarSpace, envelope, parse_atom, try_merge
from .model import PTA, Edge, ModelError, instantiate, load_model, parse_model, serialize
from .synthesis import ParamConstraint, SynthesisResult, covers, ef_synth, result_equal

__version__ = "0.1.0"
