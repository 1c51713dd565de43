"""Sequential Bayesian social learning on networks."""

__version__ = "0.1.0"

from .engine import DecisionTable, DecisionTrace, EngineConfig, build_tables, decide, exact_rate_fixed, simulate_sequence
from .graph import Graph, Modification, Ordering, OrientedView, apply_modification, build_graph
from .rates import OracleConfig, RateEstimate, conditional_rate, graph_rate, learning_oracle, positional_rate, rate_random

__all__ = [
    "DecisionTable",
    "DecisionTrace",
    "EngineConfig",
    "Graph",
    "Modification",
    "OracleConfig",
    "Ordering",
    "OrientedView",
    "RateEstimate",
    "apply_modification",
    "build_graph",
    "build_tables",
    "conditional_rate",
    "decide",
    "exact_rate_fixed",
    "graph_rate",
    "learning_oracle",
    "positional_rate",
    "rate_random",
    "simulate_sequence",
]
