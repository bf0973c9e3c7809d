"""Exact districting of planar graphs by dynamic programming over sphere-cut decompositions."""

from .graph import EmbeddedGraph, GraphError, InfeasibleSpec, ProblemSpec, build_graph, load_graph
from .solve import NoSolution, Plan, Solver, validate_plan

__all__ = [
    "EmbeddedGraph",
    "GraphError",
    "InfeasibleSpec",
    "NoSolution",
    "Plan",
    "ProblemSpec",
    "Solver",
    "build_graph",
    "load_graph",
    "validate_plan",
]
