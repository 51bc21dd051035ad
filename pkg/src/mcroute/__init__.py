"""Qubit routing for multi-core devices joined by teleportation links."""

from .arch import Architecture, DistanceTables, build_grid_arch, parse_arch_spec, precompute_distances
from .circuit import build_dag, circuit_from_spec, parse_qasm
from .layout import Layout, initial_layout, search_layout
from .program import RoutedProgram
from .router import RouterParams, RoutingAborted, route
from .verify import Metrics, compute_metrics, validate

__all__ = [
    "Architecture", "DistanceTables", "Layout", "Metrics", "RoutedProgram", "RouterParams",
    "RoutingAborted", "build_dag", "build_grid_arch", "circuit_from_spec", "compute_metrics",
    "initial_layout", "parse_arch_spec", "parse_qasm", "precompute_distances", "route",
    "search_layout", "validate",
]
