"""Lattice-surgery routing with CNOT-folded teleportations on color-code patch grids."""

from lsmove.circuit import Gate, LayeredCircuit, parse_circuit, random_circuit
from lsmove.router import Route, RoutedLayer, Schedule, route_static
from lsmove.routing_graph import Mapping, RoutingGraph, build_layout
from lsmove.teleport_optimizer import AnnealConfig, compile_optimized

__all__ = [
    "AnnealConfig",
    "Gate",
    "LayeredCircuit",
    "Mapping",
    "Route",
    "RoutedLayer",
    "RoutingGraph",
    "Schedule",
    "build_layout",
    "compile_optimized",
    "parse_circuit",
    "random_circuit",
    "route_static",
]

__version__ = "0.1.0"
