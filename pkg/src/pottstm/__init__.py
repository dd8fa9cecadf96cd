"""Exact Potts partition functions and chromatic polynomials by tree-decomposed transfer matrices."""

from .graph import Graph, parse_graph, random_planar_graph, serialize_graph
from .weights import Mode, Weight

__version__ = "0.1.0"

__all__ = ["Graph", "Mode", "Weight", "parse_graph", "random_planar_graph", "serialize_graph"]
