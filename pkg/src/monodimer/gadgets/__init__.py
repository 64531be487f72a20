"""Graphs that implement vertex and edge activities at a fixed base activity."""

from .bootstrap import (build_edge_gadget, build_vertex_gadget, build_vertex_gadget_fast,
                        bootstrap_context)
from .cover import CoverError, CoverSystem, iterate_cover_maps, make_cover_system
from .exceptional import (build_exceptional_edge_minus_one, build_exceptional_vertex_gadget,
                          build_vertex_gadget_dense, is_exceptional, substitute_edges,
                          tree_ratio_sequence)
from .gadget import EDGE, VERTEX, Gadget, GadgetError
from .perfect import build_minus_one_tree, build_quarter_edge_gadget
from .poly import Polynomial, poly_perturbation_radius, ratio_perturbation_radius

__all__ = [
    "Gadget", "GadgetError", "VERTEX", "EDGE", "Polynomial", "poly_perturbation_radius",
    "ratio_perturbation_radius", "tree_ratio_sequence", "is_exceptional",
    "build_vertex_gadget_dense", "build_minus_one_tree", "build_quarter_edge_gadget",
    "build_exceptional_edge_minus_one", "build_exceptional_vertex_gadget", "substitute_edges",
    "CoverSystem", "CoverError", "make_cover_system", "iterate_cover_maps",
    "build_vertex_gadget_fast", "build_vertex_gadget", "build_edge_gadget", "bootstrap_context",
]
