"""Monomer-dimer (matching) partition functions at complex activities.

Exact evaluation, a correlation-decay approximation scheme off the negative
real axis, and gadget constructions used to study hardness on it.
"""

from .exact import ComplexExact, p_unmatched, parse_complex, z_exact
from .graph import Graph, parse_graph

__version__ = "0.1.0"

__all__ = ["Graph", "parse_graph", "ComplexExact", "parse_complex", "z_exact", "p_unmatched"]
