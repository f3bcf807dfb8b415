"""Bag-of-paths node criticality and network-disconnection benchmarks."""

from .bop import BopModel, bpc, bpcf, build_model
from .graph import CostPolicy, Graph, from_edge_list, read_edge_list, write_edge_list
from .measures import MeasureId, compute_scores, rank_nodes

__all__ = [
    "BopModel",
    "CostPolicy",
    "Graph",
    "MeasureId",
    "bpc",
    "bpcf",
    "build_model",
    "compute_scores",
    "from_edge_list",
    "rank_nodes",
    "read_edge_list",
    "write_edge_list",
]
__version__ = "0.1.0"
