"""Vertex-centric processing of dynamic graphs with adaptive repartitioning."""
from .engine import Engine, SuperstepReport, VertexProgram
from .graph import (ChangeBuffer, ChangeEvent, ChangeKind, DynamicGraph, apply_changes,
                    cut_ratio, edge_cut_set, neighbour_partition_histogram)
from .heuristic import HeuristicConfig, PartitionLedger

__version__ = "0.1.0"
