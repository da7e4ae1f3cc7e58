"""Desk-scale laboratory for tampering detection in random hypercubes."""

__version__ = "0.1.0"

from .hypercube import (  # noqa: E402
    DiameterPath,
    EdgeConfig,
    ModelParams,
    Variant,
    edge_endpoints,
    edge_index,
    path_edges,
    sample_config,
    tamper,
)
from .counting import count_all, count_from_zero, count_oracle, expected_count, overlap_distribution  # noqa: E402

__all__ = [
    "DiameterPath",
    "EdgeConfig",
    "ModelParams",
    "Variant",
    "count_all",
    "count_from_zero",
    "count_oracle",
    "edge_endpoints",
    "edge_index",
    "expected_count",
    "overlap_distribution",
    "path_edges",
    "sample_config",
    "tamper",
]
