"""Per-operation size limits, enforced in one place so error text is uniform."""

from __future__ import annotations

#: largest admissible dimension (or vertex count) per operation
CAPS: dict[str, int] = {
    "edge_config": 24,
    "count_from_zero": 20,
    "count_all": 13,
    "count_oracle": 7,
    "path_matrix": 7,
    "overlap_exact": 7,
    "enumerate_configs": 3,
    "binomial_moments": 16,
    "t_sum_identity": 16,
    "c_table_j": 200,
    "c_table_k": 64,
    "c_via_nilpotent": 64,
    "ham_count": 18,
    "ham_naive": 9,
    "ham_enumerate": 5,
}


class CapError(ValueError):
    """A requested size exceeds the documented limit of an operation."""


def check_cap(op: str, value: int, what: str = "n") -> None:
    limit = CAPS[op]
    if value > limit:
        raise CapError(f"cap exceeded: {op} requires {what} <= {limit}, got {what}={value}")
