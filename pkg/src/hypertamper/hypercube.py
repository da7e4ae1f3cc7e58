"""The hypercube H_2^n, its edge configurations, diameter paths and tamperings.

Conventions
-----------
* A vertex is an integer code in ``[0, 2**n)``; coordinate ``j`` (1-based)
  of the vector form is bit ``j - 1`` of the code.
* The edge flipping bit ``i`` at base vertex ``b`` (bit ``i`` of ``b`` clear)
  has index ``i * 2**(n-1) + compress(b, i)``, where ``compress`` deletes bit
  ``i`` and closes the gap. Edge index 0 is the least significant bit of the
  hex serialization.
* A diameter path is a start vertex plus the order (1-based coordinates) in
  which coordinates are flipped. A free-start path and its reversal are the
  same undirected path; the canonical orientation is the one whose start code
  is smaller, i.e. the start with bit ``n-1`` clear.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterator, Sequence, Union

import numpy as np

from .caps import check_cap

Number = Union[int, float, Fraction]


class Variant(str, enum.Enum):
    """Which tampering (and which counting function) is meant."""

    ALL = "all"
    FROM_ZERO = "zero"

    @classmethod
    def parse(cls, value: Union[str, "Variant"]) -> "Variant":
        if isinstance(value, Variant):
            return value
        key = str(value).strip().lower().replace("-", "_")
        aliases = {"all": cls.ALL, "free": cls.ALL, "zero": cls.FROM_ZERO, "from_zero": cls.FROM_ZERO, "0": cls.FROM_ZERO}
        if key not in aliases:
            raise ValueError(f"unknown variant {value!r} (expected 'all' or 'zero')")
        return aliases[key]


def num_paths(n: int, variant: Variant) -> int:
    """m_n: 2^(n-1) n! diameter paths in all, n! starting from 0."""
    if Variant.parse(variant) is Variant.ALL:
        return 2 ** (n - 1) * math.factorial(n)
    return math.factorial(n)


def num_edges(n: int) -> int:
    return n * 2 ** (n - 1)


@dataclass(frozen=True)
class ModelParams:
    """Dimension, retention probability and tampering variant.

    ``p`` may be a :class:`~fractions.Fraction` (exact code paths accept only
    rationals) or a float. Use :meth:`from_gamma` for the ``p = gamma/n``
    parameterization; it is evaluated in double precision.
    """

    n: int
    p: Number
    variant: Variant = Variant.ALL
    seed: int = 0
    gamma: float | None = None

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        if not 0 <= self.p <= 1:
            raise ValueError(f"p must lie in [0, 1], got {self.p}")
        object.__setattr__(self, "variant", Variant.parse(self.variant))

    @classmethod
    def from_gamma(cls, n: int, gamma: float, variant: Variant = Variant.ALL, seed: int = 0) -> "ModelParams":
        return cls(n=n, p=float(gamma) / n, variant=variant, seed=seed, gamma=float(gamma))

    @property
    def m_n(self) -> int:
        return num_paths(self.n, self.variant)

    @property
    def p_float(self) -> float:
        return float(self.p)


# ---------------------------------------------------------------- vertices, edges


def antipode(v: int, n: int) -> int:
    return v ^ ((1 << n) - 1)


def _check_vertex(v: int, n: int) -> None:
    if not 0 <= v < (1 << n):
        raise ValueError(f"vertex {v} out of range for n={n}")


def _compress(base: int, i: int) -> int:
    return (base & ((1 << i) - 1)) | ((base >> (i + 1)) << i)


def _expand(c: int, i: int) -> int:
    return (c & ((1 << i) - 1)) | ((c >> i) << (i + 1))


def edge_index(u: int, i: int, n: int) -> int:
    """Index of the edge leaving ``u`` in direction ``i`` (0-based bit)."""
    if not 0 <= i < n:
        raise ValueError(f"direction {i} out of range for n={n}")
    _check_vertex(u, n)
    base = u & ~(1 << i)
    return i * (1 << (n - 1)) + _compress(base, i)


def edge_endpoints(e: int, n: int) -> tuple[int, int]:
    """The two endpoints ``(base, base | 2**i)`` of edge ``e``."""
    half = 1 << (n - 1)
    if not 0 <= e < n * half:
        raise ValueError(f"edge {e} out of range for n={n}")
    i, c = divmod(e, half)
    base = _expand(c, i)
    return base, base | (1 << i)


def edge_direction(e: int, n: int) -> int:
    return e // (1 << (n - 1))


@lru_cache(maxsize=32)
def vertex_edge_table(n: int) -> np.ndarray:
    """``table[i, v]`` is the index of the edge at ``v`` in direction ``i``."""
    v = np.arange(1 << n, dtype=np.int64)
    half = 1 << (n - 1)
    table = np.empty((n, 1 << n), dtype=np.int64)
    for i in range(n):
        base = v & ~(1 << i)
        table[i] = i * half + ((base & ((1 << i) - 1)) | ((base >> (i + 1)) << i))
    table.setflags(write=False)
    return table


# ---------------------------------------------------------------- configurations


class EdgeConfig:
    """A subset of the edges of H_2^n, stored as a boolean vector."""

    __slots__ = ("n", "bits")

    def __init__(self, n: int, bits: np.ndarray | None = None):
        check_cap("edge_config", n)
        size = num_edges(n)
        if bits is None:
            bits = np.zeros(size, dtype=bool)
        bits = np.asarray(bits, dtype=bool)
        if bits.shape != (size,):
            raise ValueError(f"bit vector of length {bits.shape} does not match n={n} ({size} edges)")
        self.n = n
        self.bits = bits

    @classmethod
    def full(cls, n: int) -> "EdgeConfig":
        check_cap("edge_config", n)
        return cls(n, np.ones(num_edges(n), dtype=bool))

    @classmethod
    def empty(cls, n: int) -> "EdgeConfig":
        return cls(n)

    @classmethod
    def from_edges(cls, n: int, edges: Iterator[int] | Sequence[int]) -> "EdgeConfig":
        cfg = cls(n)
        cfg.bits[list(edges)] = True
        return cfg

    def edges(self) -> list[int]:
        return np.flatnonzero(self.bits).tolist()

    def edge_count(self) -> int:
        return int(self.bits.sum())

    def has_edge(self, e: int) -> bool:
        return bool(self.bits[e])

    def contains_path(self, path: "DiameterPath") -> bool:
        return bool(self.bits[path_edges(path)].all())

    def with_edges(self, edges: Sequence[int]) -> "EdgeConfig":
        bits = self.bits.copy()
        bits[list(edges)] = True
        return EdgeConfig(self.n, bits)

    def without_edges(self, edges: Sequence[int]) -> "EdgeConfig":
        bits = self.bits.copy()
        bits[list(edges)] = False
        return EdgeConfig(self.n, bits)

    def issubset(self, other: "EdgeConfig") -> bool:
        return self.n == other.n and not np.any(self.bits & ~other.bits)

    def to_int(self) -> int:
        return int.from_bytes(np.packbits(self.bits, bitorder="little").tobytes(), "little")

    @classmethod
    def from_int(cls, n: int, value: int) -> "EdgeConfig":
        size = num_edges(n)
        if value < 0 or value >> size:
            raise ValueError(f"integer has bits beyond edge index {size - 1}")
        raw = np.frombuffer(value.to_bytes((size + 7) // 8, "little"), dtype=np.uint8)
        return cls(n, np.unpackbits(raw, bitorder="little")[:size].astype(bool))

    def to_hex(self) -> str:
        """Hex string of the bit vector; edge index 0 is the least significant bit."""
        return format(self.to_int(), "x")

    @classmethod
    def from_hex(cls, n: int, text: str) -> "EdgeConfig":
        return cls.from_int(n, int(text, 16))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, EdgeConfig):
            return NotImplemented
        return self.n == other.n and bool(np.array_equal(self.bits, other.bits))

    def __hash__(self) -> int:
        return hash((self.n, self.bits.tobytes()))

    def __repr__(self) -> str:
        return f"EdgeConfig(n={self.n}, edges={self.edge_count()}/{num_edges(self.n)})"


# ---------------------------------------------------------------- diameter paths


@dataclass(frozen=True)
class DiameterPath:
    """A diameter path given by its start vertex and coordinate flip order.

    ``order`` is a permutation of ``1..n``; edge ``k`` of the path flips
    coordinate ``order[k-1]``. ``from_zero`` marks paths of the tampering
    that starts at vertex 0.
    """

    start: int
    order: tuple[int, ...]
    from_zero: bool = False

    def __post_init__(self) -> None:
        order = tuple(int(c) for c in self.order)
        object.__setattr__(self, "order", order)
        n = len(order)
        if n < 1 or sorted(order) != list(range(1, n + 1)):
            raise ValueError(f"order {order} is not a permutation of 1..{n}")
        _check_vertex(self.start, n)
        if self.from_zero and self.start != 0:
            raise ValueError("a from-zero path must start at vertex 0")

    @property
    def n(self) -> int:
        return len(self.order)

    @property
    def end(self) -> int:
        return antipode(self.start, self.n)

    def vertices(self) -> list[int]:
        out = [self.start]
        for c in self.order:
            out.append(out[-1] ^ (1 << (c - 1)))
        return out

    def reversed(self) -> "DiameterPath":
        if self.from_zero:
            raise ValueError("a from-zero path has a fixed orientation")
        return DiameterPath(self.end, tuple(reversed(self.order)))

    def canonical(self) -> "DiameterPath":
        if self.from_zero or self.start < self.end:
            return self
        return self.reversed()

    @classmethod
    def reference(cls, n: int, from_zero: bool = False) -> "DiameterPath":
        """The path (0, id) through e_1, ..., e_n."""
        return cls(0, tuple(range(1, n + 1)), from_zero)


def path_edges(path: DiameterPath) -> list[int]:
    """Edge indices of the path, in traversal order."""
    n = path.n
    out = []
    v = path.start
    for c in path.order:
        out.append(edge_index(v, c - 1, n))
        v ^= 1 << (c - 1)
    return out


def iter_paths(n: int, variant: Variant) -> Iterator[DiameterPath]:
    """All canonical diameter paths of the variant, starts ascending, orders lexicographic."""
    zero = Variant.parse(variant) is Variant.FROM_ZERO
    starts = [0] if zero else range(1 << (n - 1))
    for x in starts:
        for order in itertools.permutations(range(1, n + 1)):
            yield DiameterPath(x, order, zero)


@lru_cache(maxsize=16)
def path_edge_matrix(n: int, variant: Variant) -> np.ndarray:
    """Row ``r`` holds the edge indices of the ``r``-th path of :func:`iter_paths`."""
    check_cap("path_matrix", n)
    variant = Variant.parse(variant)
    table = vertex_edge_table(n)
    perms = np.array(list(itertools.permutations(range(n))), dtype=np.int64).reshape(-1, n)
    steps = np.left_shift(1, perms)
    verts = np.zeros((len(perms), n + 1), dtype=np.int64)
    verts[:, 1:] = np.bitwise_xor.accumulate(steps, axis=1)
    starts = np.arange(1 << (n - 1)) if variant is Variant.ALL else np.array([0])
    blocks = []
    for x in starts:
        v = verts[:, :n] ^ x
        blocks.append(table[perms, v])
    out = np.concatenate(blocks)
    out.setflags(write=False)
    return out


def reference_edges(n: int) -> list[int]:
    """e_1, ..., e_n: the edges of the path (0, id)."""
    return [edge_index((1 << j) - 1, j, n) for j in range(n)]


# ---------------------------------------------------------------- measures


def sample_bits(n: int, p: float, rng: np.random.Generator) -> np.ndarray:
    p = float(p)
    size = num_edges(n)
    if p >= 1.0:
        return np.ones(size, dtype=bool)
    if p <= 0.0:
        return np.zeros(size, dtype=bool)
    return rng.random(size) < p


def sample_config(params: ModelParams, rng: np.random.Generator) -> EdgeConfig:
    """One draw from P_{n,p}: every edge kept independently with probability p."""
    check_cap("edge_config", params.n)
    return EdgeConfig(params.n, sample_bits(params.n, params.p_float, rng))


def random_path(n: int, variant: Variant, rng: np.random.Generator) -> DiameterPath:
    """A uniformly chosen canonical path of the variant.

    For the free-start variant a uniform (start, order) pair is drawn and
    canonicalized; each undirected path has exactly two such pairs, so the
    result is uniform over the 2^(n-1) n! paths.
    """
    order = tuple(int(c) + 1 for c in rng.permutation(n))
    if Variant.parse(variant) is Variant.FROM_ZERO:
        return DiameterPath(0, order, True)
    start = int(rng.integers(1 << n))
    return DiameterPath(start, order).canonical()


def tamper(config: EdgeConfig, params: ModelParams, rng: np.random.Generator) -> tuple[EdgeConfig, DiameterPath]:
    """Adjoin every edge of a uniformly chosen diameter path to ``config``."""
    if config.n != params.n:
        raise ValueError(f"config has n={config.n}, params have n={params.n}")
    path = random_path(params.n, params.variant, rng)
    return config.with_edges(path_edges(path)), path


def sample_tampered(params: ModelParams, rng: np.random.Generator) -> tuple[EdgeConfig, DiameterPath]:
    """One draw from the tampered measure Q_n: sample, then tamper with the same stream."""
    return tamper(sample_config(params, rng), params, rng)
