"""Two companion tampering models.

Hamiltonian paths planted in G(n, p), where the edge count alone already
separates the tampered law from the untampered one, and an increasing
subsequence planted in a uniform permutation, watched through the longest
increasing subsequence.
"""

from __future__ import annotations

import bisect
import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .caps import check_cap


def pair_index(i: int, j: int, n: int) -> int:
    """Slot of the edge {i, j} (0-based vertices) in the row-major upper triangle."""
    if i == j or not (0 <= i < n and 0 <= j < n):
        raise ValueError(f"invalid edge ({i}, {j}) for n={n}")
    if i > j:
        i, j = j, i
    return i * (2 * n - i - 1) // 2 + (j - i - 1)


class ErConfig:
    """Edge configuration of the complete graph on n vertices."""

    __slots__ = ("n", "bits")

    def __init__(self, n: int, bits: np.ndarray | None = None):
        size = n * (n - 1) // 2
        bits = np.zeros(size, dtype=bool) if bits is None else np.asarray(bits, dtype=bool)
        if bits.shape != (size,):
            raise ValueError(f"expected {size} edge slots for n={n}, got {bits.shape}")
        self.n = n
        self.bits = bits

    @classmethod
    def complete(cls, n: int) -> "ErConfig":
        return cls(n, np.ones(n * (n - 1) // 2, dtype=bool))

    @classmethod
    def from_edges(cls, n: int, edges: Sequence[tuple[int, int]]) -> "ErConfig":
        cfg = cls(n)
        for i, j in edges:
            cfg.bits[pair_index(i, j, n)] = True
        return cfg

    def adjacency(self) -> np.ndarray:
        adj = np.zeros((self.n, self.n), dtype=bool)
        iu = np.triu_indices(self.n, k=1)
        adj[iu] = self.bits
        return adj | adj.T

    def edge_count(self) -> int:
        return int(self.bits.sum())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ErConfig):
            return NotImplemented
        return self.n == other.n and bool(np.array_equal(self.bits, other.bits))

    def __repr__(self) -> str:
        return f"ErConfig(n={self.n}, edges={self.edge_count()})"


def er_sample(n: int, p: float, rng: np.random.Generator) -> ErConfig:
    size = n * (n - 1) // 2
    p = float(p)
    if p >= 1.0:
        return ErConfig(n, np.ones(size, dtype=bool))
    return ErConfig(n, rng.random(size) < p)


def random_hamiltonian_path(n: int, rng: np.random.Generator) -> tuple[int, ...]:
    """Uniform over the n!/2 undirected paths, oriented so the first endpoint is smaller."""
    order = tuple(int(v) for v in rng.permutation(n))
    return order if order[0] < order[-1] else order[::-1]


def ham_path_slots(path: Sequence[int], n: int) -> list[int]:
    return [pair_index(a, b, n) for a, b in zip(path, path[1:])]


def ham_tamper(config: ErConfig, rng: np.random.Generator) -> tuple[ErConfig, tuple[int, ...]]:
    """Adjoin a uniformly chosen Hamiltonian path."""
    if config.n < 2:
        raise ValueError("need n >= 2")
    path = random_hamiltonian_path(config.n, rng)
    bits = config.bits.copy()
    bits[ham_path_slots(path, config.n)] = True
    return ErConfig(config.n, bits), path


def ham_count(config: ErConfig) -> int:
    """Undirected Hamiltonian paths, by a DP over (visited set, endpoint).

    Directed path counts per state are at most n! <= 18! < 2**63.
    """
    n = config.n
    check_cap("ham_count", n)
    if n < 2:
        raise ValueError("need n >= 2")
    adj = config.adjacency().astype(np.int64)
    size = 1 << n
    masks = np.arange(size, dtype=np.int64)
    pop = np.zeros(size, dtype=np.int64)
    for v in range(n):
        pop += (masks >> v) & 1
    f = np.zeros((size, n), dtype=np.int64)
    for v in range(n):
        f[1 << v, v] = 1
    for k in range(2, n + 1):
        layer = masks[pop == k]
        for v in range(n):
            sel = layer[(layer >> v) & 1 == 1]
            f[sel, v] = f[sel ^ (1 << v)] @ adj[:, v]
    return int(f[size - 1].sum()) // 2


def ham_count_naive(config: ErConfig) -> int:
    """Permutation enumeration; the independent check for :func:`ham_count`."""
    n = config.n
    check_cap("ham_naive", n)
    adj = config.adjacency()
    return sum(
        1
        for perm in itertools.permutations(range(n))
        if perm[0] < perm[-1] and all(adj[a, b] for a, b in zip(perm, perm[1:]))
    )


@dataclass(frozen=True)
class EdgeCountDetector:
    """Mean shift of the edge count against its untampered spread."""

    n: int
    p: float
    delta_exp: float
    sd: float
    z: float
    label: str
    degenerate: bool = False


def edge_count_detector(n: int, p: float, z_threshold: float = 3.0) -> EdgeCountDetector:
    """Delta = (1-p)(n-1), SD = sqrt(|e_n| p (1-p)), z = Delta/SD.

    The label is ``detectable-by-edge-count`` when z exceeds ``z_threshold``;
    this is a finite-n reading of the growth-rate comparison, not a limit.
    """
    edges = n * (n - 1) // 2
    p = float(p)
    delta = (1 - p) * (n - 1)
    if p <= 0.0 or p >= 1.0:
        return EdgeCountDetector(n, p, delta, 0.0, math.inf if delta > 0 else 0.0, "degenerate", True)
    sd = math.sqrt(edges * p * (1 - p))
    z = delta / sd
    label = "detectable-by-edge-count" if z > z_threshold else "inconclusive"
    return EdgeCountDetector(n, p, delta, sd, z, label)


def tampered_edge_mean(n: int, p: float) -> float:
    """(|e_n| - (n-1)) p + (n-1)."""
    edges = n * (n - 1) // 2
    return (edges - (n - 1)) * p + (n - 1)


def ham_size_bias_check(n: int, p: Fraction) -> tuple[bool, Fraction]:
    """Tampered law of G(n, p) against the N^ham size-biased law, by enumeration (n <= 5)."""
    check_cap("ham_enumerate", n)
    p = Fraction(p)
    size = n * (n - 1) // 2
    paths = [perm for perm in itertools.permutations(range(n)) if perm[0] < perm[-1]]
    masks = [sum(1 << s for s in ham_path_slots(path, n)) for path in paths]
    probs = [p ** bin(w).count("1") * (1 - p) ** (size - bin(w).count("1")) for w in range(1 << size)]
    counts = [sum(1 for m in masks if w & m == m) for w in range(1 << size)]
    mean = sum((c * q for c, q in zip(counts, probs)), Fraction(0))
    push = [Fraction(0)] * (1 << size)
    for m in masks:
        for w, q in enumerate(probs):
            push[w | m] += q
    push = [q / len(masks) for q in push]
    worst = max(abs(a - c * q / mean) for a, c, q in zip(push, counts, probs))
    return worst == 0, worst


# ---------------------------------------------------------------- permutations


@dataclass(frozen=True)
class PermSample:
    """A permutation of 1..n, with the positions planted by a tampering if any."""

    perm: tuple[int, ...]
    planted: tuple[int, ...] | None = None

    def __post_init__(self) -> None:
        if sorted(self.perm) != list(range(1, len(self.perm) + 1)):
            raise ValueError("not a permutation of 1..n")

    @property
    def n(self) -> int:
        return len(self.perm)


def random_permutation(n: int, rng: np.random.Generator) -> PermSample:
    return PermSample(tuple(int(v) + 1 for v in rng.permutation(n)))


def lis_tamper(sample: PermSample, k: int, rng: np.random.Generator) -> PermSample:
    """Pull k uniformly chosen cards and put them back into the vacated places in increasing order."""
    n = sample.n
    if not 1 <= k <= n:
        raise ValueError(f"k={k} out of range 1..{n}")
    positions = np.sort(rng.choice(n, size=k, replace=False))
    perm = list(sample.perm)
    values = sorted(perm[i] for i in positions)
    for i, v in zip(positions, values):
        perm[i] = v
    return PermSample(tuple(perm), tuple(int(i) for i in positions))


def lis_length(perm: Sequence[int]) -> int:
    """Length of the longest increasing subsequence (patience sorting)."""
    tops: list[int] = []
    for v in perm:
        i = bisect.bisect_left(tops, v)
        if i == len(tops):
            tops.append(v)
        else:
            tops[i] = v
    return len(tops)


def lis_length_brute(perm: Sequence[int]) -> int:
    """Quadratic DP, used only to cross-check :func:`lis_length`."""
    best = [1] * len(perm)
    for i in range(len(perm)):
        for j in range(i):
            if perm[j] < perm[i]:
                best[i] = max(best[i], best[j] + 1)
    return max(best, default=0)
