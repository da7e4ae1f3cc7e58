"""Exact diameter-path counting and the overlap variable W_n.

The from-zero count uses the subset recursion

    f(empty) = 1,   f(S) = sum_{i in S, edge (S - i, i) present} f(S - i),

with the flip set ``S`` identified with the vertex reached from 0. Values are
bounded by n! <= 20! < 2**63, so int64 tables are exact within the cap.

The free-start count walks all starts with bit n-1 clear at once (each
undirected path has exactly one such endpoint), merging partial paths that
reach the same (start, vertex) state. Per-state counts stay below 13!.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
import numpy as np

from .caps import check_cap
from .hypercube import (
    DiameterPath,
    EdgeConfig,
    ModelParams,
    Number,
    Variant,
    iter_paths,
    num_paths,
    path_edge_matrix,
    path_edges,
    random_path,
    reference_edges,
    vertex_edge_table,
)
from .streams import stream

#: element budget for one batched DP table
_BATCH_ELEMENTS = 1 << 22


@lru_cache(maxsize=64)
def _layers(n: int, start: int = 0) -> list[tuple[np.ndarray, np.ndarray, np.ndarray]]:
    """Per popcount layer k: targets (C(n,k),), their k sources, and the k connecting edge indices."""
    table = vertex_edge_table(n)
    v = np.arange(1 << n, dtype=np.int64)
    bit = (v[:, None] >> np.arange(n)) & 1
    pop = bit.sum(axis=1)
    layers = []
    for k in range(1, n + 1):
        tgt = v[pop == k]
        dirs = np.nonzero(bit[tgt])[1].reshape(len(tgt), k)
        src = tgt[:, None] ^ (1 << dirs)
        layers.append((tgt, src, table[dirs, src ^ start]))
    return layers


def _adjacency(n: int, bits: np.ndarray) -> np.ndarray:
    """``adj[b, i, v]``: edge at ``v`` in direction ``i`` present in config ``b``."""
    return bits[:, vertex_edge_table(n)]


def count_from_zero_batch(n: int, bits: np.ndarray, start: int = 0) -> np.ndarray:
    """From-``start`` counts for a stack of bit vectors, shape ``(B, n 2^(n-1))``."""
    check_cap("count_from_zero", n)
    bits = np.atleast_2d(np.asarray(bits, dtype=bool))
    out = np.empty(len(bits), dtype=np.int64)
    size = 1 << n
    step = max(1, _BATCH_ELEMENTS // (size * n))
    layers = _layers(n, start)
    for lo in range(0, len(bits), step):
        chunk = bits[lo:lo + step]
        f = np.zeros((len(chunk), size), dtype=np.int64)
        f[:, 0] = 1
        for tgt, src, eid in layers:
            f[:, tgt] = np.einsum("bij,bij->bi", f[:, src], chunk[:, eid].astype(np.int64))
        out[lo:lo + step] = f[:, size - 1]
    return out


def count_from_zero(config: EdgeConfig) -> int:
    """N^{diam,0}: diameter paths from vertex 0 present in ``config``."""
    return int(count_from_zero_batch(config.n, config.bits[None, :])[0])


def count_from(config: EdgeConfig, start: int) -> int:
    """Monotone paths from ``start`` to its antipode: the from-zero DP on the translated config."""
    return int(count_from_zero_batch(config.n, config.bits[None, :], start)[0])


def count_all_batch(n: int, bits: np.ndarray) -> np.ndarray:
    """Free-start counts for a stack of bit vectors."""
    check_cap("count_all", n)
    bits = np.atleast_2d(np.asarray(bits, dtype=bool))
    out = np.zeros(len(bits), dtype=np.int64)
    if n == 1:
        out[:] = bits[:, 0]
        return out
    half = 1 << (n - 1)
    step = max(1, _BATCH_ELEMENTS // (half * n * 4))
    for lo in range(0, len(bits), step):
        adj = _adjacency(n, bits[lo:lo + step])
        batch = adj.shape[0]
        flat = adj.reshape(-1)
        cfg = np.repeat(np.arange(batch, dtype=np.int64), half)
        x = np.tile(np.arange(half, dtype=np.int64), batch)
        v = x.copy()
        cnt = np.ones_like(x)
        for _ in range(n):
            parts = []
            flipped = v ^ x
            at = cfg * (n << n) + v
            for i in range(n):
                ok = flat[at + (i << n)]
                ok &= (flipped >> i) & 1 == 0
                if ok.any():
                    parts.append((cfg[ok], x[ok], v[ok] ^ (1 << i), cnt[ok]))
            if not parts:
                cfg = np.empty(0, dtype=np.int64)
                break
            cfg, x, v, cnt = (np.concatenate(col) for col in zip(*parts))
            key = (cfg << (2 * n)) | (x << n) | v
            order = np.argsort(key)
            key = key[order]
            heads = np.flatnonzero(np.r_[True, key[1:] != key[:-1]])
            cnt = np.add.reduceat(cnt[order], heads)
            key = key[heads]
            cfg, x, v = key >> (2 * n), (key >> n) & ((1 << n) - 1), key & ((1 << n) - 1)
        if len(cfg):
            np.add.at(out, lo + cfg, cnt)
    return out


def count_all(config: EdgeConfig) -> int:
    """N^{diam}: undirected diameter paths present in ``config``."""
    return int(count_all_batch(config.n, config.bits[None, :])[0])


def count(config: EdgeConfig, variant: Variant) -> int:
    if Variant.parse(variant) is Variant.ALL:
        return count_all(config)
    return count_from_zero(config)


def count_batch(n: int, bits: np.ndarray, variant: Variant) -> np.ndarray:
    if Variant.parse(variant) is Variant.ALL:
        return count_all_batch(n, bits)
    return count_from_zero_batch(n, bits)


def count_oracle(config: EdgeConfig, variant: Variant) -> int:
    """Path-by-path membership count over every canonical path; independent of the DPs."""
    check_cap("count_oracle", config.n)
    return sum(1 for path in iter_paths(config.n, variant) if all(config.bits[e] for e in path_edges(path)))


def expected_count(params: ModelParams) -> Number:
    """E N_n = m_n p^n; exact when p is rational."""
    p = params.p
    if isinstance(p, float):
        return params.m_n * p ** params.n
    return params.m_n * Fraction(p) ** params.n


# ---------------------------------------------------------------- overlaps


def overlap(path: DiameterPath, reference: DiameterPath) -> int:
    """Number of edges the two paths have in common."""
    if path.n != reference.n:
        raise ValueError(f"dimension mismatch: {path.n} vs {reference.n}")
    return len(set(path_edges(path)) & set(path_edges(reference)))


@dataclass(frozen=True)
class OverlapDist:
    """Law of W under a uniform random path, against the reference (0, id).

    ``probs[w]`` is P(W = w). In exact mode the entries are fractions and
    ``ses`` is None; in Monte Carlo mode they are frequencies with plug-in
    standard errors.
    """

    n: int
    variant: Variant
    probs: tuple
    ses: tuple | None = None
    samples: int | None = None
    seed: int | None = None

    @property
    def exact(self) -> bool:
        return self.ses is None

    def mean(self):
        return sum(w * q for w, q in enumerate(self.probs))

    def tail(self, m: int):
        return sum(self.probs[m:], Fraction(0) if self.exact else 0.0)


def overlap_counts(n: int, variant: Variant) -> np.ndarray:
    """``counts[w]``: canonical paths sharing exactly ``w`` edges with (0, id)."""
    check_cap("overlap_exact", n)
    mat = path_edge_matrix(n, variant)
    w = np.isin(mat, reference_edges(n)).sum(axis=1)
    return np.bincount(w, minlength=n + 1)


def sample_overlaps(n: int, variant: Variant, samples: int, seed: int) -> np.ndarray:
    ref = set(reference_edges(n))
    out = np.empty(samples, dtype=np.int64)
    for r in range(samples):
        path = random_path(n, variant, stream(seed, r))
        out[r] = sum(1 for e in path_edges(path) if e in ref)
    return out


def overlap_distribution(n: int, variant: Variant, mode: str = "exact", samples: int = 10_000, seed: int = 0) -> OverlapDist:
    variant = Variant.parse(variant)
    if mode == "exact":
        counts = overlap_counts(n, variant)
        total = num_paths(n, variant)
        return OverlapDist(n, variant, tuple(Fraction(int(c), total) for c in counts))
    if mode != "mc":
        raise ValueError(f"unknown mode {mode!r}")
    w = sample_overlaps(n, variant, samples, seed)
    freq = np.bincount(w, minlength=n + 1) / samples
    ses = np.sqrt(freq * (1 - freq) / samples)
    return OverlapDist(n, variant, tuple(float(q) for q in freq), tuple(float(s) for s in ses), samples, seed)


@dataclass(frozen=True)
class MomentEstimate:
    value: object
    se: float | None = None
    method: str = "exact"


def biased_second_moment(n: int, p: Number, variant: Variant, mode: str = "exact", samples: int = 10_000, seed: int = 0) -> MomentEstimate:
    """E[p^{-W}], so that E N^2 = (E N)^2 E[p^{-W}].

    Modes: ``exact`` enumerates paths (n <= 7), ``moments`` uses the
    binomial-moment expansion ``sum_m (1/p - 1)^m E[C(W, m)]`` built from the
    closed-form containment probabilities, ``mc`` samples random paths.
    """
    if p == 0:
        raise ValueError("p = 0: p^{-W} is undefined")
    variant = Variant.parse(variant)
    if mode == "exact":
        dist = overlap_distribution(n, variant, "exact")
        q = Fraction(p)
        return MomentEstimate(sum(prob / q ** w for w, prob in enumerate(dist.probs)))
    if mode == "moments":
        from .combinatorics import binomial_moments

        q = Fraction(p)
        value = sum((1 / q - 1) ** m * mom for m, mom in enumerate(binomial_moments(n, variant)))
        return MomentEstimate(value, method="moments")
    if mode == "mc":
        w = sample_overlaps(n, variant, samples, seed)
        vals = float(p) ** (-w.astype(float))
        return MomentEstimate(float(vals.mean()), float(vals.std(ddof=1) / np.sqrt(samples)), "mc")
    raise ValueError(f"unknown mode {mode!r}")

