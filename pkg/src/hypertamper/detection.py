"""Size biasing, total variation and second-moment diagnostics.

Exact routines enumerate every edge configuration, so they are limited to
n <= 3 (4096 configurations) and rational p. Monte Carlo routines draw
replicate ``r`` from ``stream(seed, measure, r)`` where ``measure`` is 0 for
the untampered law P and 1 for the tampered law Q; scans put a cell index in
front of the key.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np

from .caps import check_cap
from .counting import biased_second_moment, count_batch, expected_count
from .hypercube import (
    ModelParams,
    Number,
    Variant,
    num_edges,
    path_edge_matrix,
    path_edges,
    random_path,
    sample_bits,
)
from .streams import stream

UNTAMPERED, TAMPERED = 0, 1


def predicted_regime(variant: Variant, gamma: float) -> str:
    """Label the asymptotic regime for p = gamma/n with gamma held fixed."""
    variant = Variant.parse(variant)
    threshold = math.e / 2 if variant is Variant.ALL else math.e
    if gamma < threshold:
        return "detectable"
    if gamma == threshold:
        return "critical"
    return "strongly undetectable" if variant is Variant.ALL else "weakly undetectable"


# ---------------------------------------------------------------- enumeration


@dataclass(frozen=True)
class _Enumeration:
    n: int
    variant: Variant
    masks: tuple[int, ...]
    counts: np.ndarray
    popcounts: np.ndarray


@lru_cache(maxsize=8)
def _enumerate(n: int, variant: Variant) -> _Enumeration:
    check_cap("enumerate_configs", n)
    mat = path_edge_matrix(n, variant)
    masks = tuple(int(sum(1 << int(e) for e in row)) for row in mat)
    configs = np.arange(1 << num_edges(n), dtype=np.int64)
    counts = np.zeros(len(configs), dtype=np.int64)
    for mask in masks:
        counts += (configs & mask) == mask
    pop = np.zeros(len(configs), dtype=np.int64)
    for e in range(num_edges(n)):
        pop += (configs >> e) & 1
    return _Enumeration(n, variant, masks, counts, pop)


def _rational(p: Number) -> Fraction:
    if isinstance(p, float):
        raise TypeError("exact routines need a rational p (int or Fraction)")
    return Fraction(p)


def config_probabilities(n: int, p: Number) -> list[Fraction]:
    """P_{n,p}(omega) for every configuration omega, indexed by its bit pattern."""
    p = _rational(p)
    size = num_edges(n)
    by_edges = [p ** k * (1 - p) ** (size - k) for k in range(size + 1)]
    pop = _enumerate(n, Variant.FROM_ZERO).popcounts
    return [by_edges[k] for k in pop.tolist()]


def exact_count_law(n: int, p: Number, variant: Variant) -> dict[int, Fraction]:
    """Distribution of N under P_{n,p} by enumeration."""
    en = _enumerate(n, Variant.parse(variant))
    law: dict[int, Fraction] = {}
    for c, prob in zip(en.counts.tolist(), config_probabilities(n, p)):
        law[c] = law.get(c, Fraction(0)) + prob
    return dict(sorted(law.items()))


def exact_moments(n: int, p: Number, variant: Variant) -> tuple[Fraction, Fraction]:
    """(E N, E N^2) under P_{n,p} by enumeration."""
    law = exact_count_law(n, p, variant)
    return sum(c * q for c, q in law.items()), sum(c * c * q for c, q in law.items())


def tampered_pushforward(n: int, p: Number, variant: Variant) -> list[Fraction]:
    """Q(omega) from the tampering itself: law of omega' | path over P x uniform paths."""
    en = _enumerate(n, Variant.parse(variant))
    probs = config_probabilities(n, p)
    acc = [Fraction(0)] * len(probs)
    configs = np.arange(len(probs), dtype=np.int64)
    for mask in en.masks:
        for src, dst in enumerate((configs | mask).tolist()):
            if probs[src]:
                acc[dst] += probs[src]
    m = len(en.masks)
    return [q / m for q in acc]


def tampered_conditional(n: int, p: Number, variant: Variant) -> list[Fraction]:
    """Q(omega) = (1/m) sum_j P(omega | O_j), with each P(O_j) summed from the enumeration."""
    en = _enumerate(n, Variant.parse(variant))
    probs = config_probabilities(n, p)
    configs = np.arange(len(probs), dtype=np.int64)
    out = [Fraction(0)] * len(probs)
    for mask in en.masks:
        members = np.flatnonzero((configs & mask) == mask).tolist()
        p_path = sum((probs[w] for w in members), Fraction(0))
        for w in members:
            out[w] += probs[w] / p_path
    m = len(en.masks)
    return [q / m for q in out]


def size_biased(n: int, p: Number, variant: Variant) -> list[Fraction]:
    """N(omega)/E N * P(omega)."""
    en = _enumerate(n, Variant.parse(variant))
    probs = config_probabilities(n, p)
    mean = sum((c * q for c, q in zip(en.counts.tolist(), probs)), Fraction(0))
    return [c * q / mean for c, q in zip(en.counts.tolist(), probs)]


@dataclass(frozen=True)
class SizeBiasCheck:
    n: int
    p: Fraction
    variant: Variant
    ok: bool
    max_discrepancy: Fraction
    witness: int | None = None


def size_bias_check(n: int, p: Number, variant: Variant) -> SizeBiasCheck:
    """Compare the tampered measure built three ways: pushforward, conditional average, size-biased."""
    p = _rational(p)
    if p == 0:
        raise ValueError("p = 0: the conditioning events have probability zero")
    variant = Variant.parse(variant)
    push = tampered_pushforward(n, p, variant)
    cond = tampered_conditional(n, p, variant)
    sb = size_biased(n, p, variant)
    worst = Fraction(0)
    witness = None
    for w, (a, b, c) in enumerate(zip(push, cond, sb)):
        d = max(abs(a - b), abs(b - c), abs(a - c))
        if d > worst:
            worst, witness = d, w
    return SizeBiasCheck(n, p, variant, worst == 0, worst, witness)


# ---------------------------------------------------------------- total variation


@dataclass
class TvReport:
    """Total variation distance between P_{n,p} and the tampered measure."""

    estimate: float
    method: str
    n: int
    p: Number
    variant: Variant
    exact: Fraction | None = None
    se: float | None = None
    samples: int | None = None
    seed: int | None = None
    degenerate: bool = False
    extra: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not 0.0 <= self.estimate <= 1.0:
            raise ValueError(f"TV estimate {self.estimate} outside [0, 1]")


def tv_exact(n: int, p: Number, variant: Variant) -> TvReport:
    """sum_omega (1 - N/EN)^+ P(omega), cross-checked against (1/2) sum |P - Q|."""
    p = _rational(p)
    variant = Variant.parse(variant)
    if p == 0:
        return TvReport(1.0, "exact-enumeration", n, p, variant, exact=Fraction(1), degenerate=True)
    en = _enumerate(n, variant)
    probs = config_probabilities(n, p)
    mean = expected_count(ModelParams(n, p, variant))
    tv = sum((max(Fraction(0), 1 - c / mean) * q for c, q in zip(en.counts.tolist(), probs)), Fraction(0))
    q_push = tampered_pushforward(n, p, variant)
    half_l1 = sum((abs(a - b) for a, b in zip(probs, q_push)), Fraction(0)) / 2
    return TvReport(
        float(tv), "exact-enumeration", n, p, variant, exact=tv,
        extra={"half_l1": half_l1, "agree": half_l1 == tv, "EN": mean},
    )


def replicate_bits(params: ModelParams, samples: int, seed: int, measure: int, start: int = 0,
                    prefix: tuple[int, ...] = ()) -> np.ndarray:
    n = params.n
    out = np.empty((samples, num_edges(n)), dtype=bool)
    for k in range(samples):
        rng = stream(seed, *prefix, measure, start + k)
        bits = sample_bits(n, params.p_float, rng)
        if measure == TAMPERED:
            path = random_path(n, params.variant, rng)
            bits[path_edges(path)] = True
        out[k] = bits
    return out


def simulate_counts(params: ModelParams, samples: int, seed: int | None = None, tampered: bool = False,
                    chunk: int = 512, prefix: tuple[int, ...] = ()) -> np.ndarray:
    """Counts N for ``samples`` independent replicates, in replicate order.

    Replicate k draws from stream(seed, *prefix, measure, k), so a run can be
    split into cells (distinct prefixes) without any two sharing a stream.
    """
    seed = params.seed if seed is None else seed
    measure = TAMPERED if tampered else UNTAMPERED
    parts = []
    for lo in range(0, samples, chunk):
        bits = replicate_bits(params, min(chunk, samples - lo), seed, measure, lo, prefix)
        parts.append(count_batch(params.n, bits, params.variant))
    return np.concatenate(parts) if parts else np.empty(0, dtype=np.int64)


def _mean_se(values: np.ndarray) -> tuple[float, float]:
    if len(values) < 2:
        return float(values.mean()), float("nan")
    return float(values.mean()), float(values.std(ddof=1) / math.sqrt(len(values)))


def tv_mc(params: ModelParams, samples: int, seed: int | None = None, counts: np.ndarray | None = None) -> TvReport:
    """Monte Carlo estimate of E_P[(1 - N/EN)^+] with plug-in standard error."""
    seed = params.seed if seed is None else seed
    mean = float(expected_count(params))
    if mean == 0.0:
        return TvReport(1.0, "mc", params.n, params.p, params.variant, se=0.0, samples=samples, seed=seed, degenerate=True)
    if counts is None:
        counts = simulate_counts(params, samples, seed)
    vals = np.maximum(0.0, 1.0 - counts / mean)
    est, se = _mean_se(vals)
    return TvReport(min(1.0, est), "mc", params.n, params.p, params.variant, se=se, samples=samples, seed=seed,
                    extra={"EN": mean, "mean_N": float(counts.mean()), "p_zero": float(np.mean(counts == 0))})


# ---------------------------------------------------------------- second moment


@dataclass(frozen=True)
class VarianceRatio:
    value: float
    exact: Fraction | None = None
    se: float | None = None
    method: str = "exact"
    samples: int | None = None
    seed: int | None = None


def variance_ratio(params: ModelParams, mode: str = "auto", samples: int = 10_000, seed: int | None = None,
                   counts: np.ndarray | None = None) -> VarianceRatio:
    """Var(N)/(EN)^2.

    ``exact`` uses E[p^{-W}] - 1 by path enumeration (n <= 7), ``moments``
    the binomial-moment expansion (n <= 16), ``mc`` the sample variance of N
    over configurations drawn from P. ``auto`` picks the first exact route
    that is within caps when p is rational, else ``mc``.
    """
    if params.p == 0:
        raise ValueError("p = 0: the ratio is undefined")
    seed = params.seed if seed is None else seed
    rational = not isinstance(params.p, float)
    if mode == "auto":
        mode = "mc"
        if rational and params.n <= 7:
            mode = "exact"
        elif rational and params.n <= 16:
            mode = "moments"
    if mode in ("exact", "moments"):
        value = biased_second_moment(params.n, _rational(params.p), params.variant, mode).value - 1
        return VarianceRatio(float(value), value, method=mode)
    if mode != "mc":
        raise ValueError(f"unknown mode {mode!r}")
    if counts is None:
        counts = simulate_counts(params, samples, seed)
    mean = float(expected_count(params))
    x = counts.astype(float)
    var = x.var(ddof=1)
    centered = x - x.mean()
    m4 = float(np.mean(centered ** 4))
    se = math.sqrt(max(m4 - var ** 2, 0.0) / len(x)) / mean ** 2
    return VarianceRatio(float(var / mean ** 2), se=se, method="mc", samples=len(x), seed=seed)


@dataclass(frozen=True)
class Exceedance:
    eps: float
    prob: float
    se: float


def lln_diagnostic(params: ModelParams, samples: int, eps_grid: Sequence[float] = (0.1, 0.25, 0.5),
                   seed: int | None = None, counts: np.ndarray | None = None) -> list[Exceedance]:
    """Empirical P(|N/EN - 1| > eps) under P for each eps."""
    seed = params.seed if seed is None else seed
    if counts is None:
        counts = simulate_counts(params, samples, seed)
    mean = float(expected_count(params))
    if mean == 0.0:
        dev = np.full(len(counts), np.inf)
    else:
        dev = np.abs(counts / mean - 1.0)
    out = []
    for eps in eps_grid:
        q = float(np.mean(dev > eps))
        out.append(Exceedance(float(eps), q, math.sqrt(q * (1 - q) / len(counts))))
    return out


# ---------------------------------------------------------------- side channels


@dataclass(frozen=True)
class IsolatedProbe:
    freq_untampered: float
    se_untampered: float
    freq_tampered: float
    analytic: Number
    samples: int
    seed: int


def isolated_zero_probe(params: ModelParams, samples: int, seed: int | None = None) -> IsolatedProbe:
    """How often vertex 0 has no edges, under P and under Q, against (1-p)^n.

    Q is always the from-zero tampering here, whatever ``params.variant``
    says: that is the tampering which is certain to touch vertex 0.
    """
    seed = params.seed if seed is None else seed
    params = replace(params, variant=Variant.FROM_ZERO)
    n = params.n
    zero_edges = [i * (1 << (n - 1)) for i in range(n)]  # edge index of (0, i)
    hits = []
    for measure in (UNTAMPERED, TAMPERED):
        bits = replicate_bits(params, samples, seed, measure)
        hits.append(~bits[:, zero_edges].any(axis=1))
    fp = float(hits[0].mean())
    analytic = (1 - params.p) ** n
    return IsolatedProbe(fp, math.sqrt(fp * (1 - fp) / samples), float(hits[1].mean()), analytic, samples, seed)


@dataclass(frozen=True)
class DominanceCheck:
    ok: bool
    worst_gap: float
    thresholds: int


def dominance_check(params: ModelParams, samples: int, seed: int | None = None, z: float = 3.0) -> DominanceCheck:
    """Empirical P_Q(N >= t) >= P_P(N >= t) - z SE for every threshold t."""
    seed = params.seed if seed is None else seed
    base = simulate_counts(params, samples, seed)
    tam = simulate_counts(params, samples, seed, tampered=True)
    worst = -math.inf
    ok = True
    ts = np.union1d(base, tam)
    for t in ts:
        a = float(np.mean(base >= t))
        b = float(np.mean(tam >= t))
        se = math.sqrt((a * (1 - a) + b * (1 - b)) / samples)
        gap = (a - b) - z * se
        worst = max(worst, gap)
        ok &= gap <= 0
    return DominanceCheck(bool(ok), worst, len(ts))


def exact_second_moment_check(n: int, p: Number, variant: Variant) -> tuple[Fraction, Fraction]:
    """(E N^2 by enumeration, (EN)^2 E[p^{-W}] from path overlaps)."""
    p = _rational(p)
    mean, second = exact_moments(n, p, variant)
    via_overlap = expected_count(ModelParams(n, p, variant)) ** 2 * biased_second_moment(n, p, variant).value
    return second, via_overlap


def mc_mean_check(params: ModelParams, samples: int, seed: int | None = None) -> tuple[float, float, float]:
    """(sample mean of N, its SE, m_n p^n)."""
    counts = simulate_counts(params, samples, seed)
    mean, se = _mean_se(counts.astype(float))
    return mean, se, float(expected_count(params))

