"""Exact arithmetic for the counting formulas behind the second-moment bounds.

Everything here works in integers and :class:`fractions.Fraction`; no float
enters a function documented as exact. Index tuples ``ls = (l_1, ..., l_m)``
are 1-based and strictly increasing in ``[1, n]``, matching the edges
e_1, ..., e_n of the reference path (0, id).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

from .caps import check_cap
from .hypercube import Variant

#: largest n for which factorials are memoized
FACTORIAL_CACHE = 512


@lru_cache(maxsize=FACTORIAL_CACHE + 1)
def factorial(k: int) -> int:
    return math.factorial(k)


@lru_cache(maxsize=None)
def inv_binom(n: int, i: int) -> Fraction:
    return Fraction(1, math.comb(n, i))


def check_index(n: int, ls: Sequence[int]) -> tuple[int, ...]:
    ls = tuple(int(l) for l in ls)
    if any(b <= a for a, b in zip(ls, ls[1:])):
        raise ValueError(f"indices {ls} are not strictly increasing")
    if ls and (ls[0] < 1 or ls[-1] > n):
        raise ValueError(f"indices {ls} fall outside [1, {n}]")
    return ls


def t_size(n: int, ls: Sequence[int]) -> int:
    """|T^n_{m; l}|: permutations of [n] for which every [l_i - 1] and [l_i] is invariant.

    Equals (l_1 - 1)! (l_2 - 1 - l_1)! ... (l_m - 1 - l_{m-1})! (n - l_m)!.
    An empty index tuple gives n!.
    """
    ls = check_index(n, ls)
    out = 1
    prev = 0
    for l in ls:
        out *= factorial(l - 1 - prev)
        prev = l
    return out * factorial(n - prev)


def is_sub_permutation(sigma: Sequence[int], j: int) -> bool:
    """Whether sigma (1-based values) maps [j] onto itself."""
    return set(sigma[:j]) == set(range(1, j + 1))


def edge_membership_oracle(sigma: Sequence[int], j: int) -> bool:
    """e_j lies on the path (0, sigma) iff [j-1] and [j] are both sub-permutations."""
    if not 1 <= j <= len(sigma):
        raise ValueError(f"j={j} out of range for n={len(sigma)}")
    return is_sub_permutation(sigma, j - 1) and is_sub_permutation(sigma, j)


def t_size_brute(n: int, ls: Sequence[int]) -> int:
    ls = check_index(n, ls)
    return sum(
        1
        for sigma in itertools.permutations(range(1, n + 1))
        if all(edge_membership_oracle(sigma, l) for l in ls)
    )


def prob_contains_from_zero(n: int, ls: Sequence[int]) -> Fraction:
    """P(a uniform path from 0 contains e_l for all l in ls) = |T|/n!."""
    return Fraction(t_size(n, ls), factorial(n))


# ---------------------------------------------------------------- free-start containment


@lru_cache(maxsize=None)
def _outer_sum(n: int, l1: int, lm: int) -> int:
    """sum_{b,c} C(n-l_m, c) C(l_1-1, b) (b+c)! (n-b-c-1-(l_m-l_1))!."""
    span = lm - l1
    return sum(
        math.comb(n - lm, c) * math.comb(l1 - 1, b) * factorial(b + c) * factorial(n - b - c - 1 - span)
        for c in range(n - lm + 1)
        for b in range(l1)
    )


def _inner_gaps(ls: Sequence[int]) -> int:
    """prod (l_{i+1} - l_i - 1)!: orders of the inner segment that cross every e_{l_i}."""
    out = 1
    for a, b in zip(ls, ls[1:]):
        out *= factorial(b - a - 1)
    return out


def prob_A_exact(n: int, ls: Sequence[int]) -> Fraction:
    """P(a uniform free-start path contains e_{l_1}, ..., e_{l_m}), m >= 2.

    Sums over the start vertex (conditions x_j = 0 or x_j = 1 on
    l_1 <= j <= l_m, with b resp. c free coordinates below l_1 / above l_m
    flipped first), then counts the inner segment. The inner count for either
    orientation is |T^{L}_{m-1; l_2-l_1, ..., l_{m-1}-l_1, L}| with
    L = l_m - l_1, which requires the last required edge to close the segment.
    """
    ls = check_index(n, ls)
    if len(ls) < 2:
        raise ValueError("prob_A_exact needs m >= 2; use prob_edge_all for a single edge")
    inner = _inner_gaps(ls)
    return Fraction(_outer_sum(n, ls[0], ls[-1]) * 2 * inner, 2 ** n * factorial(n))


def prob_A_relaxed(n: int, ls: Sequence[int]) -> Fraction:
    """The double sum with relaxed inner terms |T^{L}_{m-2; ...}|.

    This overcounts whenever the last (resp. first) required edge is not
    adjacent to its neighbour, so it is an upper bound for
    :func:`prob_A_exact`, with equality iff l_2 = l_1 + 1 and
    l_m = l_{m-1} + 1.
    """
    ls = check_index(n, ls)
    if len(ls) < 2:
        raise ValueError("needs m >= 2")
    l1, lm = ls[0], ls[-1]
    span = lm - l1
    k0 = t_size(span, [l - l1 for l in ls[1:-1]])
    k1 = t_size(span, [lm - l for l in reversed(ls[1:-1])])
    return Fraction(_outer_sum(n, l1, lm) * (k0 + k1), 2 ** n * factorial(n))


def prob_edge_all(n: int) -> Fraction:
    """P(a uniform free-start path contains a given edge) = n / (n 2^(n-1)).

    Every automorphism of the cube maps uniform paths to uniform paths and the
    cube is edge-transitive, so all n 2^(n-1) edges are equally likely and a
    path holds n of them.
    """
    return Fraction(1, 2 ** (n - 1))


def prob_contains(n: int, ls: Sequence[int], variant: Variant) -> Fraction:
    ls = check_index(n, ls)
    if Variant.parse(variant) is Variant.FROM_ZERO:
        return prob_contains_from_zero(n, ls)
    if not ls:
        return Fraction(1)
    if len(ls) == 1:
        return prob_edge_all(n)
    return prob_A_exact(n, ls)


def union_bound(n: int, m: int, variant: Variant) -> Fraction:
    """sum over |ls| = m of P(path contains e_l, l in ls); equals E[C(W, m)] and bounds P(W >= m)."""
    return sum((prob_contains(n, ls, variant) for ls in itertools.combinations(range(1, n + 1), m)), Fraction(0))


def binomial_moments(n: int, variant: Variant) -> list[Fraction]:
    """E[C(W, m)] for m = 0..n."""
    check_cap("binomial_moments", n)
    return [union_bound(n, m, variant) for m in range(n + 1)]


# ---------------------------------------------------------------- (b, c) sum


@dataclass(frozen=True)
class BoundCheck:
    lhs: Fraction
    rhs: Fraction
    ok: bool
    detail: dict = field(default_factory=dict)


def bc_sum_bound_check(n: int, l1: int, lm: int) -> BoundCheck:
    """The (b, c) double sum, its binomial-ratio rewriting, and the n^2 (n-1-(l_m-l_1))! bound."""
    if not 1 <= l1 <= lm <= n:
        raise ValueError(f"need 1 <= l1 <= lm <= n, got {(l1, lm, n)}")
    lhs = _outer_sum(n, l1, lm)
    top = factorial(n - 1 - (lm - l1))
    ratios = [
        Fraction(math.comb(n - lm, c) * math.comb(l1 - 1, b), math.comb(n - 1 - lm + l1, b + c))
        for c in range(n - lm + 1)
        for b in range(l1)
    ]
    rewritten = sum(ratios, Fraction(0)) * top
    rhs = n * n * top
    fractions_ok = all(r <= 1 for r in ratios)
    ok = rewritten == lhs and lhs <= rhs and fractions_ok
    return BoundCheck(Fraction(lhs), Fraction(rhs), ok, {"rewritten_equal": rewritten == lhs, "fractions_le_1": fractions_ok})


# ---------------------------------------------------------------- C-table


class CTable:
    """C[k][j] = sum_{i<=j} C[k-1][i] / C(j, i), with C[-1][i] = 1."""

    def __init__(self, max_j: int, max_k: int):
        check_cap("c_table_j", max_j, "max_j")
        check_cap("c_table_k", max_k, "max_k")
        self.max_j = max_j
        self.max_k = max_k
        prev = [Fraction(1)] * (max_j + 1)
        rows = []
        for _ in range(max_k + 1):
            row = [sum((prev[i] * inv_binom(j, i) for i in range(j + 1)), Fraction(0)) for j in range(max_j + 1)]
            rows.append(row)
            prev = row
        self.rows = rows

    def __getitem__(self, kj: tuple[int, int]) -> Fraction:
        k, j = kj
        return self.rows[k][j]

    def row(self, k: int) -> list[Fraction]:
        return list(self.rows[k])


def c_table(max_j: int, max_k: int) -> CTable:
    return CTable(max_j, max_k)


@lru_cache(maxsize=None)
def c_value(j: int, k: int) -> Fraction:
    """C_j^{(k)}, memoized."""
    if k < 0:
        return Fraction(1)
    return sum((c_value(i, k - 1) * inv_binom(j, i) for i in range(j + 1)), Fraction(0))


def t_sum_identity(n: int, m: int) -> BoundCheck:
    """sum over l_1 < ... < l_m <= n of |T^n_{m;l}| against (n-m)! C_{n-m}^{(m-1)}."""
    check_cap("t_sum_identity", n)
    if not 1 <= m <= n:
        raise ValueError(f"need 1 <= m <= n, got m={m}, n={n}")
    lhs = sum(t_size(n, ls) for ls in itertools.combinations(range(1, n + 1), m))
    rhs = factorial(n - m) * c_value(n - m, m - 1)
    # the printed range l_m < n drops the l_m = n terms
    strict = sum(t_size(n, ls) for ls in itertools.combinations(range(1, n), m))
    return BoundCheck(Fraction(lhs), rhs, lhs == rhs, {"lhs_strict_range": strict})


# ---------------------------------------------------------------- nilpotent expansion


def nilpotent_iterates(n: int) -> list[list[Fraction]]:
    """v^0, v^1, ..., v^(n+1) with v^(l+1) = (B - I) v^l.

    B is indexed 0..n with b_ij = 1/C(i, j) for i >= j, and v^0_j = C_j^{(0)};
    index 0 must be included because the recursion for C_j^{(k)} has an i = 0
    term. B - I is strictly lower triangular of size n + 1, so v^(n+1) = 0.
    """
    check_cap("c_via_nilpotent", n)
    v = [sum((inv_binom(j, i) for i in range(j + 1)), Fraction(0)) for j in range(n + 1)]
    out = [v]
    for _ in range(n + 1):
        v = [sum((inv_binom(i, j) * v[j] for j in range(i)), Fraction(0)) for i in range(n + 1)]
        out.append(v)
    return out


def c_via_nilpotent(n: int, k: int) -> Fraction:
    """C_n^{(k)} = sum_{l=0}^{min(k, n)} C(k, l) v^l_n."""
    vs = nilpotent_iterates(n)
    return sum((math.comb(k, l) * vs[l][n] for l in range(min(k, n) + 1)), Fraction(0))


def c_via_matrix_without_zero_index(n: int, k: int) -> Fraction:
    """(B^k v^0)_n with B and v^0 restricted to indices 1..n.

    This drops the constant i = 0 contribution of the recursion, so it differs
    from C_n^{(k)} for k >= 1 (n = 1, k = 1 gives 2 instead of 3). Kept to
    show why the expansion needs index 0.
    """
    check_cap("c_via_nilpotent", n)
    v = [sum((inv_binom(j, i) for i in range(j + 1)), Fraction(0)) for j in range(1, n + 1)]
    for _ in range(k):
        v = [sum((inv_binom(i, j) * v[j - 1] for j in range(1, i + 1)), Fraction(0)) for i in range(1, n + 1)]
    return v[-1]


# ---------------------------------------------------------------- sup constants


def tail_reciprocal_sum(n: int, n0: int) -> Fraction:
    return sum((inv_binom(n, i) for i in range(n0 + 1, n + 1)), Fraction(0))


@dataclass(frozen=True)
class SupResult:
    value: Fraction
    argmax: tuple[int, ...]


def d_tail_constant(n0: int, n_max: int = 200) -> SupResult:
    """d_{n0} = sup_{n0 < n <= n_max} sum_{i=n0+1}^{n} 1/C(n, i), with every maximizing n."""
    if n_max < n0 + 1:
        raise ValueError(f"n_max must be >= n0 + 1, got {n_max} < {n0 + 1}")
    values = {n: tail_reciprocal_sum(n, n0) for n in range(n0 + 1, n_max + 1)}
    best = max(values.values())
    return SupResult(best, tuple(n for n, v in values.items() if v == best))


def sup_c0(n_max: int = 200) -> SupResult:
    """max_{n <= n_max} C_n^{(0)}; the maximum 8/3 sits at n = 3, 4."""
    if n_max < 4:
        raise ValueError("n_max must be >= 4")
    values = {n: tail_reciprocal_sum(n, -1) for n in range(n_max + 1)}
    best = max(values.values())
    return SupResult(best, tuple(n for n, v in values.items() if v == best))


def rho(n: int, m: int, k: int) -> Fraction:
    """(k - m + 1)! / (n (n-1) ... (n-k+1))."""
    return Fraction(factorial(k - m + 1) * factorial(n - k), factorial(n))


def rho_extremum_check(n: int, m: int) -> bool:
    """h(k) = rho(k+1)/rho(k) is nondecreasing on [m, n-1] and max rho = rho(n)."""
    if not 2 <= m <= n:
        raise ValueError(f"need 2 <= m <= n, got m={m}, n={n}")
    vals = [rho(n, m, k) for k in range(m, n + 1)]
    h = [b / a for a, b in zip(vals, vals[1:])]
    monotone = all(a <= b for a, b in zip(h, h[1:]))
    return monotone and max(vals) == vals[-1] == max(vals[0], vals[-1])


# ---------------------------------------------------------------- growth and tail evidence


@dataclass(frozen=True)
class GrowthRow:
    k: int
    sup_c: Fraction
    argmax_n: int
    ratio_to_geometric: float
    log_exponent: float | None


def growth_bound_evidence(delta: Fraction, k_max: int = 40, n_max: int = 40) -> list[GrowthRow]:
    """S(k) = max_{n <= n_max} C_n^{(k)} against (1 + delta)^k.

    ``ratio_to_geometric`` is S(k)/(1+delta)^k and ``log_exponent`` is
    log(S(k)/(1+delta)^k)/log k (k >= 2), the exponent r for which
    S(k) = k^r (1+delta)^k.
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    rows = []
    base = 1 + Fraction(delta)
    for k in range(k_max + 1):
        row = [c_value(j, k) for j in range(n_max + 1)]
        best = max(row)
        ratio = best / base ** k
        log_exp = math.log(ratio) / math.log(k) if k >= 2 else None
        rows.append(GrowthRow(k, best, row.index(best), float(ratio), log_exp))
    return rows


def polynomial_growth_ratios(n: int, k_max: int) -> list[Fraction]:
    """C_n^{(k)} / k^n for k = 1..k_max (bounded in k for fixed n)."""
    return [c_via_nilpotent(n, k) / Fraction(k) ** n for k in range(1, k_max + 1)]


def fit_t_sum_growth_constant(delta: Fraction, r: float, n_max: int) -> float:
    """Smallest c with sum_l |T^n_{m;l}| <= c m^r (1+delta)^m (n-m)! for 1 <= m <= n <= n_max.

    By the T-sum identity the left side over (n-m)! is C_{n-m}^{(m-1)}.
    """
    base = 1 + float(delta)
    return max(
        float(c_value(n - m, m - 1)) / (m ** r * base ** m)
        for n in range(1, n_max + 1)
        for m in range(1, n + 1)
    )


def stirling_constant(n_max: int, shift: int = 1) -> float:
    """Smallest K with (n-m+shift)!/n! <= K (e/n)^(m-shift) for shift <= m <= n <= n_max."""
    best = 0.0
    for n in range(1, n_max + 1):
        for m in range(shift, n + 1):
            lhs = math.lgamma(n - m + shift + 1) - math.lgamma(n + 1)
            rhs = (m - shift) * (1 - math.log(n))
            best = max(best, math.exp(lhs - rhs))
    return best


@dataclass(frozen=True)
class TailBound:
    n: int
    m: int
    variant: Variant
    exact_tail: Fraction | None
    bound: float
    ok: bool | None


def tail_bound_eval(
    n: int,
    m: int,
    delta: float,
    c: float,
    r: float,
    K: float,
    variant: Variant = Variant.FROM_ZERO,
    exact_tail: Fraction | None = None,
) -> TailBound:
    """Right-hand sides of the P(W >= m) tail bounds.

    Free-start: 2 K c m^r n^5 / (2^n e) * ((1+delta) e / n)^m.
    From zero:  c m^r (1+delta)^m (n-m)!/n!.
    If ``exact_tail`` is given the verdict compares it with the bound.
    """
    variant = Variant.parse(variant)
    if variant is Variant.ALL:
        bound = 2 * K * c * m ** r * n ** 5 / (2 ** n * math.e) * ((1 + delta) * math.e / n) ** m
    else:
        bound = c * m ** r * (1 + delta) ** m * math.exp(math.lgamma(n - m + 1) - math.lgamma(n + 1))
    ok = None if exact_tail is None else float(exact_tail) <= bound
    return TailBound(n, m, variant, exact_tail, bound, ok)
