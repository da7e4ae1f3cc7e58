"""Exact verification suites behind ``hypertamper verify`` and ``hypertamper identities``.

Each check returns a :class:`~hypertamper.report.Check`; a failing check
carries a witness (the first offending instance).
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from typing import Iterable

import numpy as np

from . import combinatorics as cx
from .counting import count_all_batch, count_from_zero_batch, count_oracle, overlap_counts
from .detection import exact_second_moment_check, size_bias_check, tv_exact
from .hypercube import EdgeConfig, Variant, num_edges, num_paths, path_edge_matrix, reference_edges
from .report import Check
from .streams import stream

VARIANTS = (Variant.ALL, Variant.FROM_ZERO)
P_GRID = (Fraction(1, 3), Fraction(1, 2), Fraction(2, 3))


def _first_failure(name: str, cases: Iterable[tuple[object, bool]]) -> Check:
    for case, ok in cases:
        if not ok:
            return Check(name, False, case)
    return Check(name, True)


def size_bias(n_values=(2, 3), p_values=P_GRID) -> Check:
    return _first_failure(
        "size_bias_identity",
        (((n, str(p), v.value), size_bias_check(n, p, v).ok) for n in n_values for p in p_values for v in VARIANTS),
    )


def tv_two_formulas(n_values=(1, 2, 3), p_values=P_GRID + (Fraction(1),)) -> Check:
    def cases():
        for n in n_values:
            for p in p_values:
                for v in VARIANTS:
                    rep = tv_exact(n, p, v)
                    yield (n, str(p), v.value), rep.extra["agree"] and 0 <= rep.exact <= 1
    return _first_failure("tv_exact_equals_half_l1", cases())


def second_moment(n_values=(1, 2, 3), p_values=P_GRID) -> Check:
    def cases():
        for n in n_values:
            for p in p_values:
                for v in VARIANTS:
                    lhs, rhs = exact_second_moment_check(n, p, v)
                    yield (n, str(p), v.value, str(lhs), str(rhs)), lhs == rhs
    return _first_failure("second_moment_overlap_identity", cases())


def dp_vs_oracle(n_max: int = 6, configs: int = 200, seed: int = 0, exhaustive_upto: int = 3) -> Check:
    """DP counters against path-by-path enumeration, exhaustive for small n."""

    def cases():
        for n in range(1, n_max + 1):
            size = num_edges(n)
            if n <= exhaustive_upto:
                ints = np.arange(1 << size, dtype=np.int64)
                bits = ((ints[:, None] >> np.arange(size)) & 1).astype(bool)
            else:
                bits = np.stack([stream(seed, n, r).random(size) < 0.75 for r in range(configs)])
            for v, fn in ((Variant.ALL, count_all_batch), (Variant.FROM_ZERO, count_from_zero_batch)):
                got = fn(n, bits)
                want = _oracle_counts(n, bits, v)
                bad = np.flatnonzero(got != want)
                yield (n, v.value, EdgeConfig(n, bits[bad[0]]).to_hex() if len(bad) else None), not len(bad)

    return _first_failure("dp_equals_oracle", cases())


def _oracle_counts(n: int, bits: np.ndarray, variant: Variant) -> np.ndarray:
    if len(bits) <= 64:
        return np.array([count_oracle(EdgeConfig(n, b), variant) for b in bits])
    # same membership test as count_oracle, vectorized over configurations
    mat = path_edge_matrix(n, variant)
    out = np.zeros(len(bits), dtype=np.int64)
    for row in mat:
        out += bits[:, row].all(axis=1)
    return out


def t_size_brute(n_max: int = 7) -> Check:
    return _first_failure(
        "t_size_equals_subpermutation_count",
        (
            ((n, ls), cx.t_size(n, ls) == cx.t_size_brute(n, ls))
            for n in range(1, n_max + 1)
            for m in range(0, n + 1)
            for ls in itertools.combinations(range(1, n + 1), m)
            if n <= 5 or m <= 2 or ls == tuple(range(1, m + 1))
        ),
    )


def t_sum(n_max: int = 12) -> Check:
    return _first_failure(
        "t_sum_identity",
        (((n, m), cx.t_sum_identity(n, m).ok) for n in range(1, n_max + 1) for m in range(1, n + 1)),
    )


def containment_brute(n: int, ls, variant: Variant) -> Fraction:
    """P(uniform path contains e_l for l in ls), counted over all canonical paths."""
    mat = path_edge_matrix(n, variant)
    ref = reference_edges(n)
    need = [ref[l - 1] for l in ls]
    hits = int((np.isin(mat, need).sum(axis=1) == len(need)).sum())
    return Fraction(hits, num_paths(n, variant))


def free_start_containment(n_max: int = 5, spot: tuple[int, ...] = (6,)) -> Check:
    """Closed-form free-start containment probability against brute force, m >= 2."""

    def cases():
        for n in list(range(2, n_max + 1)) + list(spot):
            for m in range(2, n + 1):
                for ls in itertools.combinations(range(1, n + 1), m):
                    yield (n, ls), cx.prob_A_exact(n, ls) == containment_brute(n, ls, Variant.ALL)

    return _first_failure("containment_formula_equals_brute_force", cases())


def relaxed_sum_is_upper_bound(n_max: int = 6) -> Check:
    return _first_failure(
        "relaxed_containment_sum_is_upper_bound",
        (
            ((n, ls), cx.prob_A_relaxed(n, ls) >= cx.prob_A_exact(n, ls))
            for n in range(2, n_max + 1)
            for m in range(2, n + 1)
            for ls in itertools.combinations(range(1, n + 1), m)
        ),
    )


def from_zero_containment(n_max: int = 6) -> Check:
    return _first_failure(
        "from_zero_containment_equals_brute_force",
        (
            ((n, ls), cx.prob_contains_from_zero(n, ls) == containment_brute(n, ls, Variant.FROM_ZERO))
            for n in range(1, n_max + 1)
            for m in range(1, n + 1)
            for ls in itertools.combinations(range(1, n + 1), m)
        ),
    )


def union_bound(n_max: int = 6) -> Check:
    """P(W >= m) from exact overlap counts never exceeds the sum of containment probabilities."""

    def cases():
        for n in range(1, n_max + 1):
            for v in VARIANTS:
                counts = overlap_counts(n, v)
                total = num_paths(n, v)
                for m in range(1, n + 1):
                    tail = Fraction(int(counts[m:].sum()), total)
                    yield (n, v.value, m), tail <= cx.union_bound(n, m, v)

    return _first_failure("union_bound_on_overlap_tail", cases())


def c_machinery(n_max: int = 8, k_max: int = 12) -> list[Check]:
    checks = [
        Check("C_3^(0) = 8/3", cx.c_value(3, 0) == Fraction(8, 3)),
        Check("sup_{n<=200} C_n^(0) = 8/3", cx.sup_c0(200).value == Fraction(8, 3), cx.sup_c0(200)),
    ]
    checks.append(_first_failure(
        "nilpotent_expansion_equals_table",
        (((n, k), cx.c_via_nilpotent(n, k) == cx.c_value(n, k)) for n in range(n_max + 1) for k in range(k_max + 1)),
    ))
    checks.append(_first_failure(
        "(B-I)^(n+1) v^0 = 0",
        ((n, all(x == 0 for x in cx.nilpotent_iterates(n)[n + 1])) for n in range(n_max + 1)),
    ))
    return checks


def d_constants(n0_max: int = 12) -> list[Check]:
    ds = [cx.d_tail_constant(n0).value for n0 in range(n0_max + 1)]
    return [
        Check("d_0 = 5/3", ds[0] == Fraction(5, 3), ds[0]),
        Check("d_1 = 17/12", ds[1] == Fraction(17, 12), ds[1]),
        Check("d_n0 nonincreasing", all(a >= b for a, b in zip(ds, ds[1:])), [str(d) for d in ds]),
    ]


def rho_convexity(n_max: int = 30) -> Check:
    return _first_failure(
        "rho_max_at_right_endpoint",
        (((n, m), cx.rho_extremum_check(n, m)) for n in range(2, n_max + 1) for m in range(2, n + 1)),
    )


def bc_sum(n_max: int = 8) -> Check:
    return _first_failure(
        "bc_sum_bound",
        (((n, a, b), cx.bc_sum_bound_check(n, a, b).ok) for n in range(1, n_max + 1) for a in range(1, n + 1) for b in range(a, n + 1)),
    )


def quick_suite() -> list[Check]:
    return [
        size_bias(),
        t_sum(10),
        free_start_containment(5, spot=()),
        second_moment(),
        dp_vs_oracle(6),
    ]


def identities_suite() -> list[Check]:
    return [
        t_size_brute(),
        t_sum(12),
        free_start_containment(5),
        relaxed_sum_is_upper_bound(),
        from_zero_containment(),
        union_bound(),
        *c_machinery(),
        *d_constants(),
        rho_convexity(),
        bc_sum(),
    ]


def full_suite() -> list[Check]:
    return [
        size_bias(),
        tv_two_formulas(),
        second_moment(),
        dp_vs_oracle(7, configs=100),
        *identities_suite(),
    ]
