import itertools
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hypertamper import combinatorics as cx
from hypertamper.caps import CapError
from hypertamper.counting import overlap_distribution
from hypertamper.hypercube import DiameterPath, Variant, path_edges, reference_edges
from hypertamper.verify import containment_brute


def test_t_size_examples():
    assert cx.t_size(3, (1,)) == 2
    assert cx.t_size(3, (1, 2, 3)) == 1
    assert cx.t_size(4, (1, 4)) == 2
    assert cx.t_size(5, ()) == 120


@pytest.mark.parametrize("n", range(1, 6))
def test_t_size_brute(n):
    for m in range(n + 1):
        for ls in itertools.combinations(range(1, n + 1), m):
            assert cx.t_size(n, ls) == cx.t_size_brute(n, ls)


def test_index_validation():
    with pytest.raises(ValueError):
        cx.t_size(3, (2, 1))
    with pytest.raises(ValueError):
        cx.t_size(3, (4,))


def test_membership_oracle():
    assert all(cx.edge_membership_oracle((1, 2, 3, 4), j) for j in range(1, 5))
    assert cx.edge_membership_oracle((2, 1, 3), 3)
    assert not cx.edge_membership_oracle((2, 1, 3), 1)


@pytest.mark.parametrize("n", range(1, 6))
def test_membership_matches_geometry(n):
    ref = reference_edges(n)
    for sigma in itertools.permutations(range(1, n + 1)):
        edges = set(path_edges(DiameterPath(0, sigma)))
        for j in range(1, n + 1):
            assert cx.edge_membership_oracle(sigma, j) == (ref[j - 1] in edges)


def test_from_zero_containment():
    assert cx.prob_contains_from_zero(3, (1,)) == Fraction(1, 3)
    assert cx.prob_contains_from_zero(3, (1, 2, 3)) == Fraction(1, 6)
    per_edge = [cx.prob_contains_from_zero(3, (j,)) for j in (1, 2, 3)]
    assert per_edge == [Fraction(1, 3), Fraction(1, 6), Fraction(1, 3)]
    assert sum(per_edge) == overlap_distribution(3, Variant.FROM_ZERO).mean()


def test_free_start_containment():
    n = 4
    assert cx.prob_A_exact(n, (1, 2, 3, 4)) == Fraction(1, 2 ** (n - 1) * 24)
    assert cx.prob_A_exact(3, (1, 3)) == containment_brute(3, (1, 3), Variant.ALL) == Fraction(1, 24)
    assert cx.prob_edge_all(3) == containment_brute(3, (2,), Variant.ALL)
    with pytest.raises(ValueError):
        cx.prob_A_exact(3, (2,))


def test_printed_sum_overcounts():
    assert cx.prob_A_relaxed(3, (1, 3)) == Fraction(1, 12)
    assert cx.prob_A_relaxed(3, (1, 3)) > cx.prob_A_exact(3, (1, 3))


@pytest.mark.parametrize("n", range(2, 6))
def test_free_start_containment_brute(n):
    for m in range(2, n + 1):
        for ls in itertools.combinations(range(1, n + 1), m):
            assert cx.prob_A_exact(n, ls) == containment_brute(n, ls, Variant.ALL)


def test_incidence_count_integral():
    n = 5
    for m in range(n + 1):
        total = sum(cx.prob_contains_from_zero(n, ls) * 120 for ls in itertools.combinations(range(1, n + 1), m))
        assert total.denominator == 1


def test_binomial_moments():
    assert cx.binomial_moments(3, Variant.FROM_ZERO) == [1, Fraction(5, 6), Fraction(1, 2), Fraction(1, 6)]
    assert cx.binomial_moments(3, Variant.ALL) == [1, Fraction(3, 4), Fraction(5, 24), Fraction(1, 24)]


@pytest.mark.parametrize("variant", list(Variant))
def test_union_bound(variant):
    for n in range(1, 6):
        dist = overlap_distribution(n, variant)
        for m in range(1, n + 1):
            assert dist.tail(m) <= cx.union_bound(n, m, variant)


def test_bc_sum_bound():
    assert cx.bc_sum_bound_check(4, 1, 4).ok
    assert cx.bc_sum_bound_check(2, 1, 2).ok
    assert cx.bc_sum_bound_check(5, 3, 3).ok


def test_c_values():
    assert cx.c_value(0, 0) == 1
    assert cx.c_value(1, 0) == 2
    assert cx.c_value(3, 0) == Fraction(8, 3)
    assert cx.c_value(5, 0) == Fraction(13, 5)
    assert cx.c_value(2, 1) == Fraction(9, 2)
    table = cx.c_table(6, 4)
    assert table[1, 2] == Fraction(9, 2)


def test_c_table_cap():
    with pytest.raises(CapError):
        cx.c_table(1000, 2)


def test_t_sum_identity():
    check = cx.t_sum_identity(4, 2)
    assert check.lhs == check.rhs == 9
    assert check.detail["lhs_strict_range"] == 4
    assert cx.t_sum_identity(6, 6).lhs == 1
    assert all(cx.t_sum_identity(n, m).ok for n in range(1, 9) for m in range(1, n + 1))


def test_nilpotent_route():
    assert cx.c_via_nilpotent(4, 3) == cx.c_value(4, 3)
    for n in range(7):
        iterates = cx.nilpotent_iterates(n)
        assert all(x == 0 for x in iterates[n + 1])
        for k in range(8):
            assert cx.c_via_nilpotent(n, k) == cx.c_value(n, k)


def test_matrix_without_zero_index_misses_constant_term():
    assert cx.c_via_matrix_without_zero_index(1, 1) == 2
    assert cx.c_value(1, 1) == 3
    assert cx.c_via_matrix_without_zero_index(4, 0) == cx.c_value(4, 0)
    # index 0 makes the nilpotency index n + 1
    assert cx.nilpotent_iterates(3)[3][3] == Fraction(1, 6)


def test_d_constants():
    d0 = cx.d_tail_constant(0)
    assert d0.value == Fraction(5, 3) and set(d0.argmax) == {3, 4}
    d1 = cx.d_tail_constant(1)
    assert d1.value == Fraction(17, 12) and d1.argmax == (4,)
    seq = [cx.d_tail_constant(k).value for k in range(13)]
    assert all(a >= b for a, b in zip(seq, seq[1:]))


def test_sup_c0():
    assert cx.sup_c0(200).value == Fraction(8, 3)


@given(st.integers(2, 30), st.data())
@settings(max_examples=40, deadline=None)
def test_rho_extremum(n, data):
    m = data.draw(st.integers(2, n))
    assert cx.rho_extremum_check(n, m)


def test_growth_bounded_at_five_thirds():
    rows = cx.growth_bound_evidence(Fraction(2, 3), k_max=40, n_max=40)
    assert rows[0].sup_c == Fraction(8, 3)
    assert max(r.ratio_to_geometric for r in rows) < 25 / 6


def test_polynomial_growth_in_k():
    for n in range(1, 7):
        ratios = cx.polynomial_growth_ratios(n, 40)
        assert all(a >= b for a, b in zip(ratios, ratios[1:]))


def test_tail_bound_with_fitted_constants():
    delta, r = Fraction(2, 3), 0.0
    c = cx.fit_t_sum_growth_constant(delta, r, 12)
    K = cx.stirling_constant(50)
    assert 0 < K <= 1.0 + 1e-12
    for n, m in [(6, 2), (3, 1), (6, 1), (6, 4)]:
        tail = overlap_distribution(n, Variant.FROM_ZERO).tail(m)
        assert cx.tail_bound_eval(n, m, float(delta), c, r, K, exact_tail=tail).ok
    assert overlap_distribution(3, Variant.FROM_ZERO).tail(1) == Fraction(1, 2)
