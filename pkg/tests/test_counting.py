from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hypertamper.caps import CapError
from hypertamper.counting import (
    biased_second_moment,
    count,
    count_all,
    count_all_batch,
    count_from,
    count_from_zero,
    count_from_zero_batch,
    count_oracle,
    expected_count,
    overlap,
    overlap_distribution,
)
from hypertamper.hypercube import DiameterPath, EdgeConfig, ModelParams, Variant, num_edges, path_edges


def test_full_counts():
    assert count_from_zero(EdgeConfig.full(3)) == 6
    assert count_from_zero(EdgeConfig.full(4)) == 24
    assert count_all(EdgeConfig.full(3)) == 24
    assert count_all(EdgeConfig.full(2)) == 4


def test_missing_first_edge():
    config = EdgeConfig.full(3).without_edges(path_edges(DiameterPath.reference(3))[:1])
    assert count_from_zero(config) == 4


@pytest.mark.parametrize("variant", list(Variant))
def test_empty_and_single_path(variant):
    assert count(EdgeConfig.empty(4), variant) == 0
    path = DiameterPath(0, (3, 1, 4, 2), variant is Variant.FROM_ZERO)
    assert count(EdgeConfig.from_edges(4, path_edges(path)), variant) == 1


@given(st.integers(1, 5), st.floats(0.3, 1.0), st.integers(0, 2**32 - 1))
@settings(max_examples=80, deadline=None)
def test_dp_matches_oracle(n, p, seed):
    rng = np.random.default_rng(seed)
    config = EdgeConfig(n, rng.random(num_edges(n)) < p)
    assert count_all(config) == count_oracle(config, Variant.ALL)
    assert count_from_zero(config) == count_oracle(config, Variant.FROM_ZERO)


def test_dp_matches_oracle_many_n4():
    rng = np.random.default_rng(4)
    bits = rng.random((1000, num_edges(4))) < 0.7
    got_all = count_all_batch(4, bits)
    got_zero = count_from_zero_batch(4, bits)
    for b, a, z in zip(bits, got_all, got_zero):
        config = EdgeConfig(4, b)
        assert a == count_oracle(config, Variant.ALL)
        assert z == count_oracle(config, Variant.FROM_ZERO)


def test_free_start_is_sum_over_starts():
    rng = np.random.default_rng(9)
    config = EdgeConfig(5, rng.random(num_edges(5)) < 0.8)
    assert 2 * count_all(config) == sum(count_from(config, x) for x in range(32))


def test_count_cap():
    with pytest.raises(CapError, match="count_all"):
        count_all(EdgeConfig.full(14))


def test_expected_count():
    assert expected_count(ModelParams(3, Fraction(1, 2), Variant.FROM_ZERO)) == Fraction(3, 4)
    assert expected_count(ModelParams(3, Fraction(1, 2), Variant.ALL)) == 3
    assert expected_count(ModelParams(5, 1, Variant.ALL)) == 2**4 * 120


def test_overlap_examples():
    ref = DiameterPath.reference(3)
    assert overlap(ref, ref) == 3
    assert overlap(DiameterPath(0, (2, 3, 1)), ref) == 0
    assert overlap(DiameterPath(0, (1, 3, 2)), ref) == 1


def test_overlap_law_exact():
    dist = overlap_distribution(3, Variant.FROM_ZERO)
    assert dist.probs == (Fraction(1, 2), Fraction(1, 3), Fraction(0), Fraction(1, 6))
    assert dist.mean() == Fraction(5, 6)
    assert overlap_distribution(1, Variant.FROM_ZERO).probs == (0, 1)


def test_overlap_law_mc():
    exact = overlap_distribution(3, Variant.FROM_ZERO)
    mc = overlap_distribution(3, Variant.FROM_ZERO, "mc", samples=20_000, seed=1)
    for q, f, se in zip(exact.probs, mc.probs, mc.ses):
        assert abs(float(q) - f) <= 3 * max(se, 1e-12)


def test_biased_second_moment():
    assert biased_second_moment(3, Fraction(1, 2), Variant.FROM_ZERO).value == Fraction(5, 2)
    assert biased_second_moment(4, 1, Variant.ALL).value == 1
    with pytest.raises(ValueError):
        biased_second_moment(3, 0, Variant.ALL)


@pytest.mark.parametrize("variant", list(Variant))
@pytest.mark.parametrize("n", [2, 4, 6])
def test_binomial_moment_route_agrees(variant, n):
    p = Fraction(2, 5)
    assert biased_second_moment(n, p, variant, "moments").value == biased_second_moment(n, p, variant).value


def test_biased_second_moment_mc():
    exact = float(biased_second_moment(4, Fraction(1, 2), Variant.ALL).value)
    est = biased_second_moment(4, Fraction(1, 2), Variant.ALL, "mc", samples=20_000, seed=3)
    assert abs(est.value - exact) <= 3 * est.se
