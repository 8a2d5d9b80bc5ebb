import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import enumerate_success_pmf
from wsnfeedback.channel import (
    ChannelConfig,
    binomial_approx_pmf,
    binomial_success_matrix,
    brute_force_pmf,
    collision_conditional_pmf,
    exact_success_pmf,
    mixture_success_pmf,
    resolve_slot,
    unsuccessful_combinations,
)


def test_resolve_slot_examples():
    cfg = ChannelConfig(3, 2)
    out = resolve_slot([0, 2, 0], cfg)
    assert out.n_success == 1 and out.success[1]
    out = resolve_slot([1, 1, 0], cfg)
    assert out.n_success == 0 and out.n_collisions == 1
    out = resolve_slot([1, 1, 2], cfg)
    assert out.n_success == 1 and out.success[2] and out.n_collisions == 1
    with pytest.raises(ValueError):
        resolve_slot([3, 0, 0], cfg)


def test_unsuccessful_combinations_examples():
    assert unsuccessful_combinations(1, 1) == 0
    assert all(unsuccessful_combinations(0, b) == 1 for b in range(6))
    assert unsuccessful_combinations(2, 2) == 2


@pytest.mark.parametrize("t,b", [(t, b) for t in range(7) for b in range(1, 5)])
def test_unsuccessful_combinations_by_enumeration(t, b):
    count = 0
    for a in itertools.product(range(b), repeat=t):
        if all(a.count(c) != 1 for c in range(b)):
            count += 1
    assert unsuccessful_combinations(t, b) == count


def test_exact_pmf_examples():
    p = exact_success_pmf(0.5, ChannelConfig(2, 1))
    assert p[1] == pytest.approx(0.5, abs=1e-15)
    assert exact_success_pmf(0.0, ChannelConfig(7, 3))[0] == 1.0
    p = exact_success_pmf(1.0, ChannelConfig(3, 2))
    np.testing.assert_allclose(p.probs, [0.25, 0.75, 0.0], atol=1e-15)


def test_brute_force_examples():
    assert brute_force_pmf(0.3, ChannelConfig(1, 1))[1] == pytest.approx(0.3)
    p = brute_force_pmf(1.0, ChannelConfig(2, 2))
    assert p[2] == pytest.approx(0.5) and p[0] == pytest.approx(0.5)


@pytest.mark.parametrize("N,B", [(N, B) for N in range(1, 5) for B in range(1, min(N, 3) + 1)])
def test_brute_force_against_independent_enumeration(N, B):
    for q in (0.1, 0.5, 0.9):
        np.testing.assert_allclose(brute_force_pmf(q, ChannelConfig(N, B)).probs, enumerate_success_pmf(q, N, B),
                                   atol=1e-14)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 40), st.integers(1, 6), st.floats(0.0, 1.0))
def test_exact_equals_mixture_of_conditionals(N, B, q):
    B = min(B, N)
    cfg = ChannelConfig(N, B)
    assert exact_success_pmf(q, cfg).total_variation(mixture_success_pmf(q, cfg)) < 1e-10


def test_conditional_pmf_rows_are_distributions():
    for t in range(10):
        p = collision_conditional_pmf(t, 4)
        assert p.sum() == pytest.approx(1.0, abs=1e-14)


def test_binomial_examples():
    assert binomial_approx_pmf(0.0, 5)[0] == 1.0
    p5 = binomial_approx_pmf(1.0, 5)[5]
    assert abs(p5 - math.exp(-5)) < 1e-15
    assert abs(p5 - 0.0067379) < 1e-5  # e^-5 = 0.0067379
    assert binomial_approx_pmf(1.0, 1)[1] == pytest.approx(math.exp(-1), rel=1e-15)


def test_binomial_matrix_rows():
    rows = binomial_success_matrix([0.0, 0.5, 1.0], 3)
    for z, row in zip([0.0, 0.5, 1.0], rows):
        np.testing.assert_allclose(row, binomial_approx_pmf(z, 3).probs, atol=1e-15)


def test_config_validation():
    with pytest.raises(ValueError):
        ChannelConfig(2, 3)
    with pytest.raises(ValueError):
        exact_success_pmf(1.2, ChannelConfig(3, 1))
