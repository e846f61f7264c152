import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import brute_level_weight
from qrounds.errors import DomainError
from qrounds.growth import (
    bs_condition,
    explicit_growth_bound,
    explicit_growth_log2,
    exponent_c,
    h_bound,
    kappa_symbolic,
    l1_weight,
    nonadaptive_bound,
    nonadaptive_two_term,
    random_form,
    within_explicit_bound,
)


def test_h_bound_examples():
    assert h_bound(2, 2, 1, 4) == 2
    assert explicit_growth_bound(2, 2, 1, 4) == 3888 == 3**2 * math.comb(4, 2) ** 3 * 2
    assert h_bound(3, 0, 2, 5) == 1
    assert explicit_growth_bound(3, 0, 2, 5) == 1


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 6), st.integers(0, 6), st.integers(1, 6), st.integers(0, 6))
def test_h_bound_clamps(d, ell, t, n_free):
    val = h_bound(d, ell, t, n_free)
    assert val >= t**ell * (1 - 1e-12)
    if t >= n_free:
        assert val == pytest.approx(t**ell)
    else:
        assert val == pytest.approx(t**ell * (n_free / t) ** (((d - 1) * ell // d) / 2))


def test_explicit_bound_overflow_and_log_compare():
    assert explicit_growth_bound(6, 4, 2, 8) == math.inf
    log_bound = explicit_growth_log2(6, 4, 2, 8)
    assert math.isfinite(log_bound) and log_bound > 1024
    assert within_explicit_bound(1e300, 6, 4, 2, 8)
    assert within_explicit_bound(0.0, 2, 2, 1, 4)
    assert within_explicit_bound(3888.0, 2, 2, 1, 4)
    assert not within_explicit_bound(3889.0, 2, 2, 1, 4)


def test_bad_domain():
    with pytest.raises(DomainError):
        h_bound(1, 1, 1, 1)
    with pytest.raises(DomainError):
        h_bound(2, 1, 0, 1)


@pytest.mark.parametrize("seed", range(8))
def test_nonadaptive_bounds_on_d2_forms(seed):
    n, t = 4, 1 + seed % 2
    form = random_form(n, t, 1, 2, seed)
    table = form.table().values
    for ell in range(n + 1):
        value = l1_weight(form, None, ell)
        assert value == pytest.approx(brute_level_weight(table, n, ell), abs=1e-10)
        assert value <= nonadaptive_bound(ell, t, n) + 1e-9
        assert value <= nonadaptive_two_term(ell, t, n) + 1e-9


def test_nonadaptive_forms_differ():
    # the sum of per-split minima is not below the balanced two-term form
    assert nonadaptive_two_term(2, 4, 4) == pytest.approx(8.0)
    assert nonadaptive_bound(2, 4, 4) == pytest.approx(2 * math.sqrt(6) + 4)


def test_exponent_formula():
    assert exponent_c(2, 1) == Fraction(1, 2)
    assert exponent_c(3, 2) == Fraction(2, 15)
    assert exponent_c(5, 1) == Fraction(4, 5)
    for rp in range(2, 6):
        # halving the rounds, r = 2 r', gives 1 / (r + 1) once r' >= 2
        assert exponent_c(2 * rp, rp) == Fraction(1, 2 * rp + 1)
    assert exponent_c(4, 2) == Fraction(1, 5)
    for r in range(3, 9):
        for rp in range(2, r):
            assert exponent_c(r, rp) >= Fraction(1, r * r)


def test_exponent_domain():
    with pytest.raises(DomainError):
        exponent_c(2, 2)
    with pytest.raises(DomainError):
        exponent_c(3, 0)
    with pytest.raises(DomainError):
        bs_condition(2, 3, 1, 1, 4, 1.0)


def test_bs_condition():
    # (1/sqrt n)^{1-1/(2r)} growth^{1/ell} against r^{-20}
    r, ell, n = 2, 2, 4.0**40
    lhs = (1 / math.sqrt(n)) ** (1 - 1 / (2 * r)) * 16 ** (1 / ell)
    assert bs_condition(r, 1, ell, 1, n, 16) == (lhs <= 2.0**-20)
    assert not bs_condition(2, 1, 2, 1, 16, 16)
    assert bs_condition(2, 1, 2, 1, 16, 0.0)


def test_kappa_symbolic_is_text():
    text = kappa_symbolic(3, 2)
    assert "D=10" in text and isinstance(text, str)
