import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from oracles import brute_coefficient, brute_level_weight, points
from qrounds.errors import CapacityError, DomainError, ValidationError
from qrounds.fourier import (
    BooleanFunction,
    FourierSpectrum,
    Restriction,
    all_assignments,
    direct_coefficients,
    from_callable,
    inverse_wht,
    level_l1_weight,
    level_l1_weights,
    phase,
    restrict,
    sign_table,
    wht,
)

small_n = st.integers(min_value=0, max_value=6)


@st.composite
def tables(draw, max_n=6):
    n = draw(st.integers(min_value=0, max_value=max_n))
    vals = draw(arrays(np.float64, (1 << n,), elements=st.floats(-4, 4)))
    return BooleanFunction(n, vals)


def test_table_order_matches_points():
    assert [tuple(x) for x in all_assignments(3)] == points(3)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_wht_matches_brute_force(n):
    rng = np.random.default_rng(n)
    vals = rng.standard_normal(1 << n)
    spec = wht(BooleanFunction(n, vals))
    for k in range(n + 1):
        for subset in itertools.combinations(range(n), k):
            assert spec[subset] == pytest.approx(brute_coefficient(vals, n, subset), abs=1e-12)


def test_direct_coefficients_agree_with_wht():
    rng = np.random.default_rng(7)
    f = BooleanFunction(5, rng.standard_normal(32) + 1j * rng.standard_normal(32))
    assert np.allclose(direct_coefficients(f), wht(f).coefficients, atol=1e-12)


def test_character_has_single_coefficient():
    spec = wht(sign_table(4, (0, 2)))
    expected = np.zeros(16)
    expected[0b0101] = 1
    assert np.allclose(spec.coefficients, expected)


def test_and_function_known_spectrum():
    # AND as 0/1 of "all inputs are -1": (1 - x0)(1 - x1)/4
    f = from_callable(lambda x: float(all(v == -1 for v in x)), 2)
    spec = wht(f)
    assert np.allclose(spec.coefficients, [0.25, -0.25, -0.25, 0.25])
    assert level_l1_weight(spec, 1) == pytest.approx(0.5)


@settings(max_examples=40, deadline=None)
@given(tables())
def test_inverse_round_trip(f):
    assert np.allclose(inverse_wht(wht(f)).values, f.values, atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(tables())
def test_parseval(f):
    spec = wht(f)
    assert np.sum(np.abs(spec.coefficients) ** 2) == pytest.approx(np.mean(np.abs(f.values) ** 2), abs=1e-9)


@settings(max_examples=30, deadline=None)
@given(tables(max_n=5))
def test_level_weights_sum_levels(f):
    spec = wht(f)
    weights = level_l1_weights(spec)
    assert weights.shape == (f.n + 1,)
    for ell in range(f.n + 1):
        assert weights[ell] == pytest.approx(brute_level_weight(f.values, f.n, ell), abs=1e-9)
    assert weights.sum() == pytest.approx(np.abs(spec.coefficients).sum())


@settings(max_examples=40, deadline=None)
@given(tables(max_n=5), st.data())
def test_restrict_matches_pointwise(f, data):
    rho = Restriction(tuple(data.draw(st.sampled_from([None, 1, -1])) for _ in range(f.n)))
    g = restrict(f, rho)
    assert g.n == rho.n_free
    for y in points(g.n):
        assert g(y) == f(rho.expand(y))


def test_restrict_keeps_free_order():
    # f = x0 + 2 x1 + 4 x2; fixing x1 leaves variables (x0, x2) in order
    f = from_callable(lambda x: x[0] + 2 * x[1] + 4 * x[2], 3)
    g = restrict(f, Restriction.parse("*-*"))
    spec = wht(g)
    assert spec[(0,)] == pytest.approx(1)
    assert spec[(1,)] == pytest.approx(4)
    assert spec[()] == pytest.approx(-2)


def test_restriction_parse_and_str():
    rho = Restriction.parse("+*-")
    assert rho.assignments == (1, None, -1)
    assert str(rho) == "+*-"
    assert rho.free_positions == (1,)
    with pytest.raises(DomainError):
        Restriction.parse("+x")
    with pytest.raises(DomainError):
        Restriction((2,))


def test_validation_errors():
    with pytest.raises(ValidationError):
        BooleanFunction(2, np.zeros(3))
    with pytest.raises(DomainError):
        restrict(BooleanFunction(2, np.zeros(4)), Restriction.free(3))
    with pytest.raises(DomainError):
        level_l1_weight(wht(BooleanFunction(2, np.zeros(4))), 3)


def test_capacity_guard(monkeypatch):
    monkeypatch.setenv("QROUNDS_MAX_VARS", "3")
    with pytest.raises(CapacityError):
        BooleanFunction(4, np.zeros(16))


def test_serialization_round_trips():
    rng = np.random.default_rng(3)
    f = BooleanFunction(3, rng.standard_normal(8) + 1j * rng.standard_normal(8))
    assert np.array_equal(BooleanFunction.from_json(f.to_json()).values, f.values)
    spec = wht(f)
    assert np.array_equal(FourierSpectrum.from_csv(spec.to_csv()).coefficients, spec.coefficients)


def test_phase_of_zero_is_one():
    assert np.allclose(phase([0, 2j, -3]), [1, 1j, -1])
