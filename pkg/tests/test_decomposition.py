import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import brute_g_h, odd_patterns
from qrounds.errors import CapacityError, DomainError
from qrounds.fourier import Restriction
from qrounds.growth import decomposition_h, g_profiles, operator_norm, optimal_pivot, profile_data, profiles, random_form
from qrounds.growth.decomposition import pivot_cost


def test_pivot_d2_picks_lighter_side():
    # patterns (10, 01): e_1 = s^(01), e_2 = s^(10)
    assert optimal_pivot(2, 3, (2, 1)) == 1
    assert optimal_pivot(2, 3, (1, 2)) == 2


@pytest.mark.parametrize("d", [3, 5])
def test_all_ones_pattern_costs_nothing(d):
    # the all-ones string is odd only for odd d
    pats = odd_patterns(d)
    s = tuple(3 if all(b) else 0 for b in pats)
    assert all(pivot_cost(pats, s, r) == 0 for r in range(1, d + 1))


def test_pivot_example_d3():
    s = (0, 1, 1, 1)  # order (111, 100, 010, 001)
    costs = [pivot_cost(odd_patterns(3), s, r) for r in (1, 2, 3)]
    assert costs == [2, 2, 2]
    assert min(costs) <= (3 - 1) * 3 // 3
    optimal_pivot(3, 3, s)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 5), st.data())
def test_pivot_cost_guarantee(d, data):
    ell = data.draw(st.integers(0, 4))
    s = data.draw(st.sampled_from(profiles(d, ell)))
    r = optimal_pivot(d, ell, s)
    assert pivot_cost(odd_patterns(d), s, r) <= (d - 1) * ell // d


@pytest.mark.parametrize("seed", range(3))
def test_d2_chain_equals_g(seed):
    form = random_form(3, 1, 1, 2, seed)
    data = profile_data(form, None)
    for ell in range(3):
        g, _ = g_profiles(form, None, ell, data)
        for s, gv in zip(g.profiles, g.values):
            for pivot in (1, 2):
                rep = decomposition_h(form, None, s, pivot, data=data)
                assert rep.value == pytest.approx(gv, abs=1e-8)
                assert rep.passed


@pytest.mark.parametrize("n,t,m,seed,rho", [(3, 1, 1, 0, None), (3, 2, 1, 1, "*+*"), (2, 2, 2, 2, None)])
def test_d3_chain_equals_literal_count(n, t, m, seed, rho):
    form = random_form(n, t, m, 3, seed)
    rho = None if rho is None else Restriction.parse(rho)
    data = profile_data(form, rho)
    for ell in range(3):
        _, _, literal = brute_g_h(form, rho, ell)
        for s in profiles(3, ell):
            for pivot in (1, 2, 3):
                rep = decomposition_h(form, rho, s, pivot, data=data)
                assert rep.value == pytest.approx(literal.get(s, 0), abs=1e-8)
                assert not rep.norm_violations, [(f.name, f.norm, f.bound) for f in rep.norm_violations]


def test_zero_profile():
    form = random_form(3, 1, 1, 3, 4)
    g, _ = g_profiles(form, None, 0)
    rep = decomposition_h(form, None, (0, 0, 0, 0))
    assert rep.value == pytest.approx(g.values[0], abs=1e-10)


def test_factor_layout():
    form = random_form(2, 1, 1, 3, 0)
    rep = decomposition_h(form, None, (0, 1, 1, 0), pivot=2)
    names = [f.name for f in rep.factors]
    assert names == ["Q_1", "R_1", "Q_2", "W", "Q'_2", "R'_2", "Q'_3"]
    assert all(f.bound == 1.0 for f in rep.factors if f.name.startswith("R"))


def test_errors():
    form = random_form(2, 1, 1, 3, 0)
    with pytest.raises(DomainError):
        decomposition_h(form, None, (1, 0))
    with pytest.raises(DomainError):
        decomposition_h(form, None, (1, 0, 0, 0), pivot=4)
    with pytest.raises(CapacityError):
        decomposition_h(random_form(5, 1, 1, 3, 0), None, (1, 0, 0, 0))


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 12), st.integers(1, 12), st.floats(0.05, 0.6), st.integers(0, 2**32 - 1))
def test_operator_norm_matches_dense_svd(rows, cols, density, seed):
    mat = sp.random(rows, cols, density=density, random_state=np.random.default_rng(seed), format="csr")
    dense = mat.toarray()
    expect = np.linalg.norm(dense, 2) if dense.any() else 0.0
    assert operator_norm(mat) == pytest.approx(expect, rel=1e-12, abs=1e-14)
