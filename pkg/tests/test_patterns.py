import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import odd_patterns, telescoping, venn
from qrounds.errors import CapacityError
from qrounds.growth import OddPatternSet, intersection_profile, pattern_matrix, pattern_matrix_checks, profile_count, profiles, xor_reduce
from qrounds.growth.pattern_matrix import PatternMatrix, lower_unitriangular_inverse
from qrounds.growth.patterns import compositions, mask_profile


def test_xor_reduce_examples():
    assert xor_reduce((1, 1, 2)) == {2}
    assert xor_reduce((1, 2), (2, 3)) == {1, 3}
    assert xor_reduce((1, 1)) == frozenset()


@pytest.mark.parametrize("d", [1, 2, 3, 4, 5])
def test_pattern_order(d):
    pats = OddPatternSet(d)
    assert len(pats) == 2 ** (d - 1)
    assert list(pats) == odd_patterns(d)
    for b1, b2 in itertools.combinations(pats, 2):
        assert pats.dominates(b1, b2) and not pats.dominates(b2, b1)


def test_pattern_order_d3():
    assert list(OddPatternSet(3)) == [(1, 1, 1), (1, 0, 0), (0, 1, 0), (0, 0, 1)]


def test_intersection_profile_examples():
    assert intersection_profile({1, 2}, {2, 3}) == (1, 1)
    assert intersection_profile({5}, {5}, {5}) == (1, 0, 0, 0)


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 4), st.data())
def test_intersection_profile_per_element(d, data):
    tuples = [data.draw(st.lists(st.integers(0, 5), min_size=2, max_size=2)) for _ in range(d)]
    sets = [xor_reduce(tup) for tup in tuples]
    cells = venn(sets, d)
    expect = tuple(len(cells[b]) for b in odd_patterns(d))
    assert intersection_profile(*sets) == expect
    total = frozenset()
    for s in sets:
        total ^= s
    assert sum(expect) == len(total)
    masks = [sum(1 << e for e in s) for s in sets]
    assert mask_profile(masks, d) == expect


@pytest.mark.parametrize("d,ell", [(2, 0), (2, 3), (3, 2), (4, 3), (5, 2)])
def test_profile_count(d, ell):
    profs = profiles(d, ell)
    assert len(profs) == profile_count(d, ell) == math.comb(ell + 2 ** (d - 1) - 1, 2 ** (d - 1) - 1)
    assert len(set(profs)) == len(profs)
    assert all(sum(s) == ell and min(s) >= 0 for s in profs)
    assert list(profs) == sorted(profs, reverse=True)


def test_compositions_small():
    assert list(compositions(2, 2)) == [(2, 0), (1, 1), (0, 2)]


@pytest.mark.parametrize("d,ell", [(2, 2), (3, 1), (3, 2), (4, 2)])
def test_pattern_matrix_matches_formula(d, ell):
    pm = pattern_matrix(d, ell)
    for i, s in enumerate(pm.profiles):
        for j, sp in enumerate(pm.profiles):
            assert pm.P[i, j] == telescoping(tuple(sp), tuple(s), d)


@pytest.mark.parametrize("ell", [0, 1, 2, 3, 4])
def test_d2_is_identity(ell):
    assert pattern_matrix(2, ell).is_identity()


def test_hand_entry_d3():
    pm = pattern_matrix(3, 1)
    assert pm.entry((0, 1, 0, 0), (1, 0, 0, 0)) == 1
    assert pm.P[1].tolist() == [1, 1, 0, 0]


def _fraction_inverse(P):
    # Gauss-Jordan over the rationals
    D = len(P)
    aug = [[Fraction(int(v)) for v in row] + [Fraction(int(i == j)) for j in range(D)] for i, row in enumerate(P)]
    for c in range(D):
        piv = next(r for r in range(c, D) if aug[r][c] != 0)
        aug[c], aug[piv] = aug[piv], aug[c]
        scale = aug[c][c]
        aug[c] = [v / scale for v in aug[c]]
        for r in range(D):
            if r != c and aug[r][c] != 0:
                f = aug[r][c]
                aug[r] = [a - f * b for a, b in zip(aug[r], aug[c])]
    return [[row[D + j] for j in range(D)] for row in aug]


@pytest.mark.parametrize("d,ell", [(3, 2), (3, 3), (4, 2)])
def test_inverse_matches_rational_elimination(d, ell):
    pm = pattern_matrix(d, ell)
    inv = lower_unitriangular_inverse(pm.P)
    expect = _fraction_inverse(pm.P)
    assert all(int(inv[i][j]) == expect[i][j] for i in range(pm.D) for j in range(pm.D))


def test_checks_d3_l2_exact_norms():
    rep = pattern_matrix_checks(pattern_matrix(3, 2))
    assert rep.passed
    inv = _fraction_inverse(pattern_matrix(3, 2).P)
    col_sums = [sum(abs(inv[i][j]) for i in range(len(inv))) for j in range(len(inv))]
    assert rep.inv_norm1 == max(col_sums) == 28
    assert rep.norm1 == 22
    assert rep.det == 1


def test_checks_identity_case():
    rep = pattern_matrix_checks(pattern_matrix(2, 3))
    assert rep.passed and rep.identity and rep.inv_norm1 == 1


@pytest.mark.parametrize("d,ell", [(4, 2), (5, 1), (5, 2)])
def test_checks_pass(d, ell):
    rep = pattern_matrix_checks(pattern_matrix(d, ell))
    assert rep.passed, rep.failures
    assert rep.lower_triangular and rep.unit_diagonal and rep.inverse_exact
    assert rep.inv_norm1 <= rep.inv_norm1_bound
    assert rep.norm1 <= rep.norm1_bound


def test_checks_report_violations():
    pm = pattern_matrix(3, 1)
    bad = pm.P.copy()
    bad[0, 1] = 5
    rep = pattern_matrix_checks(PatternMatrix(3, 1, pm.profiles, bad))
    assert not rep.passed
    assert any("triangular" in f for f in rep.failures)


def test_csv_round_trip():
    pm = pattern_matrix(3, 2)
    back = PatternMatrix.from_csv(3, 2, pm.to_csv())
    assert np.array_equal(back.P, pm.P)


def test_capacity_guard(monkeypatch):
    monkeypatch.setenv("QROUNDS_MAX_PROFILES", "10")
    with pytest.raises(CapacityError):
        pattern_matrix(4, 3)
