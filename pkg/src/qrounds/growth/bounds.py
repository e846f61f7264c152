"""Closed-form growth bounds and the exponent bookkeeping around them."""
from __future__ import annotations

import math
from fractions import Fraction

from ..errors import DomainError
from .patterns import profile_count


def _check(d, ell, t, n_free):
    if d < 2:
        raise DomainError("d must be >= 2")
    if ell < 0 or t < 1 or n_free < 0:
        raise DomainError("need ell >= 0, t >= 1 and n_free >= 0")


def h_bound(d, ell, t, n_free):
    """``t^ell max{1, (n/t)^{floor((d-1) ell / d) / 2}}``."""
    _check(d, ell, t, n_free)
    ratio = n_free / t
    return float(t) ** ell * max(1.0, ratio ** (((d - 1) * ell // d) / 2))


def explicit_constant(d, ell):
    """``D^2 C(ell 2^{d-1}, ell)^D`` as an exact integer."""
    D = profile_count(d, ell)
    return D * D * math.comb(ell << (d - 1), ell) ** D


def explicit_growth_log2(d, ell, t, n_free):
    """``log2`` of the explicit bound; finite even when the bound overflows."""
    return math.log2(explicit_constant(d, ell)) + math.log2(h_bound(d, ell, t, n_free))


def explicit_growth_bound(d, ell, t, n_free):
    """``D^2 C(ell 2^{d-1}, ell)^D h_bound``; ``inf`` past the float range."""
    const = explicit_constant(d, ell)
    try:
        return float(const) * h_bound(d, ell, t, n_free)
    except OverflowError:
        _check(d, ell, t, n_free)
        return math.inf


def within_explicit_bound(value, d, ell, t, n_free):
    """``value <= explicit_growth_bound``, compared in log space when huge."""
    if value <= 0:
        return True
    return math.log2(value) <= explicit_growth_log2(d, ell, t, n_free) + 1e-12


def nonadaptive_bound(ell, t, n_free):
    """Sum over splits ``s1 + s2 = ell`` of the smaller of the two bounds.

    ``sqrt(C(n, s2) C(t, s1))`` and ``sqrt(C(n, s1) C(t, s2))`` bound the
    split's contribution through either decomposition.
    """
    total = 0.0
    for s1 in range(ell + 1):
        s2 = ell - s1
        left = math.comb(n_free, s2) * math.comb(t, s1)
        right = math.comb(n_free, s1) * math.comb(t, s2)
        total += math.sqrt(min(left, right))
    return total


def nonadaptive_two_term(ell, t, n_free):
    """Balanced-split form ``sqrt(C(n, ceil) C(t, floor)) + sqrt(C(n, floor) C(t, ceil))``."""
    lo, hi = ell // 2, (ell + 1) // 2
    return math.sqrt(math.comb(n_free, hi) * math.comb(t, lo)) + math.sqrt(math.comb(n_free, lo) * math.comb(t, hi))


def exponent_c(r, r_prime) -> Fraction:
    """Separation exponent: ``1 - 1/r`` for ``r' = 1``, else ``(r - r') / (r r' + r/2)``."""
    if not 1 <= r_prime < r:
        raise DomainError(f"need 1 <= r' < r, got r={r}, r'={r_prime}")
    if r_prime == 1:
        return 1 - Fraction(1, r)
    return Fraction(r - r_prime) / (r * r_prime + Fraction(r, 2))


def bs_condition(r, r_prime, ell, t, n, growth_value):
    """``(1/sqrt n)^{1 - 1/(2r)} growth^{1/ell} <= r^{-20}``."""
    if not 1 <= r_prime < r:
        raise DomainError(f"need 1 <= r' < r, got r={r}, r'={r_prime}")
    if ell < 1 or n < 1:
        raise DomainError("need ell >= 1 and n >= 1")
    lhs = math.exp(-(1 - 1 / (2 * r)) * 0.5 * math.log(n) + math.log(growth_value) / ell) if growth_value > 0 else 0.0
    return lhs <= float(r) ** -20


def kappa_symbolic(d, ell):
    """The exponent ``kappa(d, ell) = O(d ell D)`` as text; never evaluated."""
    return f"O(d*ell*D) with d={d}, ell={ell}, D={profile_count(d, ell)}"
