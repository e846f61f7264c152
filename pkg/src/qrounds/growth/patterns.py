"""Odd patterns, Venn-cell profiles and the orders on them."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ..errors import DomainError


def binom(a, k):
    """Binomial coefficient that vanishes when ``a < k`` or ``a < 0``."""
    if a < 0 or k < 0 or a < k:
        return 0
    return math.comb(a, k)


def pattern_key(b):
    # sorts greatest-first under >>: weight, then lexicographic
    return (-sum(b), tuple(-x for x in b))


@dataclass(frozen=True)
class OddPatternSet:
    """The ``2^{d-1}`` odd-weight strings of ``{0,1}^d``, greatest first under ``>>``."""

    d: int

    def __post_init__(self):
        if self.d < 1:
            raise DomainError("d must be positive")

    @property
    def patterns(self):
        return _patterns(self.d)

    def __len__(self):
        return 1 << (self.d - 1)

    def __iter__(self):
        return iter(self.patterns)

    def index(self, b):
        return _pattern_index(self.d)[tuple(b)]

    def above(self):
        """``G[j', j] = 1`` iff ``B[j'] >= B[j]`` entrywise."""
        return _above(self.d)

    def dominates(self, b1, b2):
        """Total order ``b1 >> b2``."""
        return pattern_key(b1) < pattern_key(b2)


@lru_cache(maxsize=None)
def _patterns(d):
    odd = [b for b in itertools.product((0, 1), repeat=d) if sum(b) % 2 == 1]
    return tuple(sorted(odd, key=pattern_key))


@lru_cache(maxsize=None)
def _pattern_index(d):
    return {b: j for j, b in enumerate(_patterns(d))}


@lru_cache(maxsize=None)
def _above(d):
    pats = _patterns(d)
    out = np.array([[all(x >= y for x, y in zip(b2, b)) for b in pats] for b2 in pats], dtype=np.int64)
    out.setflags(write=False)
    return out


def parse_pattern(text):
    return tuple(int(c) for c in text)


def format_pattern(b):
    return "".join(str(x) for x in b)


def compositions(total, parts):
    """Vectors in ``N^parts`` summing to ``total``, lexicographically descending."""
    if parts == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in compositions(total - first, parts - 1):
            yield (first,) + rest


def profile_count(d, ell):
    """``D = C(ell + 2^{d-1} - 1, 2^{d-1} - 1)``."""
    size = 1 << (d - 1)
    return math.comb(ell + size - 1, size - 1)


@lru_cache(maxsize=64)
def profiles(d, ell):
    """All profiles with ``|s|_1 = ell``, greatest first under the induced order."""
    return tuple(compositions(ell, 1 << (d - 1)))


def xor_reduce(*tuples):
    """Indices appearing an odd number of times across all the tuples."""
    out = set()
    for tup in tuples:
        for i in tup:
            out ^= {i}
    return frozenset(out)


def cells(sets, d=None):
    """Venn cells ``I^(b)`` of ``d`` sets, for each odd pattern ``b``."""
    d = len(sets) if d is None else d
    pats = OddPatternSet(d)
    out = {b: set() for b in pats}
    for e in set().union(*sets):
        b = tuple(int(e in s) for s in sets)
        if b in out:
            out[b].add(e)
    return out


def intersection_profile(*sets, d=None):
    """Sizes ``|I^(b)|`` in pattern order; arguments are the sets ``xor I_i``."""
    sets = [frozenset(s) for s in sets]
    pats = OddPatternSet(len(sets) if d is None else d)
    venn = cells(sets, len(sets))
    return tuple(len(venn[b]) for b in pats)


def mask_profile(masks, d):
    """Profile of ``d`` bitmask sets, computed bitwise."""
    pats = OddPatternSet(d)
    out = []
    for b in pats:
        cell = ~0
        for i, bit in enumerate(b):
            cell &= masks[i] if bit else ~masks[i]
        out.append(int(cell).bit_count() if cell >= 0 else 0)
    return tuple(out)


def profile_vector_to_dict(d, s):
    return {format_pattern(b): int(v) for b, v in zip(OddPatternSet(d), s)}
