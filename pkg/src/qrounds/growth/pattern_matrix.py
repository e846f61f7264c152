"""The over-counting matrix ``P`` relating ``h`` to ``g``, and its exact inverse."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import CapacityError, DomainError, capacity
from .patterns import OddPatternSet, format_pattern, profile_count, profiles

MAX_PROFILES = 5000
# int64 products stay exact while every partial sum is below this
_INT_LIMIT = 2**62


def max_profiles():
    return capacity("MAX_PROFILES", MAX_PROFILES)


@dataclass(frozen=True)
class PatternMatrix:
    """``P[s, s']`` over all profiles of weight ``ell``, rows in ``>>>`` order."""

    d: int
    ell: int
    profiles: np.ndarray
    P: np.ndarray

    @property
    def D(self):
        return len(self.profiles)

    def index(self, s):
        return _profile_index(self.d, self.ell)[tuple(int(v) for v in s)]

    def entry(self, s, s_prime):
        return int(self.P[self.index(s), self.index(s_prime)])

    def is_identity(self):
        return bool(np.array_equal(self.P, np.eye(self.D, dtype=self.P.dtype)))

    def to_csv(self):
        """Integer CSV: profile columns, then one column per ``s'``."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        pats = [format_pattern(b) for b in OddPatternSet(self.d)]
        w.writerow(["s"] + [f"s_{k}" for k in range(self.D)])
        for k, row in enumerate(self.P):
            label = ";".join(f"{p}={int(v)}" for p, v in zip(pats, self.profiles[k]))
            w.writerow([label] + [int(v) for v in row])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, d, ell, text):
        rows = list(csv.reader(io.StringIO(text)))[1:]
        mat = np.array([[int(v) for v in row[1:]] for row in rows], dtype=np.int64)
        return cls(d, ell, np.array(profiles(d, ell), dtype=np.int64).reshape(-1, 1 << (d - 1)), mat)


def _profile_index(d, ell):
    key = (d, ell)
    if key not in _INDEX_CACHE:
        _INDEX_CACHE[key] = {s: k for k, s in enumerate(profiles(d, ell))}
    return _INDEX_CACHE[key]


_INDEX_CACHE: dict = {}


def binomial_table(top):
    """``C(a, k)`` for ``0 <= a, k <= top`` as int64."""
    tab = np.zeros((top + 1, top + 1), dtype=np.int64)
    for a in range(top + 1):
        for k in range(a + 1):
            tab[a, k] = math.comb(a, k)
    return tab


def pattern_matrix(d, ell, chunk=512) -> PatternMatrix:
    """Evaluate the telescoping binomial products for every pair of profiles."""
    if d < 2 or ell < 0:
        raise DomainError("need d >= 2 and ell >= 0")
    D = profile_count(d, ell)
    if D > max_profiles():
        raise CapacityError(f"D = {D} profiles exceeds the limit of {max_profiles()}")
    pats = OddPatternSet(d)
    S = np.array(profiles(d, ell), dtype=np.int64).reshape(D, len(pats))
    above = pats.above()
    up = S @ above
    strict = S @ (above - np.eye(len(pats), dtype=np.int64))
    tab = binomial_table(ell)
    P = np.ones((D, D), dtype=np.int64)
    for lo in range(0, D, chunk):
        rows = slice(lo, lo + chunk)
        block = P[rows]
        for j in range(len(pats)):
            top = up[None, :, j] - strict[rows, None, j]
            k = np.broadcast_to(S[rows, None, j], top.shape)
            ok = top >= k
            block *= np.where(ok, tab[np.clip(top, 0, ell), k], 0)
    S.setflags(write=False)
    P.setflags(write=False)
    return PatternMatrix(d, ell, S, P)


def lower_unitriangular_inverse(P):
    """Exact inverse of a lower unitriangular integer matrix by substitution.

    Works in int64 while a magnitude bound rules out overflow, and in Python
    integers otherwise.
    """
    D = P.shape[0]
    X = np.zeros((D, D), dtype=np.int64)
    exact = False
    col_max = np.zeros(D)
    for i in range(D):
        nz = np.flatnonzero(P[i, :i])
        if not exact:
            bound = float(np.abs(P[i, nz]).astype(float) @ col_max[nz]) + 1
            if bound >= _INT_LIMIT:
                X = X.astype(object)
                exact = True
        row = -(P[i, nz].astype(X.dtype) @ X[nz]) if len(nz) else np.zeros(D, dtype=X.dtype)
        row[i] += 1
        X[i] = row
        if not exact:
            col_max[i] = float(np.max(np.abs(row)))
    return X


@dataclass
class PatternMatrixReport:
    d: int
    ell: int
    D: int
    lower_triangular: bool
    unit_diagonal: bool
    det: int
    inverse_exact: bool
    norm1: int
    norm1_bound: int
    inv_norm1: int
    inv_norm1_bound: int
    identity: bool
    failures: list = field(default_factory=list)

    @property
    def passed(self):
        return not self.failures


def _norm1(mat):
    # max absolute column sum, in Python integers
    if mat.dtype == object:
        return max(sum(abs(int(v)) for v in mat[:, j]) for j in range(mat.shape[1]))
    return int(np.max(np.sum(np.abs(mat), axis=0)))


def _verify_inverse(P, X, probes=3, seed=0):
    # P (X r) == r for random integer r; exact in Python integers
    rng = np.random.default_rng(seed)
    D = P.shape[0]
    fast = X.dtype != object
    if fast:
        rows_x = float(np.max(np.sum(np.abs(X).astype(float), axis=1)))
        rows_p = float(np.max(np.sum(np.abs(P).astype(float), axis=1)))
        fast = 3 * rows_x * rows_p < _INT_LIMIT
    if not fast:
        P, X = P.astype(object), X.astype(object)
    for _ in range(probes):
        r = rng.integers(-3, 4, D)
        if not fast:
            r = r.astype(object)
        if not np.array_equal(P @ (X @ r), r):
            return False
    return True


def pattern_matrix_checks(pm: PatternMatrix, probes=3) -> PatternMatrixReport:
    """Triangularity, unit diagonal, exact inverse and both norm bounds."""
    P = pm.P
    D = pm.D
    lower = not np.any(np.triu(P, 1))
    unit = bool(np.all(np.diag(P) == 1))
    det = int(np.prod(np.diag(P).astype(object))) if lower else None
    failures = []
    if not lower:
        failures.append("P is not lower-triangular in >>> order")
    if not unit:
        failures.append("diag(P) != 1")
    if det != 1:
        failures.append(f"det P = {det} != 1")
    width = 1 << (pm.d - 1)
    norm_bound = math.comb(pm.ell * width, pm.ell)
    inv_bound = D * norm_bound**D
    norm1 = _norm1(P)
    if norm1 > norm_bound:
        failures.append(f"|P|_1 = {norm1} > C(ell 2^(d-1), ell) = {norm_bound}")
    inv_exact = False
    inv_norm = -1
    if lower and unit:
        X = lower_unitriangular_inverse(P)
        inv_exact = _verify_inverse(P, X, probes)
        if not inv_exact:
            failures.append("P P^-1 != I")
        inv_norm = _norm1(X)
        if inv_norm > inv_bound:
            failures.append(f"|P^-1|_1 = {inv_norm} > D C(ell 2^(d-1), ell)^D")
    return PatternMatrixReport(
        pm.d, pm.ell, D, lower, unit, det, inv_exact, norm1, norm_bound, inv_norm, inv_bound, pm.is_identity(), failures
    )
