"""``h(s)`` as an explicit chain of sparse matrices, with per-factor norms.

Rows and columns are indexed by ``(a, S, J)``: a query index ``a`` of the
form, a mask ``S`` over the free variables and a tuple ``J`` holding, for
each odd pattern ``b``, either ``bot`` or a subset of size ``s^(b)``.  Other
subset sizes never carry mass from the padded end vectors, so they are
left out; each factor's norm bound is checked on the matrices as built.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from ..errors import CapacityError, DomainError
from ..fourier import Restriction
from ..query import BilinearForm
from .patterns import OddPatternSet
from .profiles import PhaseAssignment, h_profiles, profile_data

GUARD = {"n_free": 4, "t": 2, "d": 3, "m": 2}
MAX_INDEX = 200_000
TOL = 1e-8


def optimal_pivot(d, ell, s):
    """First ``r`` minimizing ``e_r``; asserts ``e_r <= floor((d-1) ell / d)``."""
    pats = OddPatternSet(d).patterns
    costs = [pivot_cost(pats, s, r) for r in range(1, d + 1)]
    best = int(np.argmin(costs)) + 1
    if costs[best - 1] > (d - 1) * ell // d:
        raise AssertionError(f"min_r e_r = {costs[best - 1]} exceeds floor((d-1) ell / d)")
    return best


def pivot_cost(pats, s, r):
    """``e_r``: mass on patterns vanishing up to ``r`` or from ``r`` on."""
    low = sum(v for b, v in zip(pats, s) if not any(b[:r]))
    high = sum(v for b, v in zip(pats, s) if not any(b[r - 1:]))
    return low + high


class _JSpace:
    """Per-pattern domains ``{bot} + C([n_free], s^(b))`` and their product."""

    def __init__(self, n_free, s):
        self.domains = [[None] + [sum(1 << e for e in c) for c in itertools.combinations(range(n_free), k)] for k in s]
        self.sizes = [len(dom) for dom in self.domains]
        self.count = math.prod(self.sizes)
        self.s = tuple(s)

    def per_pattern(self, rule):
        # kron over patterns of 0/1 transition matrices rule(j, J_row, J_col)
        out = sp.identity(1, format="csr", dtype=np.int64)
        for j, dom in enumerate(self.domains):
            small = np.array([[int(rule(j, a, b)) for b in dom] for a in dom], dtype=np.int64)
            out = sp.kron(out, sp.csr_matrix(small), format="csr")
        return out

    def tuples(self):
        return itertools.product(*self.domains)


def _subset(jset, mask):
    # bot is never a subset
    return jset is not None and (jset & ~mask) == 0


@dataclass
class FactorNorm:
    name: str
    norm: float
    bound: float

    @property
    def ok(self):
        return self.norm <= self.bound * (1 + 1e-9) + 1e-12


@dataclass
class DecompositionReport:
    s: tuple
    pivot: int
    value: complex
    h_enumerated: complex
    factors: list = field(default_factory=list)

    @property
    def error(self):
        return abs(self.value - self.h_enumerated)

    @property
    def norm_violations(self):
        return [f for f in self.factors if not f.ok]

    @property
    def passed(self):
        return self.error <= TOL and not self.norm_violations


class Chain:
    """Builds the factors for one profile ``s`` and pivot ``r``."""

    def __init__(self, data, s, pivot):
        rf = data.rf
        self.rf = rf
        self.d = rf.d
        self.s = tuple(int(v) for v in s)
        self.ell = sum(self.s)
        self.r = pivot
        self.pats = OddPatternSet(self.d).patterns
        self.phases: PhaseAssignment = data.phases
        self.n_free = rf.n_free
        self.nS = 1 << rf.n_free
        self.js = _JSpace(rf.n_free, self.s)
        self.size = rf.dim * self.nS * self.js.count
        if self.size > MAX_INDEX:
            raise CapacityError(f"{self.size} chain indices exceed {MAX_INDEX}")

    def index(self, a, S, j):
        return (a * self.nS + S) * self.js.count + j

    # blow-up matrices: identity on (a, S), a J-transition that depends on mask(a)
    def _blowup(self, rule_for_mask):
        blocks = {}
        rows, cols = [], []
        for a in range(self.rf.dim):
            mask = int(self.rf.masks[a])
            if mask not in blocks:
                blocks[mask] = rule_for_mask(mask).tocoo()
            blk = blocks[mask]
            for S in range(self.nS):
                base = self.index(a, S, 0)
                rows.append(base + blk.row)
                cols.append(base + blk.col)
        rows = np.concatenate(rows)
        cols = np.concatenate(cols)
        return sp.csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(self.size, self.size))

    def Q(self, i):
        pats, s = self.pats, self.s

        def rule_for(mask):
            def rule(j, row, col):
                b = pats[j]
                if b[i - 1]:
                    if not _subset(col, mask):
                        return False
                    if not any(b[:i - 1]):
                        return row is None and bin(col).count("1") == s[j]
                return row == col
            return self.js.per_pattern(rule)
        return self._blowup(rule_for)

    def Q_prime(self, i):
        pats, s, d = self.pats, self.s, self.d

        def rule_for(mask):
            def rule(j, row, col):
                b = pats[j]
                if b[i - 1]:
                    if not _subset(row, mask):
                        return False
                    if not any(b[i:d]):
                        return col is None and bin(row).count("1") == s[j]
                return row == col
            return self.js.per_pattern(rule)
        return self._blowup(rule_for)

    def _operator(self, mat, forward):
        nS, nJ = self.nS, self.js.count
        a, b = np.nonzero(mat)
        S = np.arange(nS)
        j = np.arange(nJ)
        pair = np.arange(len(a))
        P, SS, JJ = (x.ravel() for x in np.meshgrid(pair, S, j, indexing="ij"))
        ra, ca = a[P], b[P]
        masks = self.rf.masks
        if forward:
            # row (a, S, J) -> column (a', S xor mask(a), J)
            rS, cS = SS, SS ^ masks[ra]
        else:
            # row (a, S' xor mask(a'), J) <- column (a', S', J)
            cS, rS = SS, SS ^ masks[ca]
        vals = mat[ra, ca]
        rows = (ra * nS + rS) * nJ + JJ
        cols = (ca * nS + cS) * nJ + JJ
        return sp.csr_matrix((vals, (rows, cols)), shape=(self.size, self.size))

    def R(self, i):
        return self._operator(self.rf.matrices[i - 1], forward=True)

    def R_prime(self, i):
        return self._operator(self.rf.matrices[i - 1], forward=False)

    def W(self):
        pats, r, d = self.pats, self.r, self.d
        pairs = []
        for row in self.js.tuples():
            for col in self.js.tuples():
                union = 0
                ok = True
                for k, b in enumerate(pats):
                    jr, jc = row[k], col[k]
                    if not any(b[:r]):
                        ok = jr is None and jc is not None
                        union |= jc or 0
                    elif not any(b[r - 1:d]):
                        ok = jc is None and jr is not None
                        union |= jr or 0
                    else:
                        ok = jr is not None and jr == jc
                        union |= jr or 0
                    if not ok:
                        break
                if ok and bin(union).count("1") == self.ell:
                    pairs.append((self._jindex(row), self._jindex(col), union))
        rows, cols, vals = [], [], []
        dim, nS, nJ = self.rf.dim, self.nS, self.js.count
        for jr, jc, union in pairs:
            a = np.repeat(np.arange(dim), nS)
            S = np.tile(np.arange(nS), dim)
            S2 = S ^ self.rf.masks[a] ^ union
            rows.append((a * nS + S) * nJ + jr)
            cols.append((a * nS + S2) * nJ + jc)
            vals.append(np.full(len(a), self.phases[union]))
        if not pairs:
            return sp.csr_matrix((self.size, self.size), dtype=complex)
        return sp.csr_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(self.size, self.size)
        )

    def _jindex(self, tup):
        idx = 0
        for dom, val in zip(self.js.domains, tup):
            idx = idx * len(dom) + dom.index(val)
        return idx

    def pad(self, vec):
        out = np.zeros(self.size, dtype=complex)
        out[self.index(np.arange(self.rf.dim), 0, 0)] = vec
        return out

    def factors(self):
        """Named factors in left-to-right order."""
        out = []
        for i in range(1, self.r):
            out += [(f"Q_{i}", self.Q(i)), (f"R_{i}", self.R(i))]
        out += [(f"Q_{self.r}", self.Q(self.r)), ("W", self.W()), (f"Q'_{self.r}", self.Q_prime(self.r))]
        for i in range(self.r + 1, self.d + 1):
            out += [(f"R'_{i - 1}", self.R_prime(i - 1)), (f"Q'_{i}", self.Q_prime(i))]
        return out

    def bound(self, name):
        pats, s, r, t, nf = self.pats, self.s, self.r, self.rf.t, self.n_free
        if name.startswith("R"):
            return 1.0
        if name == "W":
            low = math.prod(math.comb(nf, v) for b, v in zip(pats, s) if not any(b[:r]))
            high = math.prod(math.comb(nf, v) for b, v in zip(pats, s) if not any(b[r - 1:]))
            return math.sqrt(low * high)
        i = int(name.split("_")[1])
        if name.startswith("Q'"):
            sel = [v for b, v in zip(pats, s) if b[i - 1] and not any(b[i:])]
        else:
            sel = [v for b, v in zip(pats, s) if b[i - 1] and not any(b[:i - 1])]
        return math.sqrt(math.prod(math.comb(t, v) for v in sel))


def operator_norm(mat) -> float:
    """Exact spectral norm via dense SVD of each connected block.

    Blocks with a single row or column are vectors and need no SVD.
    """
    coo = sp.coo_matrix(mat)
    keep = coo.data != 0
    row, col, val = coo.row[keep], coo.col[keep], coo.data[keep]
    if len(val) == 0:
        return 0.0
    nrows = coo.shape[0]
    graph = sp.coo_matrix((np.ones(len(val)), (row, nrows + col)), shape=(nrows + coo.shape[1],) * 2)
    _, labels = connected_components(graph, directed=False)
    comp = labels[row]
    _, comp = np.unique(comp, return_inverse=True)
    ncomp = comp.max() + 1
    row_count = np.bincount(comp[np.unique(row, return_index=True)[1]], minlength=ncomp)
    col_count = np.bincount(comp[np.unique(col, return_index=True)[1]], minlength=ncomp)
    mass = np.bincount(comp, weights=np.abs(val) ** 2, minlength=ncomp)
    vector = (row_count == 1) | (col_count == 1)
    best = float(np.sqrt(np.max(mass[vector], initial=0.0)))
    order = np.argsort(comp, kind="stable")
    bounds = np.searchsorted(comp[order], np.arange(ncomp + 1))
    for c in np.flatnonzero(~vector):
        sel = order[bounds[c]:bounds[c + 1]]
        ru, ri = np.unique(row[sel], return_inverse=True)
        cu, ci = np.unique(col[sel], return_inverse=True)
        block = np.zeros((len(ru), len(cu)), dtype=val.dtype)
        np.add.at(block, (ri, ci), val[sel])
        best = max(best, float(np.linalg.norm(block, 2)))
    return best


def check_guard(rf):
    if rf.n_free > GUARD["n_free"] or rf.t > GUARD["t"] or rf.d > GUARD["d"] or rf.dim // rf.form.n**rf.t > GUARD["m"]:
        raise CapacityError(f"decomposition is limited to {GUARD}")


def decomposition_h(form: BilinearForm, rho: Restriction | None, s, pivot=None, data=None, norms=True):
    """Evaluate ``u^dag Q_1 R_1 ... Q_r W Q'_r ... Q'_d v`` for profile ``s``."""
    data = data or profile_data(form, rho)
    check_guard(data.rf)
    d = data.rf.d
    s = tuple(int(v) for v in s)
    if len(s) != 1 << (d - 1):
        raise DomainError(f"profile needs {1 << (d - 1)} entries")
    ell = sum(s)
    pivot = optimal_pivot(d, ell, s) if pivot is None else int(pivot)
    if not 1 <= pivot <= d:
        raise DomainError(f"pivot must lie in 1..{d}")
    chain = Chain(data, s, pivot)
    factors = chain.factors()
    vec = chain.pad(data.rf.v)
    for _, mat in reversed(factors):
        vec = mat @ vec
    # the chain starts from u-bar^dag with u-bar = conj(u~)
    value = complex(np.dot(chain.pad(data.rf.u), vec))
    enumerated = h_profiles(form, rho, ell, method="enumerate", data=data)[s]
    report = DecompositionReport(s, pivot, value, complex(enumerated))
    if norms:
        for name, mat in factors:
            report.factors.append(FactorNorm(name, operator_norm(mat), chain.bound(name)))
    return report
