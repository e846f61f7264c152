"""Per-profile contributions ``g(s)`` and their controlled over-count ``h(s)``.

A form's value expands as a sum over index tuples ``(a_1, ..., a_d)`` of
``u~[a_1] M~_1[a_1, a_2] ... M~_{d-1}[a_{d-1}, a_d] v~[a_d]`` times the
character of ``xor I_1 xor ... xor I_d`` on the free variables.  Fixed
variables contribute signs, which are folded into the row side of each
``M~_i`` and into ``v~``; ``u~`` is ``conj(u)``.

Terms are grouped by the tuple of per-layer masks ``(S_1, ..., S_d)`` with
``S_i = xor I_i``, since ``L`` summed over a group only depends on these
masks.  This is the same sum as over ``A^d``, regrouped.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from ..errors import CapacityError, DomainError, ValidationError, capacity
from ..fourier import BooleanFunction, Restriction, all_assignments, level_l1_weight, wht
from ..query import BilinearForm, complex_gaussian, haar_unitary, spawn
from .pattern_matrix import binomial_table
from .patterns import OddPatternSet, profiles

MAX_TERMS = 10**8
PHASE_FLOOR = 1e-13


def max_terms():
    return capacity("MAX_TERMS", MAX_TERMS)


@dataclass(frozen=True)
class PhaseAssignment:
    """``a(S) = conj(f^(S)) / |f^(S)|``, and 1 where the coefficient vanishes."""

    n: int
    values: np.ndarray

    def __post_init__(self):
        vals = np.array(self.values, dtype=complex)
        if vals.shape != (1 << self.n,):
            raise ValidationError("one phase per subset mask is required")
        if np.max(np.abs(np.abs(vals) - 1), initial=0.0) > 1e-12:
            raise ValidationError("phases must have unit modulus")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_spectrum(cls, spec, floor=PHASE_FLOOR):
        coeffs = spec.coefficients
        mag = np.abs(coeffs)
        out = np.ones(len(coeffs), dtype=complex)
        big = mag > floor
        out[big] = np.conj(coeffs[big]) / mag[big]
        return cls(spec.n, out)

    def __getitem__(self, mask):
        return self.values[int(mask)]


@dataclass(frozen=True)
class RestrictedForm:
    """A form with a restriction folded in, in the layout used for counting.

    ``masks[a]`` is ``xor I_a`` over the free variables (bit ``p`` is the
    ``p``-th free variable) and ``signs[a]`` the product of fixed values.
    """

    form: BilinearForm
    rho: Restriction
    n_free: int
    masks: np.ndarray
    signs: np.ndarray
    u: np.ndarray
    v: np.ndarray
    matrices: tuple

    @property
    def d(self):
        return self.form.d

    @property
    def t(self):
        return self.form.t

    @property
    def dim(self):
        return self.form.dim

    def function(self) -> BooleanFunction:
        """The restricted function as a table over the free variables."""
        xs = all_assignments(self.n_free)
        full = np.ones((len(xs), self.form.n), dtype=np.int8)
        full[:, list(self.rho.free_positions)] = xs
        for i, a in self.rho.fixed_items():
            full[:, i] = a
        return BooleanFunction(self.n_free, self.form.values(full))


def combined_restriction(form: BilinearForm, rho: Restriction | None) -> Restriction:
    """Merge ``rho`` (over the unpinned variables) into the form's pinning."""
    free = form.pinned.free_positions
    if rho is None:
        return form.pinned
    if rho.n == form.n and form.pinned.n_free == form.n:
        return rho
    if rho.n != len(free):
        raise DomainError(f"restriction has length {rho.n}, the form has {len(free)} unpinned variables")
    vals = list(form.pinned.assignments)
    for pos, a in zip(free, rho.assignments):
        vals[pos] = a
    return Restriction(tuple(vals))


def restricted_form(form: BilinearForm, rho: Restriction | None = None) -> RestrictedForm:
    full = combined_restriction(form, rho)
    free = full.free_positions
    bit = np.zeros(form.n, dtype=np.int64)
    bit[list(free)] = 1 << np.arange(len(free), dtype=np.int64)
    value = np.ones(form.n)
    for i, a in full.fixed_items():
        value[i] = a
    digits = form.digits()
    masks = np.bitwise_xor.reduce(bit[digits], axis=1)
    signs = np.prod(value[digits], axis=1)
    u = np.conj(form.u)
    v = signs * form.v
    mats = tuple(signs[:, None] * mat for mat in form.matrices)
    return RestrictedForm(form, full, len(free), masks, signs, u, v, mats)


def _check_terms(rf: RestrictedForm):
    terms = float(rf.dim) ** rf.d
    if terms > max_terms():
        raise CapacityError(f"|A|^d = {terms:.3g} terms exceeds the guard of {max_terms():.3g}")


def mask_tensor(rf: RestrictedForm) -> np.ndarray:
    """``T[S_1, ..., S_d]``: the summed ``L`` without phase, per mask tuple."""
    _check_terms(rf)
    size = 1 << rf.n_free
    onehot = np.zeros((size, rf.dim))
    onehot[rf.masks, np.arange(rf.dim)] = 1
    # state[..., S_i, a_i]
    state = onehot * rf.u[None, :]
    for mat in rf.matrices:
        nxt = state @ mat
        state = nxt[..., None, :] * onehot
    return state @ rf.v


def _mask_combos(n_free, d):
    size = 1 << n_free
    grids = np.indices((size,) * d).reshape(d, -1).T
    return grids.astype(np.int64)


def cell_sizes(combos, d, n_free):
    """Per-combo Venn cell sizes, columns in pattern order."""
    full = (1 << n_free) - 1
    out = []
    for b in OddPatternSet(d):
        cell = np.full(len(combos), full, dtype=np.int64)
        for i, bit in enumerate(b):
            cell &= combos[:, i] if bit else ~combos[:, i]
        out.append(cell & full)
    cells = np.stack(out, axis=1)
    return cells, np.bitwise_count(cells.astype(np.uint64)).astype(np.int64)


@dataclass
class ProfileTable:
    """Values keyed by profile, in the stored profile order."""

    d: int
    ell: int
    profiles: tuple
    values: np.ndarray

    def as_dict(self):
        return {s: complex(v) for s, v in zip(self.profiles, self.values)}

    def __getitem__(self, s):
        return self.values[self.profiles.index(tuple(s))]


@dataclass
class ProfileData:
    """Everything the ``g``/``h`` computations share for one restricted form."""

    rf: RestrictedForm
    function: BooleanFunction
    phases: PhaseAssignment
    combos: np.ndarray
    totals: np.ndarray
    cells: np.ndarray
    sizes: np.ndarray
    weights: np.ndarray


def profile_data(form: BilinearForm, rho: Restriction | None = None) -> ProfileData:
    rf = restricted_form(form, rho)
    func = rf.function()
    phases = PhaseAssignment.from_spectrum(wht(func))
    tensor = mask_tensor(rf).reshape(-1)
    combos = _mask_combos(rf.n_free, rf.d)
    keep = np.flatnonzero(tensor != 0)
    combos = combos[keep]
    totals = np.bitwise_xor.reduce(combos, axis=1)
    cells, sizes = cell_sizes(combos, rf.d, rf.n_free)
    weights = phases.values[totals] * tensor[keep]
    return ProfileData(rf, func, phases, combos, totals, cells, sizes, weights)


def _profile_codes(sizes, ell):
    base = ell + 1
    return sizes @ (base ** np.arange(sizes.shape[1] - 1, -1, -1, dtype=np.int64))


def g_profiles(form: BilinearForm, rho: Restriction | None, ell: int, data: ProfileData | None = None):
    """``g(s)`` for every profile of weight ``ell``, and the phases used."""
    data = data or profile_data(form, rho)
    d = data.rf.d
    profs = profiles(d, ell)
    arr = np.array(profs, dtype=np.int64).reshape(len(profs), -1)
    code_of = {int(c): k for k, c in enumerate(_profile_codes(arr, ell))}
    sel = popcounts_of(data.totals) == ell
    codes = _profile_codes(data.sizes[sel], ell)
    idx = np.array([code_of[int(c)] for c in codes], dtype=np.int64)
    vals = np.zeros(len(profs), dtype=complex)
    np.add.at(vals, idx, data.weights[sel])
    return ProfileTable(d, ell, profs, vals), data.phases


def popcounts_of(masks):
    return np.bitwise_count(np.asarray(masks, dtype=np.uint64)).astype(np.int64)


def telescoping_weights(sizes, s, d):
    """``prod_b C(sum_{b'>=b} |I^(b')| - sum_{b'>b} s^(b'), s^(b))`` per combo."""
    above = OddPatternSet(d).above()
    s = np.asarray(s, dtype=np.int64)
    top = sizes @ above - s @ (above - np.eye(len(s), dtype=np.int64))
    hi = max(int(np.max(top, initial=0)), int(np.max(s, initial=0)))
    table = binomial_table(hi)
    out = np.ones(len(sizes), dtype=np.int64)
    for j, k in enumerate(s):
        col = top[:, j]
        out *= np.where(col >= k, table[np.clip(col, 0, hi), k], 0)
    return out


def count_families(cells, s, d, n_free):
    """Literal count of disjoint ``J^(b)`` with ``|J^(b)| = s^(b)`` inside ``U_{b'>=b} I^(b')``."""
    pats = OddPatternSet(d).patterns
    allowed = []
    for j, b in enumerate(pats):
        region = 0
        for jj, b2 in enumerate(pats):
            if all(x >= y for x, y in zip(b2, b)):
                region |= int(cells[jj])
        allowed.append([sum(1 << e for e in c) for c in itertools.combinations(_bits(region), s[j])])
    count = 0
    for choice in itertools.product(*allowed):
        used = 0
        ok = True
        for m in choice:
            if used & m:
                ok = False
                break
            used |= m
        count += ok
    return count


def _bits(mask):
    return [i for i in range(int(mask).bit_length()) if mask >> i & 1]


def h_profiles(form: BilinearForm, rho: Restriction | None, ell: int, method="closed", data: ProfileData | None = None):
    """``h(s)`` for every profile of weight ``ell``.

    ``method="closed"`` weights each term by the telescoping product of
    binomials; ``method="enumerate"`` counts the ``J`` families one by one.
    """
    data = data or profile_data(form, rho)
    d, n_free = data.rf.d, data.rf.n_free
    profs = profiles(d, ell)
    sel = popcounts_of(data.totals) == ell
    sizes, cells, weights = data.sizes[sel], data.cells[sel], data.weights[sel]
    vals = np.zeros(len(profs), dtype=complex)
    if method == "closed":
        for k, s in enumerate(profs):
            vals[k] = np.sum(telescoping_weights(sizes, s, d) * weights)
    elif method == "enumerate":
        cache = {}
        for k, s in enumerate(profs):
            total = 0j
            for row, wgt in zip(cells, weights):
                key = (tuple(int(c) for c in row), s)
                if key not in cache:
                    cache[key] = count_families(row, s, d, n_free)
                total += cache[key] * wgt
            vals[k] = total
    else:
        raise DomainError(f"unknown method {method!r}")
    return ProfileTable(d, ell, profs, vals)


def random_contraction(dim, rng):
    """``U diag(sigma) V`` with Haar ``U, V`` and ``sigma`` uniform in [0, 1]."""
    left = haar_unitary(dim, rng)
    right = haar_unitary(dim, rng)
    return (left * rng.uniform(0.0, 1.0, dim)[None, :]) @ right


def random_form(n, t, m, d, seed) -> BilinearForm:
    """Unit ``u, v`` and ``d - 1`` contractions, all from independent streams."""
    if d < 2:
        raise DomainError("d must be >= 2")
    dim = n**t * m
    streams = spawn(seed, d + 1)
    u = complex_gaussian(streams[0], dim)
    v = complex_gaussian(streams[1], dim)
    mats = tuple(random_contraction(dim, streams[2 + i]) for i in range(d - 1))
    return BilinearForm(n, t, m, u / np.linalg.norm(u), v / np.linalg.norm(v), mats)


def random_restriction(n, n_free, rng) -> Restriction:
    """Uniform restriction leaving exactly ``n_free`` positions free."""
    free = set(rng.choice(n, size=n_free, replace=False).tolist())
    return Restriction(tuple(None if i in free else int(rng.choice([-1, 1])) for i in range(n)))


def l1_weight(form: BilinearForm, rho: Restriction | None, ell: int) -> float:
    return level_l1_weight(wht(restricted_form(form, rho).function()), ell)
