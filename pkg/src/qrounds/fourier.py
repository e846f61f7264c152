"""Functions on the Boolean hypercube and their Fourier spectra.

Tables are indexed by integers whose bit ``i`` encodes variable ``x_i``:
bit 0 means ``x_i = +1`` and bit 1 means ``x_i = -1``.  Spectra use the same
layout, bit ``i`` of the index marking ``i in S``.  With this convention the
Fourier transform is the plain Walsh-Hadamard butterfly.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import CapacityError, DomainError, ValidationError, capacity

MAX_VARS = 24


def max_vars():
    return capacity("MAX_VARS", MAX_VARS)


def _check_capacity(n):
    if n > max_vars():
        raise CapacityError(f"{n} variables exceeds the table limit of {max_vars()}")


def _frozen(values):
    arr = np.array(values, dtype=complex)
    arr.setflags(write=False)
    return arr


def popcounts(n):
    """Hamming weights of ``0 .. 2**n - 1``."""
    return np.bitwise_count(np.arange(1 << n, dtype=np.uint64)).astype(np.int64)


def all_assignments(n):
    """All points of ``{-1,+1}^n`` in table order, shape ``(2**n, n)``."""
    idx = np.arange(1 << n, dtype=np.int64)
    bits = (idx[:, None] >> np.arange(n, dtype=np.int64)) & 1
    return (1 - 2 * bits).astype(np.int8)


def assignment_index(x):
    """Table index of a single +-1 assignment."""
    x = np.asarray(x)
    return int(np.sum((x < 0).astype(np.int64) << np.arange(len(x), dtype=np.int64)))


@dataclass(frozen=True)
class BooleanFunction:
    """A complex-valued function on ``{-1,+1}^n`` stored as its full table."""

    n: int
    values: np.ndarray

    def __post_init__(self):
        if self.n < 0:
            raise DomainError("n must be non-negative")
        _check_capacity(self.n)
        vals = _frozen(self.values)
        if vals.shape != (1 << self.n,):
            raise ValidationError(f"table has shape {vals.shape}, expected ({1 << self.n},)")
        object.__setattr__(self, "values", vals)

    def __call__(self, x):
        return self.values[assignment_index(x)]

    def is_probability(self, tol=1e-9):
        v = self.values
        return bool(np.all(np.abs(v.imag) <= tol) and np.all(v.real >= -tol) and np.all(v.real <= 1 + tol))

    def to_json(self):
        return json.dumps({"n": self.n, "values": [[float(z.real), float(z.imag)] for z in self.values]})

    @classmethod
    def from_json(cls, text):
        obj = json.loads(text)
        vals = np.array([complex(re, im) for re, im in obj["values"]])
        return cls(int(obj["n"]), vals)


@dataclass(frozen=True)
class FourierSpectrum:
    """Fourier coefficients indexed by subset masks."""

    n: int
    coefficients: np.ndarray

    def __post_init__(self):
        coeffs = _frozen(self.coefficients)
        if coeffs.shape != (1 << self.n,):
            raise ValidationError(f"spectrum has shape {coeffs.shape}, expected ({1 << self.n},)")
        object.__setattr__(self, "coefficients", coeffs)

    def __getitem__(self, subset):
        if isinstance(subset, (int, np.integer)):
            return self.coefficients[int(subset)]
        return self.coefficients[subset_mask(subset)]

    def level(self, ell):
        """Coefficients of the level-``ell`` subsets, with their masks."""
        if not 0 <= ell <= self.n:
            raise DomainError(f"level {ell} outside 0..{self.n}")
        masks = np.flatnonzero(popcounts(self.n) == ell)
        return masks, self.coefficients[masks]

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["subset_mask", "re", "im"])
        for mask, z in enumerate(self.coefficients):
            w.writerow([mask, repr(float(z.real)), repr(float(z.imag))])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text):
        rows = list(csv.reader(io.StringIO(text)))[1:]
        size = len(rows)
        n = size.bit_length() - 1
        if size != 1 << n:
            raise ValidationError(f"{size} rows is not a power of two")
        coeffs = np.zeros(size, dtype=complex)
        for mask, re, im in rows:
            coeffs[int(mask)] = complex(float(re), float(im))
        return cls(n, coeffs)


def subset_mask(subset):
    """Mask of a set of zero-based variable indices."""
    mask = 0
    for i in subset:
        mask |= 1 << int(i)
    return mask


def mask_subset(mask):
    return frozenset(i for i in range(int(mask).bit_length()) if mask >> i & 1)


def _butterfly(vals, n):
    # sequential strides, fixed addition order
    for h in range(n):
        v = vals.reshape(-1, 2, 1 << h)
        a = v[:, 0, :].copy()
        v[:, 0, :] += v[:, 1, :]
        v[:, 1, :] = a - v[:, 1, :]
    return vals


def fwht(values):
    """Unnormalized Walsh-Hadamard transform of a length ``2**n`` vector."""
    vals = np.array(values, dtype=np.result_type(np.asarray(values).dtype, float), copy=True)
    n = vals.shape[0].bit_length() - 1
    if vals.shape[0] != 1 << n:
        raise DomainError(f"length {vals.shape[0]} is not a power of two")
    return _butterfly(vals, n)


def wht(f: BooleanFunction) -> FourierSpectrum:
    """Fourier spectrum ``f^(S) = E_x[f(x) chi_S(x)]`` in ``O(2^n n)``."""
    _check_capacity(f.n)
    vals = np.array(f.values, dtype=complex, copy=True)
    _butterfly(vals, f.n)
    vals /= 1 << f.n
    return FourierSpectrum(f.n, vals)


def inverse_wht(spec: FourierSpectrum) -> BooleanFunction:
    _check_capacity(spec.n)
    vals = np.array(spec.coefficients, dtype=complex, copy=True)
    _butterfly(vals, spec.n)
    return BooleanFunction(spec.n, vals)


def level_l1_weight(spec: FourierSpectrum, ell: int) -> float:
    """``L_{1,ell}``: the sum of ``|f^(S)|`` over ``|S| = ell``."""
    _, coeffs = spec.level(ell)
    return float(np.sum(np.abs(coeffs)))


def level_l1_weights(spec: FourierSpectrum) -> np.ndarray:
    """``L_{1,ell}`` for every ``ell`` in ``0..n`` at once."""
    return np.bincount(popcounts(spec.n), weights=np.abs(spec.coefficients), minlength=spec.n + 1)


@dataclass(frozen=True)
class Restriction:
    """Partial assignment over ``[n]``; ``None`` marks a free position."""

    assignments: tuple

    def __post_init__(self):
        vals = tuple(None if a is None else int(a) for a in self.assignments)
        for a in vals:
            if a not in (None, 1, -1):
                raise DomainError(f"restriction entries must be +1, -1 or free, got {a!r}")
        object.__setattr__(self, "assignments", vals)

    @classmethod
    def free(cls, n):
        return cls((None,) * n)

    @classmethod
    def parse(cls, text):
        """Parse strings like ``"+*-*"``."""
        table = {"+": 1, "-": -1, "*": None}
        try:
            return cls(tuple(table[c] for c in text))
        except KeyError as exc:
            raise DomainError(f"bad restriction character {exc.args[0]!r}") from None

    def __len__(self):
        return len(self.assignments)

    def __str__(self):
        return "".join("*" if a is None else ("+" if a > 0 else "-") for a in self.assignments)

    @property
    def n(self):
        return len(self.assignments)

    @property
    def free_positions(self):
        return tuple(i for i, a in enumerate(self.assignments) if a is None)

    @property
    def n_free(self):
        return len(self.free_positions)

    def fixed_items(self):
        return [(i, a) for i, a in enumerate(self.assignments) if a is not None]

    def expand(self, x_free):
        """Full assignment agreeing with ``x_free`` on the free positions."""
        x_free = list(x_free)
        if len(x_free) != self.n_free:
            raise DomainError(f"expected {self.n_free} free values, got {len(x_free)}")
        it = iter(x_free)
        return tuple(next(it) if a is None else a for a in self.assignments)

    def prepend(self, *values):
        return Restriction(tuple(values) + self.assignments)


def restrict(f: BooleanFunction, rho: Restriction) -> BooleanFunction:
    """``f|_rho`` on the free variables, kept in their original order."""
    if rho.n != f.n:
        raise DomainError(f"restriction has length {rho.n}, function has {f.n} variables")
    if f.n == 0:
        return f
    arr = f.values.reshape((2,) * f.n)
    # axis j of the C-order reshape holds variable n-1-j
    index = [slice(None)] * f.n
    for i, a in rho.fixed_items():
        index[f.n - 1 - i] = 0 if a > 0 else 1
    return BooleanFunction(rho.n_free, arr[tuple(index)].reshape(-1))


def from_callable(fn, n):
    """Table of ``fn`` evaluated point by point on ``{-1,+1}^n``."""
    _check_capacity(n)
    xs = all_assignments(n)
    return BooleanFunction(n, np.array([complex(fn(tuple(int(v) for v in x))) for x in xs]))


def sign_table(n, subset):
    """The character ``chi_S`` as a table."""
    mask = subset_mask(subset) if not isinstance(subset, (int, np.integer)) else int(subset)
    idx = np.arange(1 << n, dtype=np.uint64)
    parity = np.bitwise_count(idx & np.uint64(mask)) & 1
    return BooleanFunction(n, 1 - 2 * parity.astype(float))


def phase(z):
    """``z/|z|`` with ``phase(0) = 1``."""
    z = np.asarray(z, dtype=complex)
    mag = np.abs(z)
    out = np.ones_like(z)
    nz = mag > 0
    out[nz] = z[nz] / mag[nz]
    return out


def direct_coefficients(f: BooleanFunction, masks: Sequence[int] | None = None):
    """Fourier coefficients by the ``O(4^n)`` expectation formula."""
    xs = all_assignments(f.n).astype(float)
    if masks is None:
        masks = range(1 << f.n)
    out = []
    for mask in masks:
        chi = np.ones(1 << f.n)
        for i in range(f.n):
            if mask >> i & 1:
                chi = chi * xs[:, i]
        out.append(np.mean(f.values * chi))
    return np.array(out)
