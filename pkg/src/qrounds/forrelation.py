"""k-fold Forrelation: the polynomial, promise labels and a query algorithm."""
from __future__ import annotations

import enum
import itertools
import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, SamplingError, ValidationError
from .fourier import fwht
from .query import ParallelQueryAlgorithm, make_rng


def hadamard_matrix(m):
    """Orthonormal ``2^m x 2^m`` Hadamard matrix, ``(-1)^<i,j> / sqrt(n)``."""
    n = 1 << m
    idx = np.arange(n, dtype=np.uint64)
    parity = np.bitwise_count(idx[:, None] & idx[None, :]) & 1
    return (1 - 2 * parity.astype(float)) / math.sqrt(n)


def apply_hadamard(vec):
    """``H v`` in ``O(n log n)``."""
    return fwht(vec) / math.sqrt(len(vec))


def delta(k):
    return 2.0 ** (-5 * k)


class PromiseLabel(enum.Enum):
    YES = "YES"
    NO = "NO"
    OUTSIDE = "OUTSIDE"


@dataclass(frozen=True)
class ForrelationInstance:
    k: int
    m: int
    tables: tuple

    def __post_init__(self):
        if self.k < 2:
            raise DomainError("k-fold Forrelation needs k >= 2")
        if self.m < 0:
            raise DomainError("m must be non-negative")
        tables = tuple(tuple(int(v) for v in table) for table in self.tables)
        if len(tables) != self.k:
            raise ValidationError(f"expected {self.k} tables, got {len(tables)}")
        for table in tables:
            if len(table) != self.n:
                raise ValidationError(f"table length {len(table)} != n = {self.n}")
            if any(v not in (1, -1) for v in table):
                raise ValidationError("tables must be +-1 valued")
        object.__setattr__(self, "tables", tables)

    @property
    def n(self):
        return 1 << self.m

    def concatenated(self):
        """The ``kn``-bit input ``(x_1, ..., x_k)`` read by the algorithm."""
        return np.concatenate([np.asarray(t) for t in self.tables])

    @classmethod
    def from_input(cls, k, m, x):
        x = np.asarray(x)
        n = 1 << m
        return cls(k, m, tuple(tuple(x[j * n:(j + 1) * n]) for j in range(k)))

    def to_json(self):
        return json.dumps({"k": self.k, "m": self.m, "tables": [list(t) for t in self.tables]})

    @classmethod
    def from_json(cls, text):
        obj = json.loads(text)
        return cls(int(obj["k"]), int(obj["m"]), tuple(tuple(t) for t in obj["tables"]))


def eval_forr(inst: ForrelationInstance) -> float:
    """``(1/n) x_1^T H X_2 H ... X_{k-1} H x_k`` by a chain of fast transforms."""
    tables = [np.asarray(t, dtype=float) for t in inst.tables]
    vec = tables[-1]
    for table in reversed(tables[:-1]):
        vec = table * apply_hadamard(vec)
    return float(np.sum(vec) / inst.n)


def forr_polynomial(k, m):
    """Vectorized ``forr_k`` on batches of ``kn``-bit inputs, shape ``(B, kn)``."""
    n = 1 << m
    h = hadamard_matrix(m)

    def evaluate(xs):
        xs = np.asarray(xs, dtype=float)
        vec = xs[:, (k - 1) * n:]
        for j in range(k - 2, -1, -1):
            vec = xs[:, j * n:(j + 1) * n] * (vec @ h.T)
        return vec.sum(axis=1) / n

    return evaluate


def label_value(value, k) -> PromiseLabel:
    dlt = delta(k)
    if value >= dlt:
        return PromiseLabel.YES
    if abs(value) <= dlt / 2:
        return PromiseLabel.NO
    return PromiseLabel.OUTSIDE


def label_instance(inst: ForrelationInstance) -> PromiseLabel:
    return label_value(eval_forr(inst), inst.k)


def sample_promise_instance(k, m, want, seed, max_tries=10_000) -> ForrelationInstance:
    """Rejection sampler for YES or NO instances.

    NO: uniform tables.  YES: a Gaussian vector ``g``, with ``x_1 = sign(g)``
    and each later table the sign of the Hadamard image of the previous
    continuous vector.
    """
    want = PromiseLabel(want)
    if want is PromiseLabel.OUTSIDE:
        raise DomainError("only YES and NO instances can be sampled")
    rng = make_rng(seed)
    n = 1 << m
    for _ in range(max_tries):
        if want is PromiseLabel.NO:
            tables = rng.choice([-1, 1], size=(k, n))
        else:
            vec = rng.standard_normal(n)
            rows = []
            for _ in range(k):
                rows.append(np.where(vec >= 0, 1, -1))
                vec = apply_hadamard(vec)
            tables = np.array(rows)
        inst = ForrelationInstance(k, m, tuple(map(tuple, tables)))
        if label_instance(inst) is want:
            return inst
    raise SamplingError(f"no {want.value} instance in {max_tries} tries (acceptance rate 0/{max_tries})")


def _swap_permutation(dim, pairs):
    perm = np.arange(dim)
    for a, b in pairs:
        perm[a], perm[b] = b, a
    return np.eye(dim)[perm]


def forr_algorithm(k, m) -> ParallelQueryAlgorithm:
    """``ceil(k/2)``-round, one-query-per-round algorithm accepting w.p. ``(1+forr_k)/2``.

    A control qubit splits two branches that build
    ``|L> = X_r H ... H X_1 |u>`` and ``|R> = H X_{r+1} H ... H X_k |u>`` with
    ``|u>`` uniform, so that ``<L|R> = forr_k``.  Each round the unitaries swap
    each branch's data register into the query register at the block of the
    table it needs, or leave it parked on query value 0.  Measuring the
    control in ``|+>`` accepts with probability ``(1 + Re<L|R>)/2``.

    Workspace: ``m`` data qubits and one control qubit, ``alpha = c n + d``.
    """
    if k < 2:
        raise DomainError("k must be >= 2")
    n = 1 << m
    total = k * n
    r = (k + 1) // 2
    w = m + 1
    work = 2 * n
    dim = (total + 1) * work

    def idx(q, c, data):
        return q * work + c * n + data

    def table_for(branch, rnd):
        if branch == 0:
            return rnd
        return k + 1 - rnd if rnd <= k - r else None

    def load(rnd):
        pairs = []
        for c in (0, 1):
            tau = table_for(c, rnd)
            if tau is None:
                continue
            for i in range(n):
                pairs.append((idx(0, c, i), idx((tau - 1) * n + i + 1, c, 0)))
        return _swap_permutation(dim, pairs)

    h = np.array([[1.0]])
    for _ in range(m):
        h = np.kron(h, np.array([[1, 1], [1, -1]]) / math.sqrt(2))

    def data_hadamard(branches):
        op = np.eye(dim)
        for c in branches:
            sl = slice(idx(0, c, 0), idx(0, c, 0) + n)
            op[sl, sl] = h
        return op

    def queried(branch, rnd):
        return table_for(branch, rnd) is not None

    start = np.zeros(dim)
    uniform = np.full(n, 1 / math.sqrt(n))
    for c in (0, 1):
        start[idx(0, c, 0):idx(0, c, 0) + n] = uniform / math.sqrt(2)
    psi = load(1) @ start

    unitaries = []
    for rnd in range(1, r):
        branches = [0] + ([1] if queried(1, rnd) else [])
        unitaries.append(load(rnd + 1) @ data_hadamard(branches) @ load(rnd).T)

    post = data_hadamard([1] if queried(1, r) else [])
    unload = post @ load(r).T
    # projector onto |0>_q |+>_c (x) I_data, pulled back through the unload
    accept = np.zeros((dim, n))
    for data in range(n):
        accept[idx(0, 0, data), data] = accept[idx(0, 1, data), data] = 1 / math.sqrt(2)
    basis = unload.T @ accept
    measurement = basis @ basis.T
    return ParallelQueryAlgorithm(total, 1, r, w, psi, tuple(unitaries), measurement)


def enumerate_instances(k, m):
    """Every instance at ``(k, m)``; only sensible for tiny ``kn``."""
    n = 1 << m
    for bits in itertools.product((1, -1), repeat=k * n):
        yield ForrelationInstance.from_input(k, m, bits)
