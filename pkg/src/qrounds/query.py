"""Exact simulation of quantum query algorithms with parallel queries.

An algorithm with ``r`` rounds of ``t`` parallel queries lives on the space
``{0..n}^t x [2^w]``.  A basis index ``a`` is laid out as
``((q_1 (n+1) + q_2) (n+1) + ... + q_t) 2^w + alpha``: query registers first,
most significant first, workspace last.  The oracle ``O_x`` fixes ``|0>`` and
multiplies ``|i>`` by ``x_i``; it is always applied as a diagonal of signs.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import CapacityError, DomainError, ValidationError, capacity
from .fourier import BooleanFunction, Restriction, _check_capacity, all_assignments

TOL = 1e-9
MAX_DIM = 4096


def max_dim():
    return capacity("MAX_DIM", MAX_DIM)


def query_digits(base, t, m):
    """Query-register values of every basis index, shape ``(base**t * m, t)``."""
    dim = base**t * m
    tuple_idx = np.arange(dim, dtype=np.int64) // m
    powers = base ** np.arange(t - 1, -1, -1, dtype=np.int64)
    return (tuple_idx[:, None] // powers[None, :]) % base


def oracle_diagonal(xs, digits):
    """Diagonal of ``O_x^{(x)t} (x) I`` for a batch of full assignments.

    ``xs`` has shape ``(B, base)``: column ``q`` is the sign applied to query
    value ``q`` (column 0 is +1 for algorithm oracles).
    """
    xs = np.asarray(xs, dtype=float)
    if xs.ndim == 1:
        xs = xs[None, :]
    return np.prod(xs[:, digits], axis=-1)


def _pad_zero(xs):
    xs = np.asarray(xs, dtype=float)
    if xs.ndim == 1:
        xs = xs[None, :]
    return np.hstack([np.ones((xs.shape[0], 1)), xs])


def _check_pm1(x, n):
    x = np.asarray(x)
    if x.shape[-1] != n:
        raise DomainError(f"assignment has {x.shape[-1]} bits, expected {n}")
    if not np.all(np.abs(x) == 1):
        raise DomainError("assignments must be +-1 valued")
    return x


def _opnorm(mat):
    return float(np.linalg.norm(mat, 2)) if mat.size else 0.0


def _unitarity_error(u):
    return float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))))


@dataclass(frozen=True)
class ParallelQueryAlgorithm:
    """Initial state, inter-round unitaries and a final measurement."""

    n: int
    t: int
    r: int
    w: int
    psi: np.ndarray
    unitaries: tuple
    measurement: np.ndarray
    validate: bool = field(default=True, compare=False, repr=False)

    def __post_init__(self):
        if self.n < 1 or self.t < 1 or self.r < 1 or self.w < 0:
            raise DomainError("need n, t, r >= 1 and w >= 0")
        psi = np.array(self.psi, dtype=complex)
        us = tuple(np.array(u, dtype=complex) for u in self.unitaries)
        meas = np.array(self.measurement, dtype=complex)
        dim = self.dim
        if psi.shape != (dim,):
            raise DomainError(f"psi has shape {psi.shape}, expected ({dim},)")
        if len(us) != self.r - 1:
            raise DomainError(f"{self.r} rounds need {self.r - 1} unitaries, got {len(us)}")
        for u in us + (meas,):
            if u.shape != (dim, dim):
                raise DomainError(f"operator has shape {u.shape}, expected ({dim}, {dim})")
        for arr in (psi, meas) + us:
            arr.setflags(write=False)
        object.__setattr__(self, "psi", psi)
        object.__setattr__(self, "unitaries", us)
        object.__setattr__(self, "measurement", meas)
        if self.validate:
            self.check()

    @property
    def dim(self):
        return (self.n + 1) ** self.t * (1 << self.w)

    def check(self, tol=TOL):
        norm = np.linalg.norm(self.psi)
        if abs(norm - 1) > tol:
            raise ValidationError(f"|psi| = {norm!r}, not a unit vector")
        for i, u in enumerate(self.unitaries, 1):
            err = _unitarity_error(u)
            if err > tol:
                raise ValidationError(f"U_{i} is not unitary (max |U^dag U - I| = {err:.3g})")
        meas = self.measurement
        herm = float(np.max(np.abs(meas - meas.conj().T)))
        if herm > tol:
            raise ValidationError(f"measurement is not Hermitian ({herm:.3g})")
        eig = np.linalg.eigvalsh((meas + meas.conj().T) / 2)
        if eig[0] < -tol:
            raise ValidationError(f"measurement is not PSD (min eigenvalue {eig[0]:.3g})")
        if eig[-1] > 1 + tol:
            raise ValidationError(f"measurement norm {eig[-1]:.12g} exceeds 1")

    def digits(self):
        return query_digits(self.n + 1, self.t, 1 << self.w)

    def to_dict(self):
        return {
            "n": self.n,
            "t": self.t,
            "r": self.r,
            "w": self.w,
            "psi": _encode_vector(self.psi),
            "unitaries": [_encode_matrix(u) for u in self.unitaries],
            "measurement": _encode_matrix(self.measurement),
        }

    def to_json(self):
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, obj):
        return cls(
            int(obj["n"]),
            int(obj["t"]),
            int(obj["r"]),
            int(obj["w"]),
            _decode_vector(obj["psi"]),
            tuple(_decode_matrix(u) for u in obj["unitaries"]),
            _decode_matrix(obj["measurement"]),
        )

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def _encode_vector(vec):
    return [[float(z.real), float(z.imag)] for z in vec]


def _encode_matrix(mat):
    return [_encode_vector(row) for row in mat]


def _decode_vector(rows):
    return np.array([complex(re, im) for re, im in rows], dtype=complex)


def _decode_matrix(rows):
    return np.array([[complex(re, im) for re, im in row] for row in rows], dtype=complex)


def _final_states(alg, xs):
    diag = oracle_diagonal(_pad_zero(xs), alg.digits())
    states = diag * alg.psi[None, :]
    for u in alg.unitaries:
        states = diag * (states @ u.T)
    return states


def simulate_accept_prob(alg: ParallelQueryAlgorithm, x) -> float:
    """``|sqrt(M) O U_{r-1} ... U_1 O psi|^2`` for one input."""
    x = _check_pm1(x, alg.n)
    state = _final_states(alg, x)[0]
    return float(np.real(np.vdot(state, alg.measurement @ state)))


def simulate_accept_probs(alg: ParallelQueryAlgorithm, xs) -> np.ndarray:
    """Acceptance probabilities for a batch of inputs, shape ``(B, n)``."""
    xs = _check_pm1(np.atleast_2d(xs), alg.n)
    states = _final_states(alg, xs)
    return np.real(np.einsum("bi,bi->b", states.conj(), states @ alg.measurement.T))


def acceptance_table(alg: ParallelQueryAlgorithm, batch=4096) -> BooleanFunction:
    """Acceptance probabilities on every input, in table order."""
    _check_capacity(alg.n)
    xs = all_assignments(alg.n)
    out = np.empty(len(xs))
    for start in range(0, len(xs), batch):
        states = _final_states(alg, xs[start:start + batch])
        out[start:start + batch] = np.real(np.einsum("bi,bi->b", states.conj(), states @ alg.measurement.T))
    return BooleanFunction(alg.n, out)


@dataclass(frozen=True)
class BilinearForm:
    """``u^dag (O_x^{(x)t} (x) I_m) M_1 ... M_{d-1} (O_x^{(x)t} (x) I_m) v``.

    Indices run over ``[n]^t x [m]`` with variables numbered ``0..n-1``.
    ``pinned`` optionally fixes some variables; algorithm-derived forms pin
    variable 0 (the oracle's ``|0>``) to +1.
    """

    n: int
    t: int
    m: int
    u: np.ndarray
    v: np.ndarray
    matrices: tuple
    pinned: Restriction | None = None
    validate: bool = field(default=True, compare=False, repr=False)

    def __post_init__(self):
        if self.n < 1 or self.t < 1 or self.m < 1:
            raise DomainError("need n, t, m >= 1")
        if len(self.matrices) < 1:
            raise DomainError("a form needs d >= 2, i.e. at least one matrix")
        dim = self.dim
        u = np.array(self.u, dtype=complex)
        v = np.array(self.v, dtype=complex)
        mats = tuple(np.array(mat, dtype=complex) for mat in self.matrices)
        if u.shape != (dim,) or v.shape != (dim,):
            raise DomainError(f"u, v must have shape ({dim},)")
        for mat in mats:
            if mat.shape != (dim, dim):
                raise DomainError(f"matrix shape {mat.shape}, expected ({dim}, {dim})")
        pinned = self.pinned if self.pinned is not None else Restriction.free(self.n)
        if pinned.n != self.n:
            raise DomainError("pinned restriction length must equal n")
        for arr in (u, v) + mats:
            arr.setflags(write=False)
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "matrices", mats)
        object.__setattr__(self, "pinned", pinned)
        if self.validate:
            self.check()

    @property
    def d(self):
        return len(self.matrices) + 1

    @property
    def dim(self):
        return self.n**self.t * self.m

    def check(self, tol=TOL):
        for name, vec in (("u", self.u), ("v", self.v)):
            if abs(np.linalg.norm(vec) - 1) > tol:
                raise ValidationError(f"|{name}| = {np.linalg.norm(vec)!r}, not a unit vector")
        for i, mat in enumerate(self.matrices, 1):
            s = _opnorm(mat)
            if s > 1 + tol:
                raise ValidationError(f"|M_{i}| = {s:.12g} exceeds 1")

    def digits(self):
        return query_digits(self.n, self.t, self.m)

    def full_assignment(self, x):
        x = np.asarray(x)
        if x.shape[-1] == self.n:
            return _check_pm1(x, self.n)
        if x.shape[-1] == self.pinned.n_free:
            return np.asarray(self.pinned.expand(_check_pm1(x, self.pinned.n_free)))
        raise DomainError(f"assignment has {x.shape[-1]} bits, expected {self.n} or {self.pinned.n_free}")

    def values(self, xs):
        """Values on a batch of full assignments of shape ``(B, n)``."""
        diag = oracle_diagonal(xs, self.digits())
        w = diag * self.v[None, :]
        for mat in reversed(self.matrices):
            w = diag * (w @ mat.T)
        return w @ self.u.conj()

    def table(self, restricted=True):
        """Truth table over all variables, or over the unpinned ones."""
        n = self.pinned.n_free if restricted else self.n
        _check_capacity(n)
        xs = all_assignments(n)
        if restricted:
            full = np.ones((len(xs), self.n), dtype=np.int8)
            full[:, list(self.pinned.free_positions)] = xs
            for i, a in self.pinned.fixed_items():
                full[:, i] = a
            xs = full
        return BooleanFunction(n, self.values(xs))


def eval_bilinear(form: BilinearForm, x) -> complex:
    """Value of the form at ``x``; ``x`` may omit the pinned variables."""
    full = form.full_assignment(x)
    return complex(form.values(full[None, :])[0])


def to_bilinear_form(alg: ParallelQueryAlgorithm) -> BilinearForm:
    """Rewrite ``x -> Pr[accept]`` as a ``2r``-layer bilinear form.

    The middle matrix is the measurement and the others mirror each other:
    ``U_1^dag, ..., U_{r-1}^dag, M, U_{r-1}, ..., U_1``.  Query value 0 becomes
    variable 0 of the form, pinned to +1.
    """
    left = [u.conj().T for u in alg.unitaries]
    mats = left + [alg.measurement] + [u for u in reversed(alg.unitaries)]
    pinned = Restriction((1,) + (None,) * alg.n)
    return BilinearForm(alg.n + 1, alg.t, 1 << alg.w, alg.psi, alg.psi, tuple(mats), pinned)


def truth_table(evaluate: Callable, n: int, vectorized=False) -> BooleanFunction:
    """Evaluate ``evaluate`` on all ``2**n`` assignments in index order."""
    _check_capacity(n)
    xs = all_assignments(n)
    if vectorized:
        return BooleanFunction(n, np.asarray(evaluate(xs), dtype=complex))
    return BooleanFunction(n, np.array([complex(evaluate(x)) for x in xs]))


def make_rng(seed):
    """Counter-based Philox generator; every stream in the package uses it."""
    if isinstance(seed, np.random.Generator):
        return seed
    if isinstance(seed, np.random.SeedSequence):
        return np.random.Generator(np.random.Philox(seed))
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))


def spawn(seed, count):
    """Independent child streams of ``seed`` (an int, SeedSequence or Generator)."""
    if isinstance(seed, np.random.Generator):
        return seed.spawn(count)
    seq = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    return [make_rng(child) for child in seq.spawn(count)]


def complex_gaussian(rng, shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def haar_unitary(dim, rng):
    """QR of a complex Gaussian matrix, with R's diagonal made positive."""
    q, r = np.linalg.qr(complex_gaussian(rng, (dim, dim)))
    diag = np.diag(r)
    return q * (diag / np.abs(diag))[None, :]


def random_algorithm(n, t, r, w, seed) -> ParallelQueryAlgorithm:
    dim = (n + 1) ** t * (1 << w)
    if dim > max_dim():
        raise CapacityError(f"state dimension {dim} exceeds {max_dim()}")
    streams = spawn(seed, r + 1)
    psi = complex_gaussian(streams[0], dim)
    psi /= np.linalg.norm(psi)
    us = tuple(haar_unitary(dim, streams[i]) for i in range(1, r))
    rng = streams[r]
    basis = haar_unitary(dim, rng)
    lam = rng.uniform(0.0, 1.0, dim)
    meas = (basis * lam[None, :]) @ basis.conj().T
    meas = (meas + meas.conj().T) / 2
    return ParallelQueryAlgorithm(n, t, r, w, psi, us, meas)


def oracle_matrix(x):
    """Dense ``O_x`` on ``{0..n}``; for tests and small checks only."""
    return np.diag(np.concatenate([[1.0], np.asarray(x, dtype=float)]))


def oracle_prime_matrix(x):
    """Dense ``O'_x`` on ``{0..n} x {+1,-1}``: ``|i>|b> -> |i>|b x_i>``.

    Value register index 0 holds ``b = +1`` and index 1 holds ``b = -1``.
    """
    x = np.concatenate([[1], np.asarray(x)])
    size = len(x)
    out = np.zeros((2 * size, 2 * size))
    for i, xi in enumerate(x):
        for b in (0, 1):
            out[2 * i + (b if xi > 0 else 1 - b), 2 * i + b] = 1
    return out


def controlled_oracle_matrix(x):
    """``O_x`` applied only when the value qubit is ``|1>``."""
    x = np.concatenate([[1.0], np.asarray(x, dtype=float)])
    diag = np.ones(2 * len(x))
    diag[1::2] = x
    return np.diag(diag)


def _ancilla_permutation(size):
    # |i,0,0> <-> |0,0,i> on {0..n} x {0,1} x {0..n}; identity elsewhere
    dim = size * 2 * size
    perm = np.arange(dim)

    def idx(q, c, anc):
        return (q * 2 + c) * size + anc

    for i in range(1, size):
        a, b = idx(i, 0, 0), idx(0, 0, i)
        perm[a], perm[b] = b, a
    return np.eye(dim)[perm]


@dataclass
class OracleEquivalenceReport:
    n: int
    inputs: int
    controlled_deviation: float
    ancilla_deviation: float
    leakage: float
    plain_tensor_obstructed: bool

    @property
    def max_deviation(self):
        return max(self.controlled_deviation, self.ancilla_deviation, self.leakage)


def oracle_pair_equivalence_check(n, trials=None, seed=0) -> OracleEquivalenceReport:
    """Exhibit fixed unitaries turning the phase oracle into ``O'_x``.

    Conjugating ``O'_x`` by a Hadamard on the value qubit gives the
    value-controlled ``O_x`` exactly.  That controlled oracle equals
    ``W^dag (O_x (x) I) W`` on the ancilla-zero block, with ``W`` a fixed
    permutation parking the uncontrolled branch on query value 0.  Without
    the ancilla, ``O_x (x) I_2`` cannot work: at ``x = 1^n`` the two unitaries
    must be mutually inverse, and the -1 eigenspaces then have different
    dimensions whenever some ``x_i = -1``.
    """
    size = n + 1
    if trials is None or (1 << n) <= trials:
        xs = all_assignments(n)
    else:
        xs = make_rng(seed).choice([-1, 1], size=(trials, n))
    had = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
    v2 = np.kron(np.eye(size), had)
    perm = _ancilla_permutation(size)
    lift = np.kron(v2, np.eye(size))
    big_v2 = perm @ lift
    big_v1 = big_v2.conj().T
    block = np.arange(2 * size) * size
    controlled_dev = ancilla_dev = leak = 0.0
    obstructed = False
    for x in xs:
        target = oracle_prime_matrix(x)
        controlled_dev = max(controlled_dev, float(np.max(np.abs(v2 @ controlled_oracle_matrix(x) @ v2 - target))))
        full = big_v1 @ np.kron(oracle_matrix(x), np.eye(2 * size)) @ big_v2
        ancilla_dev = max(ancilla_dev, float(np.max(np.abs(full[np.ix_(block, block)] - target))))
        mask = np.ones(full.shape[0], dtype=bool)
        mask[block] = False
        leak = max(leak, float(np.max(np.abs(full[np.ix_(mask, block)]), initial=0.0)))
        minus_prime = int(np.sum(np.linalg.eigvalsh(target) < 0))
        minus_plain = 2 * int(np.sum(np.asarray(x) < 0))
        obstructed |= minus_prime != minus_plain
    return OracleEquivalenceReport(n, len(xs), controlled_dev, ancilla_dev, leak, obstructed)
