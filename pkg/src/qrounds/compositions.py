"""Majority-composed Forrelation for tightness, and classical preprocessing trees."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, ValidationError
from .fourier import BooleanFunction, Restriction, _check_capacity, level_l1_weight, wht
from .forrelation import hadamard_matrix
from .growth.bounds import explicit_growth_bound
from .query import ParallelQueryAlgorithm, acceptance_table, make_rng, random_algorithm


def majority(s) -> BooleanFunction:
    """``Maj_s`` as a +-1 table; +1 when most inputs are +1."""
    if s < 1 or s % 2 == 0:
        raise DomainError("majority needs an odd arity")
    idx = np.arange(1 << s, dtype=np.uint64)
    minus = np.bitwise_count(idx).astype(np.int64)
    return BooleanFunction(s, np.where(2 * minus < s, 1.0, -1.0))


@dataclass(frozen=True)
class MajorityGadget:
    s: int

    def __post_init__(self):
        if self.s < 1 or self.s % 2 == 0:
            raise DomainError("majority needs an odd arity")

    def function(self):
        return majority(self.s)

    def level1_coefficient(self):
        """Each bit's influence, ``C(s-1, (s-1)/2) / 2^{s-1}``."""
        return math.comb(self.s - 1, (self.s - 1) // 2) / 2 ** (self.s - 1)

    def level1_weight(self):
        return self.s * self.level1_coefficient()


def _bits(idx, positions):
    # +-1 values of the given variables for each table index
    out = (idx[:, None] >> positions[None, :].astype(np.uint64)) & np.uint64(1)
    return 1.0 - 2.0 * out.astype(float)


def forr2_maj_xor(m, s, L, chunk=1 << 16) -> BooleanFunction:
    """``f'(z) = 1/2 + 1/2 prod_k forr_2(Maj_s(y^k))`` on ``2 s L n`` bits.

    Variable ``((k * 2 + a) * n + i) * s + j`` is input ``j`` of the majority
    feeding entry ``i`` of table ``a`` in block ``k``.
    """
    if s < 1 or s % 2 == 0:
        raise DomainError("majority needs an odd arity")
    if L < 1 or m < 0:
        raise DomainError("need L >= 1 and m >= 0")
    n = 1 << m
    total = 2 * s * L * n
    _check_capacity(total)
    h = hadamard_matrix(m)
    out = np.empty(1 << total)
    for start in range(0, 1 << total, chunk):
        idx = np.arange(start, min(start + chunk, 1 << total), dtype=np.uint64)
        prod = np.ones(len(idx))
        for k in range(L):
            tables = []
            for a in range(2):
                pos = ((k * 2 + a) * n + np.arange(n))[:, None] * s + np.arange(s)[None, :]
                vals = _bits(idx, pos.ravel()).reshape(len(idx), n, s)
                tables.append(np.sign(vals.sum(axis=2)))
            prod *= np.einsum("bi,ij,bj->b", tables[0], h, tables[1]) / n
        out[start:start + len(idx)] = 0.5 + 0.5 * prod
    return BooleanFunction(total, out)


@dataclass
class TightnessReport:
    m: int
    s: int
    L: int
    ell: int
    measured: float
    predicted: float
    forr2_level2: float
    maj_level1: float
    target: float
    tol: float = 1e-9

    @property
    def error(self):
        return abs(self.measured - self.predicted)

    @property
    def passed(self):
        return self.error <= self.tol


def tightness_check(m, s, L, tol=1e-9) -> TightnessReport:
    """Compare the level-``2L`` weight of ``f'`` with the product of its factors."""
    n = 1 << m
    ell = 2 * L
    measured = level_l1_weight(wht(forr2_maj_xor(m, s, L)), ell)
    maj = level_l1_weight(wht(majority(s)), 1)
    # sqrt(n) is the level-2 weight of forr_2
    predicted = 0.5 * (math.sqrt(n) * maj**2) ** L
    t = s * L
    target = n ** (ell / 4) * t ** (ell / 4)
    return TightnessReport(m, s, L, ell, measured, predicted, math.sqrt(n), maj, target, tol)


@dataclass(frozen=True)
class Leaf:
    assignment: Restriction
    algorithm: ParallelQueryAlgorithm
    ref: str | None = None


@dataclass(frozen=True)
class Node:
    var: int
    plus: object
    minus: object


@dataclass(frozen=True)
class DecisionTree:
    """Classical queries at internal nodes, a quantum algorithm at each leaf."""

    n: int
    root: object

    def __post_init__(self):
        leaves = self.leaves()
        if not leaves:
            raise ValidationError("tree has no leaves")
        shape = {(leaf.algorithm.n, leaf.algorithm.t, leaf.algorithm.r) for _, leaf in leaves}
        if len(shape) != 1:
            raise ValidationError(f"leaf algorithms disagree on (n, t, r): {sorted(shape)}")
        if next(iter(shape))[0] != self.n:
            raise ValidationError("leaf algorithms must read all n input bits")
        for path, leaf in leaves:
            if leaf.assignment.n != self.n:
                raise ValidationError("leaf assignment has the wrong length")
            expect = [None] * self.n
            for var, val in path:
                if not 0 <= var < self.n:
                    raise ValidationError(f"variable {var} out of range")
                if expect[var] is not None:
                    raise ValidationError(f"variable {var} queried twice on one path")
                expect[var] = val
            if tuple(expect) != leaf.assignment.assignments:
                raise ValidationError(f"leaf assignment {leaf.assignment} does not match its path")

    def leaves(self):
        """``(path, leaf)`` pairs; a path lists ``(var, value)`` from the root."""
        out = []
        stack = [((), self.root)]
        while stack:
            path, node = stack.pop()
            if isinstance(node, Leaf):
                out.append((path, node))
            else:
                stack.append((path + ((node.var, -1),), node.minus))
                stack.append((path + ((node.var, 1),), node.plus))
        return out

    @property
    def depth(self):
        return max(len(path) for path, _ in self.leaves())

    @property
    def shape(self):
        alg = self.leaves()[0][1].algorithm
        return alg.n, alg.t, alg.r

    def to_dict(self, inline=True):
        nodes, leaves, refs = [], [], {}

        def visit(node):
            if isinstance(node, Leaf):
                entry = {"id": f"L{len(leaves)}", "assignment": str(node.assignment)}
                if inline or node.ref is None:
                    entry["algorithm"] = node.algorithm.to_dict()
                else:
                    entry["algorithm_ref"] = node.ref
                    refs[node.ref] = node.algorithm
                leaves.append(entry)
                return entry["id"]
            entry = {"id": f"N{len(nodes)}", "var": node.var}
            nodes.append(entry)
            entry["plus"] = visit(node.plus)
            entry["minus"] = visit(node.minus)
            return entry["id"]

        root = visit(self.root)
        return {"n": self.n, "depth": self.depth, "root": root, "nodes": nodes, "leaves": leaves}

    def to_json(self, inline=True):
        return json.dumps(self.to_dict(inline))

    @classmethod
    def from_dict(cls, obj, algorithms=None):
        algorithms = algorithms or {}
        nodes = {e["id"]: e for e in obj.get("nodes", [])}
        leaves = {e["id"]: e for e in obj.get("leaves", [])}

        def build(key):
            if key in leaves:
                e = leaves[key]
                if "algorithm" in e:
                    alg, ref = ParallelQueryAlgorithm.from_dict(e["algorithm"]), None
                else:
                    ref = e["algorithm_ref"]
                    if ref not in algorithms:
                        raise ValidationError(f"unknown algorithm reference {ref!r}")
                    alg = algorithms[ref]
                return Leaf(Restriction.parse(e["assignment"]), alg, ref)
            if key not in nodes:
                raise ValidationError(f"dangling tree reference {key!r}")
            e = nodes[key]
            return Node(int(e["var"]), build(e["plus"]), build(e["minus"]))

        tree = cls(int(obj["n"]), build(obj["root"]))
        if "depth" in obj and int(obj["depth"]) != tree.depth:
            raise ValidationError(f"declared depth {obj['depth']} != actual depth {tree.depth}")
        return tree

    @classmethod
    def from_json(cls, text, algorithms=None):
        return cls.from_dict(json.loads(text), algorithms)


def constant_algorithm(n, t, r, w, p=1.0) -> ParallelQueryAlgorithm:
    """Accepts every input with probability ``p``."""
    dim = (n + 1) ** t * (1 << w)
    psi = np.zeros(dim)
    psi[0] = 1
    eye = np.eye(dim)
    return ParallelQueryAlgorithm(n, t, r, w, psi, (eye,) * (r - 1), p * eye)


def random_tree(n, depth, t, r, w, seed, leaf_factory=None, stop_prob=0.0) -> DecisionTree:
    """Random tree of depth at most ``depth`` with random leaf algorithms.

    Each internal node queries a fresh variable; branches stop early with
    probability ``stop_prob``.
    """
    if depth > n:
        raise DomainError("depth cannot exceed n")
    root_seq = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    tree_seq, leaf_seq = root_seq.spawn(2)
    rng = make_rng(tree_seq)
    counter = [0]

    def make_leaf(path):
        vals = [None] * n
        for var, val in path:
            vals[var] = val
        counter[0] += 1
        if leaf_factory is None:
            alg = random_algorithm(n, t, r, w, seed=leaf_seq.spawn(1)[0])
        else:
            alg = leaf_factory(counter[0])
        return Leaf(Restriction(tuple(vals)), alg)

    def grow(path, level):
        if level == depth or (level > 0 and rng.random() < stop_prob):
            return make_leaf(path)
        used = {var for var, _ in path}
        var = int(rng.choice([i for i in range(n) if i not in used]))
        return Node(var, grow(path + ((var, 1),), level + 1), grow(path + ((var, -1),), level + 1))

    return DecisionTree(n, grow((), 0))


def _leaf_membership(n, assignment):
    idx = np.arange(1 << n, dtype=np.int64)
    keep = np.ones(1 << n, dtype=bool)
    for var, val in assignment.fixed_items():
        bit = (idx >> var) & 1
        keep &= bit == (0 if val > 0 else 1)
    return keep


def preproc_compose(tree: DecisionTree) -> BooleanFunction:
    """``f(x)`` = acceptance of the leaf that ``x``'s classical path reaches."""
    _check_capacity(tree.n)
    out = np.full(1 << tree.n, np.nan)
    for _, leaf in tree.leaves():
        keep = _leaf_membership(tree.n, leaf.assignment)
        out[keep] = acceptance_table(leaf.algorithm).values.real[keep]
    if np.isnan(out).any():
        raise ValidationError("leaves do not cover every input")
    return BooleanFunction(tree.n, out)


@dataclass
class PreprocReport:
    ell: int
    depth: int
    measured: float
    bound: float
    terms: list = field(default_factory=list)

    @property
    def passed(self):
        return self.measured <= self.bound * (1 + 1e-12)


def preproc_bound(tree: DecisionTree, ell):
    """``sum_k dc^k max_leaf explicit_growth_bound(2r, ell - k, t, n - |path|)``."""
    n, t, r = tree.shape
    dc = tree.depth
    terms = []
    for k in range(ell + 1):
        if dc**k == 0:
            # a depth-0 tree has no k > 0 terms; avoids 0 * inf
            terms.append(0.0)
            continue
        worst = max(explicit_growth_bound(2 * r, ell - k, t, n - len(path)) for path, _ in tree.leaves())
        terms.append(dc**k * worst)
    return sum(terms), terms


def preproc_bound_check(tree: DecisionTree, ell, func: BooleanFunction | None = None) -> PreprocReport:
    func = func or preproc_compose(tree)
    measured = level_l1_weight(wht(func), ell)
    bound, terms = preproc_bound(tree, ell)
    return PreprocReport(ell, tree.depth, measured, bound, terms)
