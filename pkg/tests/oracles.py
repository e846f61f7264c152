"""Slow, independent reference implementations used by the tests."""
import itertools
import math

import numpy as np


def points(n):
    # table order: bit i of the index is 1 exactly when x_i = -1
    return [tuple(x[::-1]) for x in itertools.product((1, -1), repeat=n)]


def brute_coefficient(table, n, subset):
    total = 0.0
    for idx, x in enumerate(points(n)):
        total += table[idx] * math.prod(x[i] for i in subset)
    return total / 2**n


def brute_level_weight(table, n, ell):
    return sum(abs(brute_coefficient(table, n, s)) for s in itertools.combinations(range(n), ell))


def sylvester(m):
    h = np.array([[1.0]])
    for _ in range(m):
        h = np.kron(h, np.array([[1.0, 1.0], [1.0, -1.0]]))
    return h / math.sqrt(2**m)


def forr_reference(tables):
    # (1/n) x_1^T H diag(x_2) H ... diag(x_{k-1}) H x_k with an explicit matrix
    n = len(tables[0])
    h = sylvester(int(math.log2(n)))
    vec = np.asarray(tables[-1], dtype=float)
    for table in reversed(tables[1:-1]):
        vec = np.asarray(table) * (h @ vec)
    return float(np.asarray(tables[0]) @ h @ vec) / n


def simulate_dense(alg, x):
    # kron-built oracle on {0..n}^t x [2^w], applied round by round
    o = np.diag(np.concatenate([[1.0], np.asarray(x, dtype=float)]))
    big = np.array([[1.0]])
    for _ in range(alg.t):
        big = np.kron(big, o)
    big = np.kron(big, np.eye(1 << alg.w))
    state = big @ alg.psi
    for u in alg.unitaries:
        state = big @ (u @ state)
    return float(np.real(state.conj() @ alg.measurement @ state))


def odd_patterns(d):
    # weight-decreasing, then lexicographically larger first
    pats = [b for b in itertools.product((0, 1), repeat=d) if sum(b) % 2]
    return sorted(pats, key=lambda b: (-sum(b), [-x for x in b]))


def venn(sets, d):
    out = {}
    for b in odd_patterns(d):
        out[b] = {e for e in set().union(*sets) if all((e in s) == bool(bit) for s, bit in zip(sets, b))}
    return out


def brute_terms(form, rho):
    """Every product term of an unpinned form: (per-layer free sets, coefficient)."""
    n, t, m = form.n, form.t, form.m
    free = [i for i in range(n) if rho is None or rho.assignments[i] is None]
    pos = {v: k for k, v in enumerate(free)}
    fixed = {} if rho is None else dict(rho.fixed_items())
    dim = n**t * m
    info = []
    for a in range(dim):
        q = a // m
        digits = [(q // n ** (t - 1 - j)) % n for j in range(t)]
        s, sign = set(), 1
        for dgt in digits:
            if dgt in fixed:
                sign *= fixed[dgt]
            else:
                s ^= {pos[dgt]}
        info.append((frozenset(s), sign))
    d = form.d
    for idx in itertools.product(range(dim), repeat=d):
        coef = np.conj(form.u[idx[0]]) * form.v[idx[-1]]
        for i, mat in enumerate(form.matrices):
            coef *= mat[idx[i], idx[i + 1]]
        for a in idx:
            coef *= info[a][1]
        if coef != 0:
            yield [info[a][0] for a in idx], coef, len(free)


def brute_phase(table, n_free, subset):
    c = brute_coefficient(table, n_free, sorted(subset))
    return np.conj(c) / abs(c) if abs(c) > 1e-13 else 1.0


def count_disjoint_families(cells, s, d):
    pats = odd_patterns(d)
    regions = []
    for b in pats:
        region = set()
        for b2 in pats:
            if all(x >= y for x, y in zip(b2, b)):
                region |= cells[b2]
        regions.append(region)
    count = 0
    for choice in itertools.product(*[itertools.combinations(sorted(r), k) for r, k in zip(regions, s)]):
        flat = [e for c in choice for e in c]
        count += len(flat) == len(set(flat))
    return count


def telescoping(sizes, s, d):
    pats = odd_patterns(d)
    out = 1
    for j, b in enumerate(pats):
        up = sum(sizes[jj] for jj, b2 in enumerate(pats) if all(x >= y for x, y in zip(b2, b)))
        strict = sum(s[jj] for jj, b2 in enumerate(pats) if b2 != b and all(x >= y for x, y in zip(b2, b)))
        top = up - strict
        out *= math.comb(top, s[j]) if top >= s[j] else 0
    return out


def brute_g_h(form, rho, ell):
    """``g``, closed-form ``h`` and literal ``h`` as dicts keyed by profile."""
    table = form.table(restricted=False).values
    if rho is not None:
        keep = [i for i in range(len(table)) if all(a is None or ((i >> k) & 1) == (a < 0) for k, a in enumerate(rho.assignments))]
        table = table[keep]
    d = form.d
    pats = odd_patterns(d)
    g, closed, literal = {}, {}, {}
    for sets, coef, n_free in brute_terms(form, rho):
        total = frozenset()
        for s in sets:
            total ^= s
        if len(total) != ell:
            continue
        term = brute_phase(table, n_free, total) * coef
        cells = venn(sets, d)
        sizes = tuple(len(cells[b]) for b in pats)
        g[sizes] = g.get(sizes, 0) + term
        for s in itertools.product(range(ell + 1), repeat=len(pats)):
            if sum(s) != ell:
                continue
            w = telescoping(sizes, s, d)
            if w:
                closed[s] = closed.get(s, 0) + w * term
            c = count_disjoint_families(cells, s, d)
            if c:
                literal[s] = literal.get(s, 0) + c * term
    return g, closed, literal
