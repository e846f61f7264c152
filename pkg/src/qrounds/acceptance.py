"""Acceptance suite: one check per criterion, each with a tolerance and a time budget."""
from __future__ import annotations

import math
import sys
import time
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .compositions import preproc_bound_check, preproc_compose, random_tree, tightness_check
from .forrelation import forr_algorithm, forr_polynomial
from .fourier import BooleanFunction, Restriction, all_assignments, direct_coefficients, level_l1_weight, restrict, wht
from .growth.bounds import exponent_c, within_explicit_bound
from .growth.decomposition import decomposition_h
from .growth.pattern_matrix import pattern_matrix, pattern_matrix_checks
from .growth.patterns import profiles
from .growth.profiles import g_profiles, h_profiles, profile_data, random_form, random_restriction
from .query import acceptance_table, make_rng, random_algorithm, simulate_accept_probs

SEED = 20240601


def _streams(key, count):
    return np.random.SeedSequence([SEED, key]).spawn(count)


@dataclass
class CriterionResult:
    id: int
    name: str
    passed: bool
    detail: str
    elapsed: float
    budget: float

    @property
    def over_budget(self):
        return self.elapsed > self.budget

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        timing = f"{self.elapsed:.1f}s/{self.budget:.0f}s"
        return f"{status} [{self.id:2d}] {self.name}: {self.detail} ({timing})"


def check_forrelation_identity(quick=False):
    worst = 0.0
    for k in (2, 3, 4):
        alg1 = forr_algorithm(k, 1)
        xs = all_assignments(2 * k)
        worst = max(worst, float(np.max(np.abs(simulate_accept_probs(alg1, xs) - (1 + forr_polynomial(k, 1)(xs)) / 2))))
        alg2 = forr_algorithm(k, 2)
        xs = make_rng([SEED, k]).choice([-1, 1], size=(50 if quick else 200, 4 * k)).astype(np.int8)
        worst = max(worst, float(np.max(np.abs(simulate_accept_probs(alg2, xs) - (1 + forr_polynomial(k, 2)(xs)) / 2))))
    return worst <= 1e-9, f"max |Pr[accept] - (1+forr)/2| = {worst:.2e}"


def check_fourier_oracle(quick=False):
    rng = make_rng([SEED, 2])
    coef_err = 0.0
    for n in range(1, (6 if quick else 8) + 1):
        f = BooleanFunction(n, rng.standard_normal(1 << n))
        coef_err = max(coef_err, float(np.max(np.abs(wht(f).coefficients - direct_coefficients(f)))))
    pars_err = 0.0
    for _ in range(20 if quick else 100):
        n = int(rng.integers(1, (10 if quick else 14) + 1))
        vals = rng.standard_normal(1 << n)
        spec = wht(BooleanFunction(n, vals))
        pars_err = max(pars_err, abs(float(np.sum(np.abs(spec.coefficients) ** 2)) - float(np.mean(vals**2))))
    ok = coef_err <= 1e-10 and pars_err <= 1e-9
    return ok, f"coefficient error {coef_err:.2e}, Parseval error {pars_err:.2e}"


def check_h_pg(quick=False):
    worst_pg = worst_l1 = literal_gap = 0.0
    trials = 8 if quick else 30
    for k, seq in enumerate(_streams(3, trials)):
        rng = make_rng(seq)
        d = int(rng.integers(2, 4))
        t = int(rng.integers(1, 3))
        m = int(rng.integers(1, 3))
        n = int(rng.integers(1, 5))
        nf = int(rng.integers(0, n + 1))
        form = random_form(n, t, m, d, rng.integers(2**32))
        rho = random_restriction(n, nf, rng)
        data = profile_data(form, rho)
        spec = wht(data.function)
        for ell in range(0, min(4, nf) + 1):
            g, _ = g_profiles(form, rho, ell, data)
            h = h_profiles(form, rho, ell, data=data)
            P = pattern_matrix(d, ell).P.astype(float)
            worst_pg = max(worst_pg, float(np.max(np.abs(h.values - P @ g.values))))
            worst_l1 = max(worst_l1, abs(float(np.sum(g.values).real) - level_l1_weight(spec, ell)),
                           abs(float(np.sum(g.values).imag)))
            literal = h_profiles(form, rho, ell, method="enumerate", data=data)
            literal_gap = max(literal_gap, float(np.max(np.abs(literal.values - h.values))))
    ok = worst_pg <= 1e-8 and worst_l1 <= 1e-8
    return ok, (f"max |h - P g| = {worst_pg:.2e}, max |sum g - L1| = {worst_l1:.2e}; "
                f"info: literal-count h differs from closed h by up to {literal_gap:.3g}")


def check_pattern_matrix(quick=False):
    bad, checked = [], 0
    for d in range(2, (4 if quick else 5) + 1):
        for ell in range(0, 5):
            rep = pattern_matrix_checks(pattern_matrix(d, ell))
            checked += 1
            if not rep.passed:
                bad.append(f"(d={d}, ell={ell}): {'; '.join(rep.failures)}")
    return not bad, f"{checked} (d, ell) pairs checked" + (f"; failures {bad}" if bad else "")


def check_decomposition(quick=False):
    worst_err, violations, count = 0.0, [], 0
    trials = 3 if quick else 10
    for seq in _streams(5, trials):
        rng = make_rng(seq)
        d = int(rng.integers(2, 4))
        t = int(rng.integers(1, 3))
        m = int(rng.integers(1, 3))
        n = int(rng.integers(1, 4))
        nf = int(rng.integers(0, n + 1))
        form = random_form(n, t, m, d, rng.integers(2**32))
        rho = random_restriction(n, nf, rng)
        data = profile_data(form, rho)
        for ell in range(0, 3):
            for s in profiles(d, ell):
                for pivot in range(1, d + 1):
                    rep = decomposition_h(form, rho, s, pivot, data=data)
                    count += 1
                    worst_err = max(worst_err, rep.error)
                    violations += [(s, pivot, f.name) for f in rep.norm_violations]
    ok = worst_err <= 1e-8 and not violations
    return ok, f"{count} (form, s, pivot) chains, max error {worst_err:.2e}, norm violations {len(violations)}"


def check_growth_bound(quick=False):
    checked, violations = 0, []
    trials = 60 if quick else 500
    for seq in _streams(6, trials):
        rng = make_rng(seq)
        n = int(rng.integers(1, 9))
        t = int(rng.integers(1, 3))
        r = int(rng.integers(1, 3))
        w = int(rng.integers(0, 2))
        func = acceptance_table(random_algorithm(n, t, r, w, rng.integers(2**32)))
        rhos = [Restriction.free(n)] + [random_restriction(n, int(rng.integers(0, n + 1)), rng) for _ in range(5)]
        for rho in rhos:
            spec = wht(restrict(func, rho))
            for ell in range(0, min(4, rho.n_free) + 1):
                value = level_l1_weight(spec, ell)
                checked += 1
                if not within_explicit_bound(value, 2 * r, ell, t, rho.n_free):
                    violations.append((n, t, r, str(rho), ell, value))
    return not violations, f"{checked} (algorithm, restriction, ell) checks, {len(violations)} violations"


def check_forr2_level2(quick=False):
    worst = 0.0
    for m in (1, 2, 3):
        n = 1 << m
        f = BooleanFunction(2 * n, forr_polynomial(2, m)(all_assignments(2 * n)))
        worst = max(worst, abs(level_l1_weight(wht(f), 2) - math.sqrt(n)))
    return worst <= 1e-9, f"max |L1,2(forr2) - sqrt n| = {worst:.2e} over n in (2, 4, 8)"


def check_tightness(quick=False):
    targets = {(1, 3, 1): 9 * math.sqrt(2) / 8, (2, 1, 1): 1.0, (1, 1, 2): 1.0}
    worst = 0.0
    for (m, s, L), target in targets.items():
        rep = tightness_check(m, s, L)
        worst = max(worst, rep.error, abs(rep.measured - target))
    return worst <= 1e-9, f"max error against product formula and numeric targets {worst:.2e}"


def check_preproc(quick=False):
    violations, checked = [], 0
    trials = 10 if quick else 50
    for seq in _streams(9, trials):
        rng = make_rng(seq)
        n = int(rng.integers(2, 7))
        depth = int(rng.integers(0, 3))
        t = int(rng.integers(1, 3))
        r = int(rng.integers(1, 3))
        tree = random_tree(n, depth, t, r, 0, seq.spawn(1)[0], stop_prob=0.3)
        func = preproc_compose(tree)
        for ell in range(0, n + 1):
            rep = preproc_bound_check(tree, ell, func)
            checked += 1
            if not rep.passed:
                violations.append((n, depth, ell, rep.measured, rep.bound))
    return not violations, f"{checked} (tree, ell) checks, {len(violations)} violations"


def check_exponents(quick=False):
    expected = {(2, 1): Fraction(1, 2), (3, 2): Fraction(2, 15), (4, 2): Fraction(1, 3)}
    got = {key: exponent_c(*key) for key in expected}
    wrong = [f"c{key} = {got[key]} (expected {val})" for key, val in expected.items() if got[key] != val]
    return not wrong, "all exact" if not wrong else "; ".join(wrong)


CRITERIA = [
    (1, "forrelation circuit-polynomial identity", check_forrelation_identity, 30),
    (2, "Fourier transform oracle equivalence", check_fourier_oracle, 60),
    (3, "h = P g on random forms", check_h_pg, 300),
    (4, "pattern matrix invertibility and norms", check_pattern_matrix, 120),
    (5, "matrix-chain decomposition", check_decomposition, 600),
    (6, "explicit growth bound", check_growth_bound, 900),
    (7, "level-2 weight of forr2", check_forr2_level2, 30),
    (8, "majority composition tightness", check_tightness, 60),
    (9, "classical preprocessing bound", check_preproc, 300),
    (10, "separation exponents", check_exponents, 1),
]


def run_acceptance(quick=False, echo=False, only=None, stream=None):
    """Run the criteria (all, or the ids in ``only``); returns ``CriterionResult``s."""
    stream = stream or sys.stdout
    results = []
    for cid, name, check, budget in CRITERIA:
        if only is not None and cid not in only:
            continue
        start = time.perf_counter()
        try:
            passed, detail = check(quick)
        except Exception as exc:  # a crash is a failed criterion, not a crashed suite
            passed, detail = False, f"error: {type(exc).__name__}: {exc}"
        res = CriterionResult(cid, name, bool(passed), detail, time.perf_counter() - start, budget)
        results.append(res)
        if echo:
            print(res.line(), file=stream, flush=True)
    return results
