"""Reproducible batch experiments with CSV and JSON summaries."""
from __future__ import annotations

import csv
import io
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .compositions import preproc_bound_check, preproc_compose, random_tree, tightness_check
from .errors import ConfigError, DomainError, QroundsError
from .forrelation import ForrelationInstance, eval_forr, forr_algorithm, forr_polynomial, label_instance
from .fourier import Restriction, all_assignments, level_l1_weight, restrict, wht
from .growth.bounds import explicit_growth_log2, h_bound, within_explicit_bound
from .growth.decomposition import decomposition_h
from .growth.pattern_matrix import pattern_matrix, pattern_matrix_checks
from .growth.patterns import OddPatternSet, format_pattern, profiles
from .growth.profiles import g_profiles, h_profiles, profile_data, random_form, random_restriction
from .query import acceptance_table, make_rng, random_algorithm, simulate_accept_probs

DEFAULT_TOL = 1e-8
# parameter kinds per command; "range" accepts N or [lo, hi]
SCHEMAS = {
    "fourier-weights": {"n": int, "t": int, "r": int, "w": int, "ell": "range", "trials": int, "restrictions": int},
    "hg-consistency": {"d": int, "n": int, "t": int, "m": int, "n_free": int, "ell": "range", "trials": int},
    "pattern-matrix": {"d": "range", "ell": "range"},
    "decomposition": {"d": int, "n": int, "t": int, "m": int, "n_free": int, "ell": "range", "trials": int},
    "forrelation-demo": {"k": int, "m": int, "trials": int},
    "tightness": {"m": int, "s": int, "L": "range"},
    "preproc": {"n": int, "depth": int, "t": int, "r": int, "w": int, "ell": "range", "trials": int},
}
REQUIRED = {
    "fourier-weights": ("n", "t", "r"),
    "hg-consistency": ("d", "n", "t", "m"),
    "pattern-matrix": ("d", "ell"),
    "decomposition": ("d", "n", "t", "m"),
    "forrelation-demo": ("k", "m"),
    "tightness": ("m", "s", "L"),
    "preproc": ("n", "depth", "t", "r"),
}
RANDOMIZED = {"fourier-weights", "hg-consistency", "decomposition", "preproc"}
ALIASES = {"ℓ": "ell", "l": "ell"}
META = {"command", "seed", "out", "tol", "workers"}


def _range(value, name):
    if isinstance(value, bool):
        raise ConfigError(f"{name} must be an integer or [lo, hi]")
    if isinstance(value, int):
        return (value, value)
    if isinstance(value, (list, tuple)) and len(value) == 2 and all(isinstance(v, int) and not isinstance(v, bool) for v in value):
        lo, hi = value
        if lo > hi:
            raise ConfigError(f"{name} range [{lo}, {hi}] is empty")
        return (lo, hi)
    raise ConfigError(f"{name} must be an integer or [lo, hi], got {value!r}")


@dataclass(frozen=True)
class ExperimentConfig:
    command: str
    params: dict
    seed: int | None = None
    out: str | None = None
    tol: float = DEFAULT_TOL
    workers: int = 1

    def __post_init__(self):
        if self.command not in SCHEMAS:
            raise ConfigError(f"unknown command {self.command!r}; expected one of {sorted(SCHEMAS)}")
        schema = SCHEMAS[self.command]
        params = {}
        for key, value in self.params.items():
            key = ALIASES.get(key, key)
            if key not in schema:
                raise ConfigError(f"{self.command}: unknown parameter {key!r}")
            kind = schema[key]
            if kind == "range":
                params[key] = _range(value, key)
            elif not isinstance(value, int) or isinstance(value, bool):
                raise ConfigError(f"{self.command}: {key} must be an integer, got {value!r}")
            elif value < 0:
                raise ConfigError(f"{self.command}: {key} must be non-negative")
            else:
                params[key] = value
        for key in REQUIRED[self.command]:
            if key not in params:
                raise ConfigError(f"{self.command}: missing required parameter {key!r}")
        if self.command in RANDOMIZED and self.seed is None:
            raise ConfigError(f"{self.command} is randomized and needs a seed")
        if self.seed is not None and (not isinstance(self.seed, int) or isinstance(self.seed, bool) or self.seed < 0):
            raise ConfigError("seed must be a non-negative integer")
        if not isinstance(self.tol, (int, float)) or isinstance(self.tol, bool) or not self.tol > 0:
            raise ConfigError("tol must be a positive number")
        if not isinstance(self.workers, int) or self.workers < 1:
            raise ConfigError("workers must be a positive integer")
        object.__setattr__(self, "params", params)

    @classmethod
    def from_dict(cls, obj, seed=None):
        if not isinstance(obj, dict):
            raise ConfigError("config must be a JSON object")
        if "command" not in obj:
            raise ConfigError("config needs a 'command'")
        params = {k: v for k, v in obj.items() if k not in META}
        if isinstance(obj.get("params"), dict):
            params.pop("params")
            params.update(obj["params"])
        return cls(
            obj["command"],
            params,
            seed if seed is not None else obj.get("seed"),
            obj.get("out"),
            obj.get("tol", DEFAULT_TOL),
            obj.get("workers", 1),
        )

    @classmethod
    def from_json(cls, text, seed=None):
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from None
        return cls.from_dict(obj, seed)

    def canonical(self):
        params = {k: list(v) if isinstance(v, tuple) else v for k, v in self.params.items()}
        return {"command": self.command, "params": params, "seed": self.seed, "tol": self.tol}

    def hash(self):
        return fnv1a64(json.dumps(self.canonical(), sort_keys=True, separators=(",", ":"), ensure_ascii=False))

    def get(self, key, default=None):
        return self.params.get(key, default)

    def ells(self, default):
        lo, hi = self.params.get("ell", default)
        return range(lo, hi + 1)


def fnv1a64(text):
    """64-bit FNV-1a of the UTF-8 bytes, as 16 hex digits."""
    h = 0xCBF29CE484222325
    for byte in text.encode("utf-8"):
        h ^= byte
        h = (h * 0x100000001B3) & 0xFFFFFFFFFFFFFFFF
    return f"{h:016x}"


@dataclass
class ExperimentReport:
    command: str
    config: ExperimentConfig | None
    columns: list
    units: dict
    rows: list = field(default_factory=list)
    notes: list = field(default_factory=list)
    wall_time: float = 0.0

    def sorted_rows(self):
        return sorted(self.rows, key=lambda row: (row.get("trial", 0), row.get("ell", 0)))

    @property
    def pass_count(self):
        return sum(1 for row in self.rows if row["pass"])

    @property
    def fail_count(self):
        return sum(1 for row in self.rows if not row["pass"])

    @property
    def max_violation(self):
        return max((float(row.get("violation", 0.0)) for row in self.rows), default=0.0)

    def summary(self):
        return {
            "command": self.command,
            "config_hash": self.config.hash() if self.config else None,
            "pass_count": self.pass_count,
            "fail_count": self.fail_count,
            "max_violation": self.max_violation,
            "wall_time": self.wall_time,
            "notes": self.notes,
        }

    def failing_rows(self):
        return [row for row in self.sorted_rows() if not row["pass"]]

    def to_csv(self):
        buf = io.StringIO()
        buf.write(f"# command: {self.command}\n")
        if self.config is not None:
            buf.write(f"# config_hash: {self.config.hash()}\n")
        buf.write("# units: " + "; ".join(f"{c}={self.units.get(c, '-')}" for c in self.columns) + "\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for row in self.sorted_rows():
            w.writerow([_fmt(row.get(c, "")) for c in self.columns])
        return buf.getvalue()


def _fmt(value):
    if isinstance(value, (bool, np.bool_)):
        return "pass" if value else "fail"
    if isinstance(value, float):
        return repr(value)
    return value


def _pmap(fn, items, workers):
    if workers <= 1:
        return [fn(item) for item in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _trial_seeds(seed, trials):
    return [np.random.SeedSequence([seed, k]) for k in range(trials)]


# fourier-weights


def _fourier_weights_trial(args):
    cfg, k, seq = args
    n, t, r, w = cfg.get("n"), cfg.get("t"), cfg.get("r"), cfg.get("w", 0)
    alg_seq, rho_seq = seq.spawn(2)
    func = acceptance_table(random_algorithm(n, t, r, w, alg_seq))
    rng = make_rng(rho_seq)
    rhos = [Restriction.free(n)]
    for _ in range(cfg.get("restrictions", 0)):
        rhos.append(random_restriction(n, int(rng.integers(0, n + 1)), rng))
    rows = []
    for j, rho in enumerate(rhos):
        weights = wht(restrict(func, rho))
        for ell in cfg.ells((0, min(4, n))):
            nf = rho.n_free
            if ell > nf:
                continue
            value = level_l1_weight(weights, ell)
            log_bound = explicit_growth_log2(2 * r, ell, t, nf)
            ok = within_explicit_bound(value, 2 * r, ell, t, nf)
            rows.append({
                "trial": k, "restriction": str(rho), "ell": ell, "n_free": nf, "L1": value,
                "log2_bound": log_bound, "violation": 0.0 if ok else value, "pass": ok,
            })
    return rows


def run_fourier_weights(cfg):
    items = [(cfg, k, seq) for k, seq in enumerate(_trial_seeds(cfg.seed, cfg.get("trials", 1)))]
    rows = [row for chunk in _pmap(_fourier_weights_trial, items, cfg.workers) for row in chunk]
    cols = ["trial", "restriction", "ell", "n_free", "L1", "log2_bound", "violation", "pass"]
    units = {"L1": "sum |coef|", "log2_bound": "log2(sum |coef|)", "violation": "sum |coef|", "n_free": "variables"}
    return ExperimentReport("fourier-weights", cfg, cols, units, rows)


# hg-consistency


def _hg_trial(args):
    cfg, k, seq = args
    d, n, t, m = cfg.get("d"), cfg.get("n"), cfg.get("t"), cfg.get("m")
    nf = cfg.get("n_free", n)
    if nf > n:
        raise ConfigError("n_free cannot exceed n")
    form_seq, rho_seq = seq.spawn(2)
    form = random_form(n, t, m, d, form_seq)
    rho = random_restriction(n, nf, make_rng(rho_seq))
    data = profile_data(form, rho)
    l1 = wht(data.function)
    rows = []
    for ell in cfg.ells((0, min(4, nf))):
        if ell > nf:
            continue
        g, _ = g_profiles(form, rho, ell, data)
        h = h_profiles(form, rho, ell, data=data)
        P = pattern_matrix(d, ell).P
        pg = P.astype(float) @ g.values
        l1_err = abs(g.values.sum() - level_l1_weight(l1, ell))
        bound = h_bound(d, ell, t, nf)
        for s, gv, hv, pv in zip(g.profiles, g.values, h.values, pg):
            err = abs(hv - pv)
            ok = err <= cfg.tol and l1_err <= cfg.tol
            rows.append({
                "trial": k, "ell": ell, "d": d, "s": " ".join(map(str, s)),
                "re_g": float(gv.real), "im_g": float(gv.imag), "re_h": float(hv.real), "im_h": float(hv.imag),
                "h_bound": bound, "pg_error": float(err), "l1_error": float(l1_err),
                "violation": float(max(err, l1_err)), "pass": ok,
            })
    return rows


def run_hg_consistency(cfg):
    items = [(cfg, k, seq) for k, seq in enumerate(_trial_seeds(cfg.seed, cfg.get("trials", 1)))]
    rows = [row for chunk in _pmap(_hg_trial, items, cfg.workers) for row in chunk]
    cols = ["trial", "ell", "d", "s", "re_g", "im_g", "re_h", "im_h", "h_bound", "pg_error", "l1_error", "violation", "pass"]
    pats = " ".join(format_pattern(b) for b in OddPatternSet(cfg.get("d")))
    units = {"s": f"cell sizes for patterns {pats}", "pg_error": "abs", "l1_error": "abs"}
    return ExperimentReport("hg-consistency", cfg, cols, units, rows)


# pattern-matrix


def run_pattern_matrix(cfg):
    rows = []
    notes = []
    d_lo, d_hi = cfg.get("d")
    for d in range(max(d_lo, 2), d_hi + 1):
        for ell in cfg.ells((0, 4)):
            rep = pattern_matrix_checks(pattern_matrix(d, ell))
            if rep.identity:
                notes.append(f"d={d} ell={ell}: P = identity")
            rows.append({
                "trial": d, "ell": ell, "d": d, "D": rep.D, "lower_triangular": rep.lower_triangular,
                "unit_diagonal": rep.unit_diagonal, "det": rep.det, "norm1": rep.norm1, "norm1_bound": rep.norm1_bound,
                "inv_norm1": rep.inv_norm1, "log10_inv_bound": round(math.log10(rep.inv_norm1_bound), 6),
                "identity": "yes" if rep.identity else "no", "violation": float(len(rep.failures)), "pass": rep.passed,
            })
            notes.extend(f"d={d} ell={ell}: {msg}" for msg in rep.failures)
    cols = ["d", "ell", "D", "lower_triangular", "unit_diagonal", "det", "norm1", "norm1_bound", "inv_norm1",
            "log10_inv_bound", "identity", "violation", "pass"]
    units = {"D": "profiles", "norm1": "max column sum", "inv_norm1": "max column sum", "violation": "failed checks"}
    return ExperimentReport("pattern-matrix", cfg, cols, units, rows, notes)


# decomposition


def _decomposition_trial(args):
    cfg, k, seq = args
    d, n, t, m = cfg.get("d"), cfg.get("n"), cfg.get("t"), cfg.get("m")
    nf = cfg.get("n_free", min(n, 3))
    form_seq, rho_seq = seq.spawn(2)
    form = random_form(n, t, m, d, form_seq)
    rho = random_restriction(n, nf, make_rng(rho_seq))
    data = profile_data(form, rho)
    rows = []
    for ell in cfg.ells((0, 2)):
        for s in profiles(d, ell):
            for pivot in range(1, d + 1):
                rep = decomposition_h(form, rho, s, pivot, data=data)
                ratio = max((f.norm / f.bound if f.bound else (0.0 if f.norm == 0 else math.inf)) for f in rep.factors)
                rows.append({
                    "trial": k, "ell": ell, "s": " ".join(map(str, s)), "pivot": pivot,
                    "re_chain": rep.value.real, "im_chain": rep.value.imag,
                    "re_h": rep.h_enumerated.real, "im_h": rep.h_enumerated.imag,
                    "error": rep.error, "max_norm_ratio": ratio,
                    "norms": " ".join(f"{f.name}={f.norm:.6g}/{f.bound:.6g}" for f in rep.factors),
                    "violation": max(rep.error, max(0.0, ratio - 1)), "pass": rep.error <= cfg.tol and not rep.norm_violations,
                })
    return rows


def run_decomposition(cfg):
    items = [(cfg, k, seq) for k, seq in enumerate(_trial_seeds(cfg.seed, cfg.get("trials", 1)))]
    rows = [row for chunk in _pmap(_decomposition_trial, items, cfg.workers) for row in chunk]
    cols = ["trial", "ell", "s", "pivot", "re_chain", "im_chain", "re_h", "im_h", "error", "max_norm_ratio", "norms",
            "violation", "pass"]
    units = {"error": "abs", "max_norm_ratio": "norm / bound", "norms": "name=norm/bound"}
    return ExperimentReport("decomposition", cfg, cols, units, rows)


# forrelation-demo

EXHAUSTIVE_BITS = 12


def run_forrelation_demo(cfg):
    k, m = cfg.get("k"), cfg.get("m")
    n = 1 << m
    alg = forr_algorithm(k, m)
    if k * n <= EXHAUSTIVE_BITS:
        xs = all_assignments(k * n)
    else:
        if cfg.seed is None:
            raise ConfigError(f"forrelation-demo samples inputs when k n > {EXHAUSTIVE_BITS} and needs a seed")
        xs = make_rng(cfg.seed).choice([-1, 1], size=(cfg.get("trials", 200), k * n)).astype(np.int8)
    accept = simulate_accept_probs(alg, xs)
    forr = forr_polynomial(k, m)(xs)
    rows = []
    for i, (x, p, f) in enumerate(zip(xs, accept, forr)):
        inst = ForrelationInstance.from_input(k, m, x)
        err = abs(p - (1 + f) / 2)
        rows.append({
            "trial": i, "input": "".join("+" if v > 0 else "-" for v in x), "forr": float(f),
            "forr_direct": eval_forr(inst), "accept": float(p), "error": float(err),
            "label": label_instance(inst).value, "violation": float(err), "pass": bool(err <= 1e-9),
        })
    cols = ["trial", "input", "forr", "forr_direct", "accept", "error", "label", "violation", "pass"]
    units = {"accept": "probability", "error": "abs", "forr": "polynomial value"}
    return ExperimentReport("forrelation-demo", cfg, cols, units, rows, [f"algorithm uses {alg.r} rounds, {alg.t} query"])


# tightness


def run_tightness(cfg):
    rows = []
    lo, hi = cfg.get("L")
    for L in range(lo, hi + 1):
        rep = tightness_check(cfg.get("m"), cfg.get("s"), L, tol=min(cfg.tol, 1e-9))
        rows.append({
            "trial": L, "L": L, "ell": rep.ell, "measured": rep.measured, "predicted": rep.predicted,
            "error": rep.error, "target": rep.target, "violation": rep.error, "pass": rep.passed,
        })
    cols = ["L", "ell", "measured", "predicted", "error", "target", "violation", "pass"]
    units = {"measured": "sum |coef|", "predicted": "sum |coef|", "target": "n^(ell/4) t^(ell/4)"}
    return ExperimentReport("tightness", cfg, cols, units, rows)


# preproc


def _preproc_trial(args):
    cfg, k, seq = args
    n, depth, t, r, w = cfg.get("n"), cfg.get("depth"), cfg.get("t"), cfg.get("r"), cfg.get("w", 0)
    tree = random_tree(n, depth, t, r, w, seq)
    rows = []
    func = preproc_compose(tree)
    for ell in cfg.ells((0, n)):
        rep = preproc_bound_check(tree, ell, func)
        rows.append({
            "trial": k, "ell": ell, "depth": rep.depth, "measured": rep.measured, "bound": rep.bound,
            "violation": max(0.0, rep.measured - rep.bound), "pass": rep.passed,
        })
    return rows


def run_preproc(cfg):
    items = [(cfg, k, seq) for k, seq in enumerate(_trial_seeds(cfg.seed, cfg.get("trials", 1)))]
    rows = [row for chunk in _pmap(_preproc_trial, items, cfg.workers) for row in chunk]
    cols = ["trial", "ell", "depth", "measured", "bound", "violation", "pass"]
    units = {"measured": "sum |coef|", "bound": "sum |coef|"}
    return ExperimentReport("preproc", cfg, cols, units, rows)


RUNNERS = {
    "fourier-weights": run_fourier_weights,
    "hg-consistency": run_hg_consistency,
    "pattern-matrix": run_pattern_matrix,
    "decomposition": run_decomposition,
    "forrelation-demo": run_forrelation_demo,
    "tightness": run_tightness,
    "preproc": run_preproc,
}


def run(cfg: ExperimentConfig) -> ExperimentReport:
    start = time.perf_counter()
    try:
        report = RUNNERS[cfg.command](cfg)
    except (DomainError, QroundsError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"{cfg.command}: {exc}") from exc
    report.wall_time = time.perf_counter() - start
    return report


def write_outputs(report: ExperimentReport, out_dir) -> tuple:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / f"{report.command}.csv"
    json_path = out / f"{report.command}.summary.json"
    csv_path.write_text(report.to_csv())
    json_path.write_text(json.dumps(report.summary(), indent=2) + "\n")
    return csv_path, json_path


PLOT_KINDS = {
    "fourier-weights": ("ell", "L1ell_max_observed", "explicit_bound"),
    "tightness": ("L", "measured", "predicted"),
}


def emit_plotdata(report: ExperimentReport, kind) -> str:
    """Tidy ``(x, measured, bound)`` columns for external plotting."""
    if kind not in PLOT_KINDS:
        raise DomainError(f"unknown plot kind {kind!r}; expected one of {sorted(PLOT_KINDS)}")
    cols = PLOT_KINDS[kind]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    if kind == "fourier-weights":
        best = {}
        for row in report.rows:
            ell = row["ell"]
            obs, bound = best.get(ell, (0.0, math.inf))
            best[ell] = (max(obs, row["L1"]), min(bound, row["log2_bound"]))
        for ell in sorted(best):
            obs, log_bound = best[ell]
            bound = 2.0**log_bound if log_bound < 1023 else math.inf
            w.writerow([ell, repr(float(obs)), repr(float(bound))])
    else:
        for row in sorted(report.rows, key=lambda r: r["L"]):
            w.writerow([row["L"], repr(float(row["measured"])), repr(float(row["predicted"]))])
    return buf.getvalue()
