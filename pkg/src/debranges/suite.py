"""Randomized verification suites over every module, with stable reports.

Each check measures one identity's residual against its pinned tolerance.
A report is fully determined by (config, seed): the random generator is
threaded explicitly and check results are sorted by name.  Timings are kept
out of the canonical byte stream so identical runs emit identical bytes.
"""

from __future__ import annotations

import csv as _csv
import io
import json
import math
import time
from dataclasses import dataclass

import numpy as np

from .config import RunConfig, config_hash
from .counterexample import (
    TildeElement,
    default_config,
    discontinuity_witness,
    eval_h,
    h1_check_tilde,
    h3_check_tilde,
    space_for,
    validate_config,
)
from .laws import parse_law
from .measures import (
    CoefficientVector,
    conjugate,
    divide_at,
    ell2_norm,
    make_measure,
    multiplication_domain_check,
    vector_from_config,
)
from .mittag_leffler import build_series, eval_series, residue_check
from .numerics import rel_err
from .s_function import build_s, eval_s, eval_s_value, eval_t, s_prime_all
from .space import (
    adjust_zero_at,
    build_space,
    element,
    eval_x,
    h1_divide,
    h3_star,
    inner,
    kernel_at,
)
from .weierstrass import build_product, derivative_at_zero, eval_product, eval_product_value


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    residual: float
    tolerance: float
    elapsed_ms: float
    detail: str = ""


@dataclass(frozen=True)
class SuiteReport:
    checks: tuple[CheckResult, ...]
    passed: bool
    seed: int
    config_hash: str

    def to_dict(self, include_timings: bool = False) -> dict:
        checks = []
        for c in self.checks:
            row = {
                "name": c.name,
                "passed": c.passed,
                "residual": c.residual,
                "tolerance": c.tolerance,
            }
            if c.detail:
                row["detail"] = c.detail
            if include_timings:
                row["elapsed_ms"] = c.elapsed_ms
            checks.append(row)
        return {
            "checks": checks,
            "pass": self.passed,
            "seed": self.seed,
            "config_hash": self.config_hash,
        }


class _Recorder:
    def __init__(self):
        self.results: list[CheckResult] = []

    def run(self, name: str, tolerance: float, fn) -> None:
        start = time.perf_counter()
        try:
            residual = float(fn())
            passed = residual <= tolerance
            detail = ""
        except Exception as exc:  # isolation: one failure never aborts the rest
            residual = math.inf
            passed = False
            detail = f"{type(exc).__name__}: {exc}"
        elapsed = (time.perf_counter() - start) * 1e3
        self.results.append(CheckResult(name=name, passed=passed, residual=residual,
                                        tolerance=tolerance, elapsed_ms=elapsed,
                                        detail=detail))


def _strip(rng, count, re_max=2.5, im_lo=0.4, im_hi=1.6):
    re = rng.uniform(-re_max, re_max, count)
    im = rng.uniform(im_lo, im_hi, count) * rng.choice([-1.0, 1.0], count)
    return re + 1j * im


def run_suite(cfg: RunConfig) -> SuiteReport:
    """Execute the selected suites; deterministic given (config, seed)."""
    rec = _Recorder()
    rng = np.random.default_rng(cfg.seed)
    mu = make_measure(cfg.measure_family, cfg.measure_n, cfg.measure_params)
    n_idx = np.arange(1.0, mu.size + 1)

    if "measures" in cfg.suites:
        _measures_suite(rec, rng, mu)
    if "weierstrass" in cfg.suites:
        _weierstrass_suite(rec, rng, mu, cfg)
    if "mittag_leffler" in cfg.suites:
        _mittag_leffler_suite(rec, rng, cfg)

    need_space = {"s_function", "space"} & set(cfg.suites)
    if need_space:
        s_fn = build_s(mu, tail_budget=cfg.tail_budget)
        if "s_function" in cfg.suites:
            _s_function_suite(rec, rng, mu, s_fn, cfg)
        if "space" in cfg.suites:
            space = build_space(mu, s=s_fn)
            _space_suite(rec, rng, space, cfg)
    if "counterexample" in cfg.suites:
        _counterexample_suite(rec, rng, cfg)

    checks = tuple(sorted(rec.results, key=lambda c: c.name))
    return SuiteReport(checks=checks, passed=all(c.passed for c in checks),
                       seed=cfg.seed, config_hash=config_hash(cfg))


def _random_vector(rng, n):
    return rng.standard_normal(n) + 1j * rng.standard_normal(n)


def _measures_suite(rec, rng, mu):
    n = mu.size
    v = CoefficientVector(_random_vector(rng, n))
    w = CoefficientVector(_random_vector(rng, n))
    scale = float(rng.uniform(0.5, 8.0))

    def homogeneity():
        return abs(ell2_norm(CoefficientVector(scale * v.entries), mu)
                   - scale * ell2_norm(v, mu)) / (scale * ell2_norm(v, mu))

    rec.run("measures.norm_homogeneity", 1e-12, homogeneity)

    def triangle():
        slack = ell2_norm(v, mu) + ell2_norm(w, mu) \
            - ell2_norm(CoefficientVector(v.entries + w.entries), mu)
        return max(0.0, -slack) / (ell2_norm(v, mu) + ell2_norm(w, mu))

    rec.run("measures.norm_triangle", 1e-12, triangle)
    rec.run("measures.conjugate_involution", 0.0,
            lambda: float(np.max(np.abs(conjugate(conjugate(v)).entries - v.entries))))
    rec.run("measures.conjugate_norm_preserved", 0.0,
            lambda: abs(ell2_norm(conjugate(v), mu) - ell2_norm(v, mu)))

    shift = complex(rng.uniform(-1, 1), rng.uniform(0.5, 1.5))

    def divide_conj():
        lhs = divide_at(conjugate(v), np.conj(shift), mu).entries
        rhs = conjugate(divide_at(v, shift, mu)).entries
        return float(np.max(np.abs(lhs - rhs)))

    rec.run("measures.divide_conjugation_commutes", 1e-15, divide_conj)

    shift2 = complex(rng.uniform(-1, 1), rng.uniform(0.5, 1.5))

    def divide_comp():
        a = divide_at(divide_at(v, shift, mu), shift2, mu).entries
        b = divide_at(divide_at(v, shift2, mu), shift, mu).entries
        return float(np.max(np.abs(a - b)) / np.max(np.abs(a)))

    rec.run("measures.divide_composition_symmetric", 1e-13, divide_comp)

    sched = [m for m in (8, 32, mu.size) if m <= mu.size]

    def divergent_exact():
        seed = vector_from_config({"tail_law": "1/n"}, mu)
        report = multiplication_domain_check(seed, mu, sched)
        worst = max(abs(val - cut) for cut, val in report.partial_sums)
        return worst + (0.0 if report.verdict == "not_in" else math.inf)

    rec.run("measures.domain_divergent_seed", 0.0, divergent_exact)

    def convergent_verdict():
        seed = vector_from_config({"tail_law": "1/n^2"}, mu)
        report = multiplication_domain_check(seed, mu, sched)
        return 0.0 if report.verdict == "in" else math.inf

    rec.run("measures.domain_convergent_seed", 0.0, convergent_verdict)


def _weierstrass_suite(rec, rng, mu, cfg):
    prod = build_product(mu, tail_budget=cfg.tail_budget)

    def symmetry():
        worst = 0.0
        for z in _strip(rng, 50, re_max=6.0, im_lo=0.1, im_hi=6.0):
            lm, ph = eval_product(prod, complex(z))
            lmc, phc = eval_product(prod, complex(np.conj(z)))
            worst = max(worst, abs(lmc - lm), abs(phc + ph))
        return worst

    rec.run("weierstrass.real_symmetry", 1e-12, symmetry)

    def zeros():
        return 0.0 if all(eval_product(prod, float(t))[0] == -math.inf
                          for t in mu.points[:: max(1, mu.size // 16)]) else math.inf

    rec.run("weierstrass.zero_set_exact", 0.0, zeros)

    def midpoints():
        mids = (mu.points[:-1] + mu.points[1:]) / 2.0
        take = mids[:: max(1, mids.size // 16)]
        ok = all(eval_product(prod, float(m))[0] > -math.inf for m in take)
        return 0.0 if ok else math.inf

    rec.run("weierstrass.midpoint_nonvanishing", 0.0, midpoints)

    def genus_monotone():
        r_small = float(2.0 + 0.1 * np.max(np.abs(mu.points)))
        loose = build_product(mu, R=r_small, tail_budget=cfg.tail_budget * 10)
        tight = build_product(mu, R=r_small, tail_budget=cfg.tail_budget)
        return 0.0 if np.all(tight.genus_per_factor >= loose.genus_per_factor) else math.inf

    rec.run("weierstrass.genus_budget_monotone", 0.0, genus_monotone)

    def derivative_fd():
        h = 1e-6
        worst = 0.0
        for n in (1, 2, 3):
            t = float(prod.points[n - 1])
            fd = (eval_product_value(prod, t + h) - eval_product_value(prod, t - h)) / (2 * h)
            worst = max(worst, rel_err(derivative_at_zero(prod, n), fd.real))
        return worst

    rec.run("weierstrass.derivative_fd_consistency", 1e-6, derivative_fd)


def _mittag_leffler_suite(rec, rng, cfg):
    poles = np.arange(1.0, 65.0)
    coeffs = 1.0 / poles**2
    f = build_series(poles, coeffs)

    def symmetry():
        worst = 0.0
        for z in _strip(rng, 50, re_max=6.0, im_lo=0.2, im_hi=6.0):
            worst = max(worst, rel_err(eval_series(f, complex(np.conj(z))),
                                       np.conj(eval_series(f, complex(z)))))
        return worst

    rec.run("mittag_leffler.real_symmetry", 1e-12, symmetry)

    def residue():
        worst = 0.0
        for n in (1, 4, 9):
            worst = max(worst, rel_err(residue_check(f, n), coeffs[n - 1]))
        return worst

    rec.run("mittag_leffler.residue_extrapolation", 1e-8, residue)

    def removable():
        n = 3
        worst = 0.0
        for k in (4, 5, 6):
            z = poles[n - 1] + 10.0**-k
            probe = (z - poles[n - 1]) * eval_series(f, z)
            worst = max(worst, abs(probe - coeffs[n - 1]) / abs(coeffs[n - 1]))
        return 0.0 if worst < 0.05 else worst

    rec.run("mittag_leffler.removable_probe", 1e-12, removable)


def _s_function_suite(rec, rng, mu, s_fn, cfg):
    rec.run("s_function.zeros_on_support", 0.0,
            lambda: 0.0 if all(eval_s(s_fn, float(t))[0] == -math.inf
                               for t in mu.points[:: max(1, mu.size // 16)]) else math.inf)
    rec.run("s_function.derivative_targets", 1e-8,
            lambda: float(np.max(np.abs(np.abs(s_prime_all(s_fn)) / s_fn.targets.values - 1.0))))

    def symmetry():
        worst = 0.0
        for z in _strip(rng, 50, re_max=4.0, im_lo=0.2, im_hi=4.0):
            lm, ph = eval_s(s_fn, complex(z))
            lmc, phc = eval_s(s_fn, complex(np.conj(z)))
            worst = max(worst, abs(lmc - lm), abs(phc + ph))
        return worst

    rec.run("s_function.real_symmetry", 1e-12, symmetry)

    def sum_bound():
        inv = 1.0 / (s_fn.targets.values**2 * mu.masses)
        return rel_err(s_fn.sum_bound, math.fsum(inv.tolist()))

    rec.run("s_function.sum_bound_certified", 1e-14, sum_bound)

    def reroute():
        worst = 0.0
        for n in (2, 3, 5):
            z = float(mu.points[n - 1]) + 1e-3 * min(1.0, mu.min_gap)
            worst = max(worst, rel_err(eval_t(s_fn, z, form="cancellation"),
                                       eval_t(s_fn, z, form="direct")))
        return worst

    rec.run("s_function.reroute_consistency", 1e-8, reroute)

    def budget_shift():
        other = build_s(mu, tail_budget=cfg.tail_budget * 10)
        worst = 0.0
        for z in _strip(rng, 10):
            la, pa = eval_s(s_fn, complex(z))
            lb, pb = eval_s(other, complex(z))
            worst = max(worst, abs(la - lb), abs(pa - pb))
        return worst

    rec.run("s_function.budget_robustness", 11.0 * cfg.tail_budget, budget_shift)


def _space_suite(rec, rng, space, cfg):
    n = space.size
    mu = space.measure

    def interpolation():
        worst = 0.0
        for _ in range(5):
            el = element(space, _random_vector(rng, n))
            vals = np.array([eval_x(el, float(t)) for t in mu.points])
            worst = max(worst, float(np.max(np.abs(vals - el.coeffs.entries))) / el.norm)
        return worst

    rec.run("space.interpolation", 1e-9, interpolation)

    def isometry():
        el = element(space, _random_vector(rng, n))
        vals = np.array([eval_x(el, float(t)) for t in mu.points])
        return abs(ell2_norm(CoefficientVector(vals), mu) - el.norm) / el.norm

    rec.run("space.norm_isometry", 1e-12, isometry)

    w = 1 + 2j

    def h1_adjusted():
        worst = 0.0
        for _ in range(3):
            el = element(space, _random_vector(rng, n))
            adj = adjust_zero_at(el, w)
            divided = h1_divide(adj, w, zero_tol=cfg.zero_tol * 10)
            for z in _strip(rng, 20):
                z = complex(z)
                lhs = eval_x(divided, z) * (z - w)
                worst = max(worst, abs(lhs - eval_x(adj, z)) / (adj.norm * (1 + abs(z))))
        return worst

    rec.run("space.h1_adjusted_zero", 1e-9, h1_adjusted)

    def h1_uncorrected():
        s_w = eval_s_value(space.s, w)
        worst = 0.0
        for _ in range(3):
            el = element(space, _random_vector(rng, n))
            x_w = eval_x(el, w)
            raw = element(space, divide_at(el.coeffs, w, mu).entries)
            for z in _strip(rng, 10):
                z = complex(z)
                lhs = eval_x(raw, z) * (z - w) + eval_s_value(space.s, z) * x_w / s_w
                worst = max(worst, rel_err(lhs, eval_x(el, z)))
        return worst

    rec.run("space.h1_uncorrected", 1e-9, h1_uncorrected)

    def h3():
        worst = 0.0
        for _ in range(20):
            el = element(space, _random_vector(rng, n))
            z = complex(_strip(rng, 1)[0])
            worst = max(worst, rel_err(eval_x(h3_star(el), z),
                                       np.conj(eval_x(el, np.conj(z)))))
        return worst

    rec.run("space.h3_star", 1e-11, h3)

    def reproducing():
        worst = 0.0
        for _ in range(20):
            el = element(space, _random_vector(rng, n))
            z = complex(_strip(rng, 1)[0])
            k = kernel_at(space, z)
            worst = max(worst, rel_err(inner(space, el.coeffs.entries, k.entries),
                                       eval_x(el, z)))
        return worst

    rec.run("space.kernel_reproducing", 1e-10, reproducing)

    def cauchy_schwarz():
        z = complex(_strip(rng, 1)[0])
        k = kernel_at(space, z)
        el = element(space, k.entries)
        norm = ell2_norm(CoefficientVector(k.entries), mu)
        return rel_err(abs(eval_x(el, z)), k.functional_norm * norm)

    rec.run("space.kernel_cauchy_schwarz", 1e-11, cauchy_schwarz)

    def diagonal():
        worst = 0.0
        for _ in range(200):
            el = element(space, _random_vector(rng, n))
            m = int(rng.integers(0, n))
            val = abs(eval_x(el, float(mu.points[m])))
            bound = mu.masses[m] ** -0.5 * el.norm
            worst = max(worst, max(0.0, (val - bound) / bound))
        return worst

    rec.run("space.diagonal_bound", 1e-12, diagonal)

    def linearity():
        u = element(space, _random_vector(rng, n))
        v = element(space, _random_vector(rng, n))
        a, b = complex(0.7, -0.3), complex(-1.2, 0.8)
        combo = element(space, a * u.coeffs.entries + b * v.coeffs.entries)
        worst = 0.0
        for z in _strip(rng, 10):
            z = complex(z)
            worst = max(worst, rel_err(eval_x(combo, z),
                                       a * eval_x(u, z) + b * eval_x(v, z)))
        return worst

    rec.run("space.linearity", 1e-12, linearity)


def _counterexample_suite(rec, rng, cfg):
    u0_law = parse_law(cfg.u0_law)
    ce_cfg = default_config(master=cfg.witness_master,
                            schedule=cfg.witness_schedule, z0=cfg.witness_z0)
    if cfg.u0_law != "1/n":
        n = np.arange(1, cfg.witness_master + 1)
        ce_cfg = type(ce_cfg)(
            measure=ce_cfg.measure,
            u0=CoefficientVector(np.asarray(u0_law.value(n), complex), u0_law),
            z0=cfg.witness_z0, truncation_schedule=cfg.witness_schedule)
    space = space_for(ce_cfg, tail_budget=cfg.tail_budget)

    def validation():
        report = validate_config(ce_cfg, space)
        return 0.0 if report.ok else math.inf

    rec.run("counterexample.validation", 0.0, validation)

    table = discontinuity_witness(ce_cfg, space)

    rec.run("counterexample.h_u0_vanishes", 0.0, lambda: abs(table.h_u0_at_z0))

    def brackets():
        ok = all(1.0 / (r.cutoff + 1) - 1e-10 < r.distance**2 < 1.0 / r.cutoff + 1e-10
                 for r in table.rows)
        return 0.0 if ok else math.inf

    rec.run("counterexample.distance_brackets", 0.0, brackets)

    def cauchy_values():
        diffs = [abs(b.value - a.value) for a, b in zip(table.rows, table.rows[1:])]
        return 0.0 if all(d2 < d1 for d1, d2 in zip(diffs, diffs[1:])) else math.inf

    rec.run("counterexample.value_cauchy", 0.0, cauchy_values)

    def growth():
        ratios = [r.ratio for r in table.rows]
        worst = min(b / a for a, b in zip(ratios, ratios[1:]))
        return 0.0 if worst >= 1.3 and table.final_over_first_ok else math.inf

    rec.run("counterexample.ratio_growth", 0.0, growth)

    def h3_tilde():
        worst = 0.0
        for _ in range(10):
            c = np.zeros(ce_cfg.measure.size, complex)
            c[:16] = _random_vector(rng, 16)
            e = TildeElement(alpha=complex(rng.standard_normal(), rng.standard_normal()),
                             c=CoefficientVector(c), cfg=ce_cfg, space=space)
            report = h3_check_tilde(e, [complex(_strip(rng, 1)[0])])
            worst = max(worst, report.max_residual)
        return worst

    rec.run("counterexample.h3_tilde", 1e-10, h3_tilde)

    def h1_tilde():
        w = 1 + 1j
        c = np.zeros(ce_cfg.measure.size, complex)
        c[:8] = _random_vector(rng, 8)
        e0 = TildeElement(alpha=1.0, c=CoefficientVector(c), cfg=ce_cfg, space=space)
        first = element(space, np.eye(ce_cfg.measure.size, dtype=complex)[0])
        c_adj = c.copy()
        c_adj[0] -= eval_h(e0, w) / eval_x(first, w)
        e = TildeElement(alpha=1.0, c=CoefficientVector(c_adj), cfg=ce_cfg, space=space)
        sample = [complex(z) for z in _strip(rng, 20)]
        _, report = h1_check_tilde(e, w, zero_tol=cfg.zero_tol * 100, sample=sample)
        return report["identity_residual"]

    rec.run("counterexample.h1_tilde", 1e-9, h1_tilde)

    def intersection():
        c = np.zeros(ce_cfg.measure.size, complex)
        c[:8] = _random_vector(rng, 8)
        e = TildeElement(alpha=0.0, c=CoefficientVector(c), cfg=ce_cfg, space=space)
        el = element(space, c)
        worst = 0.0
        for t in ce_cfg.measure.points[:16]:
            worst = max(worst, abs(eval_h(e, float(t)) - eval_x(el, float(t))))
        return worst

    rec.run("counterexample.intersection_density", 0.0, intersection)


# ---------------------------------------------------------------------------
# emission


def _fmt_float(x) -> str:
    if isinstance(x, float):
        return "%.17g" % x
    return str(x)


def witness_csv_rows(table) -> tuple[list[str], list[list]]:
    header = ["N", "distance", "re_value", "im_value", "ratio"]
    rows = [[r.cutoff, r.distance, r.value.real, r.value.imag, r.ratio]
            for r in table.rows]
    return header, rows


def plot_data_rows(table) -> tuple[list[str], list[list]]:
    header = ["log_N", "log_ratio"]
    rows = [[math.log(r.cutoff), math.log(r.ratio)] for r in table.rows]
    return header, rows


def emit(obj, format: str, path: str | None, include_timings: bool = False) -> str:
    """Serialize a report or table; bit-stable for identical inputs.

    CSV uses '.' decimals and 17 significant digits; JSON is canonical
    (sorted keys, fixed separators).  Returns the emitted text; writes it to
    ``path`` when given.
    """
    from .counterexample import WitnessTable

    if format not in ("csv", "json"):
        raise ValueError(f"unknown format {format!r}")
    if isinstance(obj, SuiteReport):
        if format == "json":
            text = json.dumps(obj.to_dict(include_timings=include_timings),
                              sort_keys=True, separators=(",", ": "), indent=1) + "\n"
        else:
            buf = io.StringIO()
            writer = _csv.writer(buf)
            writer.writerow(["name", "passed", "residual", "tolerance"])
            for c in obj.checks:
                writer.writerow([c.name, c.passed, _fmt_float(c.residual),
                                 _fmt_float(c.tolerance)])
            text = buf.getvalue()
    elif isinstance(obj, WitnessTable):
        if format == "json":
            payload = {
                "rows": [{k: (v if not isinstance(v, float) else v)
                          for k, v in row.items()} for row in obj.to_rows()],
                "z0": obj.z0,
                "limit_value": [obj.limit_value.real, obj.limit_value.imag],
                "h_u0_at_z0": [obj.h_u0_at_z0.real, obj.h_u0_at_z0.imag],
                "distance_tail": list(obj.distance_tail),
                "growth_ok": obj.growth_ok,
                "final_over_first_ok": obj.final_over_first_ok,
                "pass": obj.passed,
            }
            if obj.validation is not None:
                payload["validation"] = obj.validation.summary()
            text = json.dumps(payload, sort_keys=True, separators=(",", ": "),
                              indent=1) + "\n"
        else:
            header, rows = witness_csv_rows(obj)
            buf = io.StringIO()
            writer = _csv.writer(buf)
            writer.writerow(header)
            for row in rows:
                writer.writerow([_fmt_float(x) for x in row])
            text = buf.getvalue()
    elif isinstance(obj, tuple) and len(obj) == 2:
        header, rows = obj
        buf = io.StringIO()
        writer = _csv.writer(buf)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt_float(x) for x in row])
        text = buf.getvalue()
    else:
        text = json.dumps(obj, sort_keys=True, separators=(",", ": "), indent=1) + "\n"
    if path:
        try:
            with open(path, "w", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            raise OSError(f"cannot write {path}: {exc}") from exc
    return text
