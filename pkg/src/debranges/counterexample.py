"""The modified space built over span(u0) + L and its failure of continuity.

The modified space replaces the interpolant of u = alpha*u0 by

    G_u(z) = (z - z0) * X_{D_{z0}(u)}(z),

which vanishes at z0 by construction, and keeps X_c for the multiplication-
operator domain part c in L.  Truncations c_N of u0 are finitely supported,
hence in L, converge to u0 in l2(mu), and their evaluations at z0 converge to
X_{u0}(z0) != 0 while the modified interpolant of u0 itself vanishes there:
point evaluation at z0 is unbounded on the modified space.

Only the constructive subspace span(u0) + L is represented; the decomposition
is unique there because u0 lies outside L by the divergence certificate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .measures import (
    CoefficientVector,
    DiscreteMeasure,
    DomainReport,
    conjugate,
    divide_at,
    ell2_norm,
    multiplication_domain_check,
)
from .numerics import DEFAULT_SAFETY_FACTOR, csum, csum_complex, nearest_index
from .space import (
    SampledSpace,
    SpaceElement,
    ZeroPreconditionError,
    build_space,
    element,
    eval_x,
)

EPS = np.finfo(float).eps


@dataclass(frozen=True)
class CounterexampleConfig:
    measure: DiscreteMeasure            # master truncation
    u0: CoefficientVector               # seed outside L
    z0: float
    truncation_schedule: tuple[int, ...]
    margin_factor: float = 1e6          # required |X_u0(z0)| over the noise floor
    growth_threshold: float = 1.3
    final_over_first: float = 10.0

    def __post_init__(self):
        sched = tuple(int(n) for n in self.truncation_schedule)
        object.__setattr__(self, "truncation_schedule", sched)
        if not sched or any(b <= a for a, b in zip(sched, sched[1:])):
            raise ValueError("truncation schedule must be nonempty and increasing")
        if sched[-1] > self.measure.size:
            raise ValueError("schedule exceeds the master truncation")
        if self.u0.size != self.measure.size:
            raise ValueError("u0 must be aligned with the master measure")


def space_for(cfg: CounterexampleConfig, tail_budget: float = 1e-9) -> SampledSpace:
    """The sampled space over the master measure (the bootstrap space)."""
    return build_space(cfg.measure, tail_budget=tail_budget)


@dataclass(frozen=True)
class ValidationReport:
    domain: DomainReport
    z0: float
    z0_distance: float
    x_u0_at_z0: complex
    noise_floor: float
    margin_ok: bool
    scanned: tuple[tuple[float, float], ...] = ()
    ok: bool = True

    def summary(self) -> dict:
        return {
            "u0_domain_verdict": self.domain.verdict,
            "z0": self.z0,
            "z0_distance": self.z0_distance,
            "x_u0_at_z0": [self.x_u0_at_z0.real, self.x_u0_at_z0.imag],
            "noise_floor": self.noise_floor,
            "margin_ok": self.margin_ok,
            "ok": self.ok,
        }


def _noise_floor(space: SampledSpace, v: np.ndarray, z0: complex) -> float:
    mu = space.measure
    try:
        from .s_function import eval_s

        lm, _ = eval_s(space.s, z0)
        s_abs = math.exp(min(lm, 709.0))
    except Exception:
        s_abs = 1.0
    term_abs = np.abs(v) / (np.abs(z0 - mu.points) * np.abs(space.s_primes))
    return 64.0 * EPS * s_abs * csum(term_abs)


def validate_config(cfg: CounterexampleConfig, space: SampledSpace | None = None,
                    schedule: Sequence[int] | None = None) -> ValidationReport:
    """Check every precondition the witness construction relies on.

    * u0 must fail the multiplication-domain check (divergent t^2-weighted sums);
    * z0 must stay clear of the support;
    * X_{u0}(z0) must clear the configured margin above the rounding floor,
      otherwise a deterministic candidate list is scanned and reported.
    """
    if space is None:
        space = space_for(cfg)
    mu = cfg.measure
    sched = tuple(schedule) if schedule is not None else cfg.truncation_schedule
    domain = multiplication_domain_check(cfg.u0, mu, sched)
    if domain.verdict == "in":
        raise ValueError(
            "u0 is certified inside the multiplication domain; it cannot seed "
            "a discontinuity witness"
        )

    _, dist = nearest_index(mu.points, complex(cfg.z0))
    tol = mu.safety_distance(DEFAULT_SAFETY_FACTOR)
    if dist <= tol:
        raise ValueError(f"z0 = {cfg.z0} lies on the support within the safety distance")

    el = element(space, cfg.u0)
    value = eval_x(el, complex(cfg.z0))
    floor = _noise_floor(space, cfg.u0.entries, complex(cfg.z0))
    margin_ok = abs(value) > cfg.margin_factor * floor
    scanned: list[tuple[float, float]] = []
    z_best, v_best, d_best = cfg.z0, value, dist
    if not margin_ok:
        for cand in _z0_candidates(mu):
            _, cd = nearest_index(mu.points, complex(cand))
            if cd <= tol:
                continue
            cv = eval_x(el, complex(cand))
            scanned.append((cand, abs(cv)))
            if abs(cv) > abs(v_best):
                z_best, v_best, d_best = cand, cv, cd
        margin_ok = abs(v_best) > cfg.margin_factor * _noise_floor(
            space, cfg.u0.entries, complex(z_best))
        if not margin_ok:
            raise ValueError(
                "no z0 candidate clears the margin; largest |X_u0| = "
                f"{abs(v_best):.3e} at z0 = {z_best}"
            )
    return ValidationReport(
        domain=domain, z0=z_best, z0_distance=d_best, x_u0_at_z0=v_best,
        noise_floor=floor, margin_ok=margin_ok,
        scanned=tuple(scanned), ok=domain.verdict != "in" and margin_ok,
    )


def _z0_candidates(mu: DiscreteMeasure) -> list[float]:
    pts = mu.points
    gap = mu.min_gap if math.isfinite(mu.min_gap) else 1.0
    cands = [float(pts[0]) - gap / 2.0, float(pts[0]) - gap]
    for i in range(min(4, pts.size - 1)):
        cands.append(float((pts[i] + pts[i + 1]) / 2.0))
    if not np.any(pts == 0.0):
        cands.insert(0, 0.0)
    return cands


@dataclass(frozen=True)
class TildeElement:
    """alpha * u0 + c with c in L; the unique decomposition on span(u0) + L."""

    alpha: complex
    c: CoefficientVector
    cfg: CounterexampleConfig
    space: SampledSpace

    def __post_init__(self):
        if self.c.size != self.cfg.measure.size:
            raise ValueError("c must be aligned with the master measure")

    @property
    def combined(self) -> np.ndarray:
        return self.alpha * self.cfg.u0.entries + self.c.entries

    @property
    def norm(self) -> float:
        return ell2_norm(CoefficientVector(self.combined), self.cfg.measure)


def eval_g(alpha: complex, z: complex, cfg: CounterexampleConfig,
           space: SampledSpace) -> complex:
    """G_{alpha u0}(z) = (z - z0) X_{D_{z0}(alpha u0)}(z); exactly 0 at z0."""
    z = complex(z)
    if alpha == 0 or z == complex(cfg.z0):
        return 0.0 + 0.0j
    shifted = divide_at(CoefficientVector(alpha * cfg.u0.entries, cfg.u0.tail_law),
                        complex(cfg.z0), cfg.measure)
    return (z - cfg.z0) * eval_x(element(space, shifted), z)


def eval_h(e: TildeElement, z: complex,
           safety_factor: float = DEFAULT_SAFETY_FACTOR) -> complex:
    """H(z) = G_{alpha u0}(z) + X_c(z); on the support the coefficient itself."""
    z = complex(z)
    mu = e.cfg.measure
    m, dist = nearest_index(mu.points, z)
    if dist <= mu.safety_distance(safety_factor):
        return complex(e.combined[m])
    return eval_g(e.alpha, z, e.cfg, e.space) + eval_x(element(e.space, e.c), z)


@dataclass(frozen=True)
class ResidualReport:
    max_residual: float
    count: int
    detail: str = ""


def h3_check_tilde(e: TildeElement, sample: Sequence[complex]) -> ResidualReport:
    """Residual of H* identity: eval with conjugated data vs conjugate values."""
    if not bool(np.all(e.cfg.u0.entries.imag == 0.0)):
        raise ValueError(
            "u0 must be real-entried for the constructive star conjugate; a "
            "complex seed leaves span(u0) under conjugation"
        )
    star = TildeElement(alpha=np.conj(e.alpha), c=conjugate(e.c),
                        cfg=e.cfg, space=e.space)
    worst = 0.0
    for z in sample:
        lhs = eval_h(star, complex(z))
        rhs = np.conj(eval_h(e, np.conj(complex(z))))
        scale = max(abs(rhs), 1e-300)
        worst = max(worst, abs(lhs - rhs) / scale)
    return ResidualReport(max_residual=worst, count=len(sample))


def l_membership(v: CoefficientVector, mu: DiscreteMeasure,
                 schedule: Sequence[int] | None = None) -> tuple[str, str]:
    """(verdict, how) for membership of v in the multiplication domain L.

    Finitely supported vectors are members outright; otherwise the tail-law
    certificate decides, with the partial-sum diagnostic as a fallback.
    """
    nz = np.nonzero(v.entries != 0.0)[0]
    if nz.size == 0 or nz[-1] < mu.size - 1:
        return "in", "finitely supported inside the truncation"
    sched = tuple(schedule) if schedule is not None else _default_schedule(mu.size)
    report = multiplication_domain_check(v, mu, sched)
    how = report.certificate or report.growth_note
    return report.verdict, how


def _default_schedule(n: int) -> tuple[int, ...]:
    out, m = [], 16
    while m < n:
        out.append(m)
        m *= 4
    out.append(n)
    return tuple(out)


def h1_check_tilde(e: TildeElement, w: complex, zero_tol: float = 1e-10,
                   sample: Sequence[complex] = ()) -> tuple[TildeElement, dict]:
    """Divide a verified zero at nonreal w out of H, staying in the subspace.

    Returns the element representing H(.)/(. - w) (alpha component 0, c
    component D_{z0}(alpha u0) + D_w((w - z0) D_{z0}(alpha u0) + c)) plus a
    report with: the intermediate zero residual, the identity residual over
    the sample, and the L-membership verdicts of the produced components.
    """
    w = complex(w)
    if w.imag == 0.0:
        raise ValueError("w must be nonreal")
    cfg, space = e.cfg, e.space
    norm_e = e.norm
    h_at_w = eval_h(e, w)
    if abs(h_at_w) > zero_tol * max(norm_e, 1e-300):
        raise ZeroPreconditionError(h_at_w, zero_tol * norm_e)

    d_u = divide_at(CoefficientVector(e.alpha * cfg.u0.entries, cfg.u0.tail_law),
                    complex(cfg.z0), cfg.measure)
    mid_entries = (w - cfg.z0) * d_u.entries + e.c.entries
    mid = CoefficientVector(mid_entries)
    mid_el = element(space, mid)
    mid_zero = eval_x(mid_el, w)

    d_mid = divide_at(mid, w, cfg.measure)
    result_c = CoefficientVector(d_u.entries + d_mid.entries)
    result = TildeElement(alpha=0.0, c=result_c, cfg=cfg, space=space)

    worst = 0.0
    for z in sample:
        z = complex(z)
        lhs = eval_h(result, z) * (z - w)
        rhs = eval_h(e, z)
        worst = max(worst, abs(lhs - rhs) / (max(norm_e, 1e-300) * (1.0 + abs(z))))

    # membership of the result follows componentwise: the result c-part is
    # D_{z0}(u) plus D_w of the two mid summands, and L is linear
    components = {
        "d_z0_u": d_u,
        "d_w_d_z0_u": divide_at(d_u, w, cfg.measure),
        "d_w_c": divide_at(e.c, w, cfg.measure),
    }
    membership = {}
    for name, comp in components.items():
        verdict, how = l_membership(comp, cfg.measure)
        if verdict == "not_in":
            raise ArithmeticError(
                f"component {name} failed the L-membership check; division "
                "has bounded multipliers, so this indicates a bug"
            )
        membership[name] = [verdict, how]
    combined = "in" if all(v[0] == "in" for v in membership.values()) else "unknown"
    membership["result_c"] = [combined, "sum of the certified components"]
    report = {
        "intermediate_zero": abs(mid_zero),
        "identity_residual": worst,
        "sample_count": len(sample),
        "l_membership": membership,
    }
    return result, report


@dataclass(frozen=True)
class WitnessRow:
    cutoff: int
    distance: float
    value: complex
    limit_value: complex
    ratio: float


@dataclass(frozen=True)
class WitnessTable:
    rows: tuple[WitnessRow, ...]
    z0: float
    limit_value: complex
    h_u0_at_z0: complex
    distance_tail: tuple[float, float]
    growth_ok: bool
    final_over_first_ok: bool
    validation: ValidationReport | None = field(default=None, compare=False)

    @property
    def passed(self) -> bool:
        return self.growth_ok and self.final_over_first_ok

    def to_rows(self) -> list[dict]:
        return [
            {
                "N": r.cutoff,
                "distance": r.distance,
                "re_value": r.value.real,
                "im_value": r.value.imag,
                "ratio": r.ratio,
            }
            for r in self.rows
        ]


def discontinuity_witness(cfg: CounterexampleConfig,
                          space: SampledSpace | None = None,
                          validation: ValidationReport | None = None) -> WitnessTable:
    """The witness table: truncations c_N of u0 approach u0 in norm while their
    evaluations at z0 approach X_{u0}(z0) != 0; the modified interpolant of u0
    vanishes at z0 exactly, so the evaluation/distance ratios grow without
    bound across the schedule.
    """
    if space is None:
        space = space_for(cfg)
    if validation is None:
        validation = validate_config(cfg, space)
    mu = cfg.measure
    z0 = validation.z0
    u0 = cfg.u0.entries
    master = mu.size

    # tail of ||u0||^2 beyond the master truncation, from the law when present
    tail_lo = tail_hi = 0.0
    if cfg.u0.tail_law is not None and mu.tail_law is not None:
        from .laws import square_summable_against, power_tail_brackets

        try:
            converges, env = square_summable_against(cfg.u0.tail_law, mu.tail_law.masses)
            if converges and env is not None:
                tail_lo, tail_hi = power_tail_brackets(env[0], env[1], master)
        except Exception:
            pass
    tail_mid = 0.5 * (tail_lo + tail_hi)

    # H_{u0}(z0) = G_{u0}(z0) = 0 exactly: the (z - z0) factor vanishes.
    h_u0 = eval_g(1.0, complex(z0), cfg, space)

    limit_el = element(space, cfg.u0)
    limit_value = eval_x(limit_el, complex(z0))

    sq_terms = (mu.masses * np.abs(u0) ** 2).tolist()
    rows = []
    for cut in cfg.truncation_schedule:
        c_n = u0.copy()
        c_n[cut:] = 0.0
        value = eval_x(element(space, c_n), complex(z0))
        d2 = math.fsum(sq_terms[cut:]) + tail_mid
        distance = math.sqrt(d2)
        ratio = abs(value - h_u0) / distance if distance > 0 else math.inf
        rows.append(WitnessRow(cutoff=cut, distance=distance, value=value,
                               limit_value=limit_value, ratio=ratio))

    ratios = [r.ratio for r in rows]
    growth_ok = all(b / a >= cfg.growth_threshold for a, b in zip(ratios, ratios[1:]))
    final_ok = ratios[-1] >= cfg.final_over_first * ratios[0] if len(ratios) > 1 else True
    return WitnessTable(
        rows=tuple(rows), z0=z0, limit_value=limit_value, h_u0_at_z0=h_u0,
        distance_tail=(tail_lo, tail_hi), growth_ok=growth_ok,
        final_over_first_ok=final_ok, validation=validation,
    )


def default_config(master: int = 2**15, schedule: tuple[int, ...] | None = None,
                   z0: float = 0.0) -> CounterexampleConfig:
    """The analyzable default: unit masses on the integer lattice, u0 = 1/n."""
    from .laws import PowerLaw
    from .measures import make_measure

    mu = make_measure("integer_lattice", master)
    law = PowerLaw(1.0, -1.0)
    u0 = CoefficientVector(entries=law.value(np.arange(1, master + 1)).astype(complex),
                           tail_law=law)
    if schedule is None:
        schedule = tuple(2**k for k in range(4, 12))
    return CounterexampleConfig(measure=mu, u0=u0, z0=z0,
                                truncation_schedule=schedule)
