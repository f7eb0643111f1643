"""Discrete measures on the real line and coefficient vectors in l2(mu).

A measure is a strictly increasing finite list of support points with positive
masses, optionally backed by a symbolic tail law that regenerates the
truncation at any size and certifies tail sums.  Vectors are aligned complex
coefficient sequences with their own optional law.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .laws import (
    GeometricLaw,
    Law,
    PowerLaw,
    QuotientLaw,
    CertificateUnavailable,
    parse_law,
    power_envelope,
    power_tail_brackets,
)
from .numerics import (
    DEFAULT_SAFETY_FACTOR,
    SupportProximityError,
    csum,
    prefix_sums,
)

MEASURE_FAMILIES = ("integer_lattice", "scaled_lattice", "geometric_support", "explicit_list")


@dataclass(frozen=True)
class MeasureLaw:
    """Tail law of a measure: one law for the points, one for the masses."""

    points: Law
    masses: Law

    def __str__(self) -> str:
        return f"t_n = {self.points}, mu_n = {self.masses}"


@dataclass(frozen=True)
class DiscreteMeasure:
    points: np.ndarray
    masses: np.ndarray
    tail_law: MeasureLaw | None = None

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        ms = np.asarray(self.masses, dtype=float)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "masses", ms)
        if pts.ndim != 1 or pts.size < 1:
            raise ValueError("a measure needs at least one support point")
        if ms.shape != pts.shape:
            raise ValueError("points and masses must have equal length")
        gaps = np.diff(pts)
        if pts.size > 1 and not np.all(gaps > 0):
            bad = int(np.argmin(gaps))
            raise ValueError(
                f"support points must be strictly increasing; offending pair "
                f"at indices {bad}, {bad + 1}: {pts[bad]!r}, {pts[bad + 1]!r}"
            )
        if not np.all(ms > 0):
            raise ValueError("all masses must be strictly positive")
        if self.tail_law is not None:
            regen_p = np.asarray(self.tail_law.points.value(np.arange(1, pts.size + 1)), float)
            regen_m = np.asarray(self.tail_law.masses.value(np.arange(1, pts.size + 1)), float)
            if not (np.array_equal(regen_p, pts) and np.array_equal(regen_m, ms)):
                raise ValueError("tail law does not regenerate the stored truncation exactly")

    @property
    def size(self) -> int:
        return int(self.points.size)

    @property
    def min_gap(self) -> float:
        if self.points.size == 1:
            return math.inf
        return float(np.min(np.diff(self.points)))

    def safety_distance(self, factor: float = DEFAULT_SAFETY_FACTOR) -> float:
        gap = self.min_gap
        return factor * (gap if math.isfinite(gap) else 1.0)

    def regenerate(self, new_size: int) -> "DiscreteMeasure":
        """Extend (or shrink) the truncation using the tail law."""
        if self.tail_law is None:
            raise ValueError("measure has no tail law; cannot regenerate")
        n = np.arange(1, new_size + 1)
        return DiscreteMeasure(
            points=np.asarray(self.tail_law.points.value(n), float),
            masses=np.asarray(self.tail_law.masses.value(n), float),
            tail_law=self.tail_law,
        )


@dataclass(frozen=True)
class CoefficientVector:
    entries: np.ndarray
    tail_law: Law | None = None

    def __post_init__(self):
        arr = np.asarray(self.entries, dtype=complex)
        object.__setattr__(self, "entries", arr)
        if arr.ndim != 1:
            raise ValueError("coefficient entries must be one-dimensional")

    @property
    def size(self) -> int:
        return int(self.entries.size)

    def is_real(self) -> bool:
        return bool(np.all(self.entries.imag == 0.0))


def make_measure(family: str, N: int, params: Sequence[float] = (),
                 points: Sequence[float] | None = None,
                 masses: Sequence[float] | None = None) -> DiscreteMeasure:
    """Build a measure from one of the supported families.

    * ``integer_lattice``   params: [mass=1]           t_n = n
    * ``scaled_lattice``    params: [a, mass=1]        t_n = a*n
    * ``geometric_support`` params: [ratio, mass=1]    t_n = ratio**(n-1)
    * ``explicit_list``     pass ``points`` and ``masses`` directly
    """
    if family not in MEASURE_FAMILIES:
        raise ValueError(f"unknown measure family {family!r}; expected one of {MEASURE_FAMILIES}")
    if family == "explicit_list":
        if points is None or masses is None:
            raise ValueError("explicit_list requires points and masses")
        return DiscreteMeasure(np.asarray(points, float), np.asarray(masses, float))
    if N < 1:
        raise ValueError("N must be at least 1")
    n = np.arange(1, N + 1, dtype=float)
    if family == "integer_lattice":
        mass = float(params[0]) if params else 1.0
        law = MeasureLaw(PowerLaw(1.0, 1.0), PowerLaw(mass, 0.0))
    elif family == "scaled_lattice":
        if not params:
            raise ValueError("scaled_lattice requires params [a] or [a, mass]")
        a = float(params[0])
        if a <= 0:
            raise ValueError("scaled_lattice scale must be positive")
        mass = float(params[1]) if len(params) > 1 else 1.0
        law = MeasureLaw(PowerLaw(a, 1.0), PowerLaw(mass, 0.0))
    else:  # geometric_support
        if not params:
            raise ValueError("geometric_support requires params [ratio] or [ratio, mass]")
        ratio = float(params[0])
        if ratio <= 1:
            raise ValueError("geometric_support ratio must exceed 1")
        mass = float(params[1]) if len(params) > 1 else 1.0
        if (N - 1) * math.log(ratio) > 700:
            raise ValueError("geometric support overflows float64 at this N")
        law = MeasureLaw(GeometricLaw(1.0, ratio), PowerLaw(mass, 0.0))
    pts = np.asarray(law.points.value(np.arange(1, N + 1)), float)
    ms = np.asarray(law.masses.value(np.arange(1, N + 1)), float)
    return DiscreteMeasure(points=pts, masses=ms, tail_law=law)


def _check_aligned(v: CoefficientVector, mu: DiscreteMeasure) -> None:
    if v.size != mu.size:
        raise ValueError(f"vector length {v.size} does not match measure size {mu.size}")


def ell2_norm(v: CoefficientVector, mu: DiscreteMeasure) -> float:
    """sqrt(sum mu_n |v_n|^2), exactly rounded in ascending index order."""
    _check_aligned(v, mu)
    return math.sqrt(csum(mu.masses * np.abs(v.entries) ** 2))


def conjugate(v: CoefficientVector) -> CoefficientVector:
    law = v.tail_law
    # power/geometric laws used here are real-coefficient, hence self-conjugate
    return CoefficientVector(entries=np.conj(v.entries), tail_law=law)


def divide_at(v: CoefficientVector, w: complex, mu: DiscreteMeasure,
              safety_factor: float = DEFAULT_SAFETY_FACTOR) -> CoefficientVector:
    """Entrywise v_n / (t_n - w); w must stay clear of the support."""
    _check_aligned(v, mu)
    dist = np.abs(mu.points - w)
    tol = mu.safety_distance(safety_factor)
    i = int(np.argmin(dist))
    if dist[i] <= tol:
        raise SupportProximityError(i, float(dist[i]), tol)
    entries = v.entries / (mu.points - w)
    law = None
    if v.tail_law is not None and mu.tail_law is not None:
        if isinstance(v.tail_law, PowerLaw) and isinstance(mu.tail_law.points, PowerLaw):
            law = QuotientLaw(base=v.tail_law, points=mu.tail_law.points, shifts=(complex(w),))
        elif isinstance(v.tail_law, QuotientLaw) and v.tail_law.points == mu.tail_law.points:
            law = QuotientLaw(base=v.tail_law.base, points=v.tail_law.points,
                              shifts=v.tail_law.shifts + (complex(w),))
    return CoefficientVector(entries=entries, tail_law=law)


@dataclass(frozen=True)
class DomainReport:
    """Outcome of the multiplication-operator domain check."""

    partial_sums: tuple[tuple[int, float], ...]
    verdict: str  # "in" | "not_in" | "unknown"
    certificate: str | None
    growth_note: str = ""

    @property
    def in_domain(self) -> bool | None:
        return {"in": True, "not_in": False}.get(self.verdict)


def multiplication_domain_check(v: CoefficientVector, mu: DiscreteMeasure,
                                schedule: Sequence[int]) -> DomainReport:
    """Partial sums P_M = sum_{n<=M} mu_n t_n^2 |v_n|^2 and a domain verdict.

    The verdict comes from the tail laws when both are present (certified);
    otherwise a growth diagnostic on the computed partial sums is reported.
    """
    _check_aligned(v, mu)
    sched = [int(m) for m in schedule]
    if not sched:
        raise ValueError("schedule must not be empty")
    if any(b <= a for a, b in zip(sched, sched[1:])):
        raise ValueError("schedule must be strictly increasing")
    if sched[-1] > mu.size:
        raise ValueError(f"schedule cutoff {sched[-1]} exceeds truncation size {mu.size}")
    terms = mu.masses * mu.points**2 * np.abs(v.entries) ** 2
    sums = prefix_sums(terms, sched)
    partial = tuple(zip(sched, sums))

    if v.tail_law is not None and mu.tail_law is not None:
        try:
            from .laws import square_summable_against

            converges, _ = square_summable_against(v.tail_law, mu.tail_law.masses,
                                                   weight_law=mu.tail_law.points)
            verdict = "in" if converges else "not_in"
            return DomainReport(partial, verdict, certificate=str(v.tail_law))
        except (CertificateUnavailable, ValueError):
            pass

    note = _growth_note(partial)
    return DomainReport(partial, "unknown", certificate=None, growth_note=note)


def _growth_note(partial: tuple[tuple[int, float], ...]) -> str:
    if len(partial) < 2 or partial[-2][1] == 0:
        return "insufficient schedule for a growth diagnostic"
    ratio = partial[-1][1] / partial[-2][1]
    trend = "divergent-looking" if ratio > 1.05 else "convergent-looking"
    return f"last partial-sum ratio {ratio:.6g} ({trend})"


def l2_membership(v: CoefficientVector, mu: DiscreteMeasure) -> tuple[bool | None, tuple[float, float] | None]:
    """Certified l2(mu) membership of the continued sequence, with tail brackets.

    Returns (verdict, (lo, hi) tail of sum_{n>N} mu_n |v_n|^2) when the laws
    certify it; (None, None) when no certificate applies.
    """
    if v.tail_law is None or mu.tail_law is None:
        return None, None
    try:
        from .laws import square_summable_against

        converges, env = square_summable_against(v.tail_law, mu.tail_law.masses)
        if not converges:
            return False, None
        if env is None:
            return True, None
        c, s = env
        return True, power_tail_brackets(c, s, mu.size)
    except (CertificateUnavailable, ValueError):
        return None, None


def vector_to_csv(v: CoefficientVector, mu: DiscreteMeasure, path: str) -> None:
    """Export a vector as CSV with columns index, t, mass, re, im."""
    _check_aligned(v, mu)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["index", "t", "mass", "re", "im"])
        for i in range(mu.size):
            writer.writerow([
                i + 1,
                "%.17g" % mu.points[i],
                "%.17g" % mu.masses[i],
                "%.17g" % v.entries[i].real,
                "%.17g" % v.entries[i].imag,
            ])


def measure_from_config(cfg: dict) -> DiscreteMeasure:
    """Load a measure from a config mapping with keys family, N, params[, points, masses]."""
    family = cfg.get("family")
    if family is None:
        raise ValueError("measure config needs a 'family' key")
    if family == "explicit_list":
        return make_measure(family, N=len(cfg.get("points", ())),
                            points=cfg.get("points"), masses=cfg.get("masses"))
    return make_measure(family, N=int(cfg["N"]), params=cfg.get("params", ()))


def vector_from_config(cfg: dict, mu: DiscreteMeasure) -> CoefficientVector:
    """Load a vector from a config mapping with keys entries or tail_law."""
    law = parse_law(cfg["tail_law"]) if "tail_law" in cfg else None
    if "entries" in cfg:
        raw = cfg["entries"]
        entries = np.array([complex(e[0], e[1]) if isinstance(e, (list, tuple)) else complex(e)
                            for e in raw])
        if entries.size != mu.size:
            raise ValueError("vector entries do not match the measure size")
    elif law is not None:
        entries = np.asarray(law.value(np.arange(1, mu.size + 1)), complex)
    else:
        raise ValueError("vector config needs 'entries' or 'tail_law'")
    return CoefficientVector(entries=entries, tail_law=law)
