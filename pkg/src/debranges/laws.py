"""Symbolic tail laws for truncated infinite sequences.

A law describes how a sequence continues beyond the stored truncation.  Two
primitive shapes cover every analytic family used here:

* power laws      ``c * n^p``       (lattices, coefficient seeds like 1/n)
* geometric laws  ``c * r^(n-1)``   (geometrically growing supports)

Dividing a vector by ``(t_n - w)`` factors produces a quotient law that keeps
an exact per-index value and a certified power envelope for tail estimates.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Union

import numpy as np


class CertificateUnavailable(Exception):
    """No closed-form tail certificate exists for the requested combination."""


@dataclass(frozen=True)
class PowerLaw:
    """value(n) = coef * n**exponent for 1-based n."""

    coef: float
    exponent: float

    def value(self, n: np.ndarray | int):
        return self.coef * np.asarray(n, dtype=float) ** self.exponent

    def __str__(self) -> str:
        if self.exponent == 0:
            return _fmt(self.coef)
        body = "n" if self.exponent == 1 else f"n^{_fmt(self.exponent)}"
        return body if self.coef == 1 else f"{_fmt(self.coef)}*{body}"


@dataclass(frozen=True)
class GeometricLaw:
    """value(n) = coef * ratio**(n-1) for 1-based n."""

    coef: float
    ratio: float

    def value(self, n: np.ndarray | int):
        return self.coef * self.ratio ** (np.asarray(n, dtype=float) - 1.0)

    def __str__(self) -> str:
        body = f"{_fmt(self.ratio)}^(n-1)"
        return body if self.coef == 1 else f"{_fmt(self.coef)}*{body}"


@dataclass(frozen=True)
class QuotientLaw:
    """A base law divided by factors (points(n) - shift) for each stored shift.

    Produced by coefficient division; ``envelope`` gives a certified power
    bound valid from ``envelope_start`` on.
    """

    base: PowerLaw
    points: PowerLaw
    shifts: tuple[complex, ...]

    def value(self, n: np.ndarray | int):
        vals = self.base.value(n).astype(complex)
        t = self.points.value(n)
        for w in self.shifts:
            vals = vals / (t - w)
        return vals

    def __str__(self) -> str:
        denom = " * ".join(f"({self.points} - {w})" for w in self.shifts)
        return f"({self.base}) / ({denom})"


Law = Union[PowerLaw, GeometricLaw, QuotientLaw]

_POWER_RE = re.compile(
    r"^\s*(?P<coef>[-+]?\d+\.?\d*(?:[eE][-+]?\d+)?)?\s*"
    r"(?:(?P<op>[*/])?\s*n\s*(?:(?:\^|\*\*)\s*(?P<exp>[-+]?\d+\.?\d*))?)?\s*$"
)
_GEOM_RE = re.compile(
    r"^\s*(?P<coef>[-+]?\d+\.?\d*(?:[eE][-+]?\d+)?\s*\*\s*)?"
    r"(?P<ratio>\d+\.?\d*)\s*(?:\^|\*\*)\s*\(?\s*n\s*(?:-\s*1)?\s*\)?\s*$"
)


def parse_law(text: str) -> Law:
    """Parse a law string such as ``"1/n"``, ``"n"``, ``"2*n^2"`` or ``"2^(n-1)"``."""
    m = _GEOM_RE.match(text)
    if m:
        coef = float(m.group("coef").rstrip(" *")) if m.group("coef") else 1.0
        return GeometricLaw(coef=coef, ratio=float(m.group("ratio")))
    m = _POWER_RE.match(text)
    if m and (m.group("coef") is not None or "n" in text):
        coef = float(m.group("coef")) if m.group("coef") is not None else 1.0
        if "n" not in text:
            return PowerLaw(coef=coef, exponent=0.0)
        exp = float(m.group("exp")) if m.group("exp") is not None else 1.0
        if m.group("op") == "/":
            exp = -exp
        return PowerLaw(coef=coef, exponent=exp)
    raise ValueError(f"cannot parse tail law {text!r}")


def power_envelope(law: Law) -> tuple[float, float, int]:
    """Certified bound |value(n)| <= C * n^s valid for n >= n0; (C, s, n0)."""
    if isinstance(law, PowerLaw):
        return abs(law.coef), law.exponent, 1
    if isinstance(law, QuotientLaw):
        c, s, n0 = abs(law.base.coef), law.base.exponent, 1
        tp = law.points
        if tp.exponent <= 0:
            raise CertificateUnavailable("support law must grow for a quotient envelope")
        for w in law.shifts:
            # from |t(n)| >= 2|w| on, |t(n) - w| >= |t(n)|/2
            start = math.ceil((2.0 * abs(w) / abs(tp.coef)) ** (1.0 / tp.exponent)) + 1
            n0 = max(n0, start)
            c *= 2.0 / abs(tp.coef)
            s -= tp.exponent
        return c, s, n0
    raise CertificateUnavailable(f"no power envelope for {type(law).__name__}")


def power_tail_brackets(coef: float, exponent: float, start: int) -> tuple[float, float]:
    """Brackets (lo, hi) of sum_{n > start} coef * n^exponent via integral comparison.

    Requires exponent < -1 and coef >= 0.
    """
    if exponent >= -1:
        raise ValueError("tail diverges: exponent >= -1")
    k = -(exponent + 1.0)
    lo = coef * (start + 1.0) ** (-k) / k
    hi = coef * float(start) ** (-k) / k
    return lo, hi


def combined_exponent(*laws: Law) -> float:
    """Exponent of the product of power envelopes (raises if any is geometric)."""
    total = 0.0
    for law in laws:
        _, s, _ = power_envelope(law)
        total += s
    return total


def square_summable_against(vector_law: Law, mass_law: Law,
                            weight_law: Law | None = None) -> tuple[bool, tuple[float, float] | None]:
    """Does sum mass(n) * weight(n)^2 * |vector(n)|^2 converge?

    Returns (converges, tail-brackets-from-the-truncation) where the brackets
    are evaluated lazily by the caller via :func:`power_tail_brackets`; here we
    only report convergence and the envelope constants via a closure-free pair.
    Geometric mass/support laws fall back to simple dominance rules.
    """
    try:
        c_v, s_v, _ = power_envelope(vector_law)
        c_m, s_m, _ = power_envelope(mass_law)
        s = s_m + 2.0 * s_v
        c = c_m * c_v * c_v
        if weight_law is not None:
            c_w, s_w, _ = power_envelope(weight_law)
            s += 2.0 * s_w
            c *= c_w * c_w
        return s < -1.0, (c, s)
    except CertificateUnavailable:
        if isinstance(vector_law, GeometricLaw) and abs(vector_law.ratio) < 1:
            geometric_ok = True
            if isinstance(mass_law, GeometricLaw) and abs(mass_law.ratio) * vector_law.ratio ** 2 >= 1:
                geometric_ok = False
            if weight_law is not None and isinstance(weight_law, GeometricLaw):
                if (abs(weight_law.ratio) ** 2) * (vector_law.ratio ** 2) >= 1:
                    geometric_ok = False
            if geometric_ok:
                return True, None
        raise


def _fmt(x: float) -> str:
    if x == int(x) and abs(x) < 1e15:
        return str(int(x))
    return repr(x)
