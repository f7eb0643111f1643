"""Real-symmetric meromorphic functions with prescribed principal parts.

The series is a sum of corrected terms: each principal part minus the Taylor
polynomial (about 0) of its own expansion, with per-pole correction degrees
chosen so that the tail terms meet a summable budget on the validity disk.
For a simple pole the corrected term has the exact closed form

    c/(z-a) - T_d(z) = c * (z/a)^(d+1) / (z-a),

which avoids the catastrophic cancellation of subtracting the polynomial.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .numerics import (
    DEFAULT_SAFETY_FACTOR,
    SupportProximityError,
    csum_complex,
    richardson_to_zero,
)


class ExtrapolationError(ArithmeticError):
    """Residue extrapolation failed to converge; carries the diagnostic table."""

    def __init__(self, message: str, table: list):
        super().__init__(message)
        self.table = table


@dataclass(frozen=True)
class MittagLefflerSeries:
    poles: np.ndarray
    coeffs: tuple[tuple[complex, ...], ...]
    correction_degrees: np.ndarray
    radius_of_validity: float
    tail_budget: float

    def __post_init__(self):
        object.__setattr__(self, "poles", np.asarray(self.poles, float))
        object.__setattr__(self, "correction_degrees", np.asarray(self.correction_degrees, int))
        if len(self.coeffs) != self.poles.size:
            raise ValueError("one principal-part tuple per pole required")
        object.__setattr__(self, "_c1", np.array([c[0] for c in self.coeffs], complex))
        object.__setattr__(self, "_simple", all(len(c) == 1 for c in self.coeffs))

    @property
    def size(self) -> int:
        return int(self.poles.size)

    @property
    def min_gap(self) -> float:
        if self.poles.size == 1:
            return math.inf
        return float(np.min(np.diff(np.sort(self.poles))))

    def is_simple(self) -> bool:
        return self.__dict__["_simple"]


def build_series(poles: Sequence[float], coeffs, R: float | None = None,
                 tail_budget: float = 1e-9) -> MittagLefflerSeries:
    """Series with the given simple or higher-order principal parts.

    ``coeffs`` maps each pole to its principal coefficients c_{n,1}..c_{n,K};
    a bare complex is promoted to a simple pole.  Correction degrees are 0 for
    |a_n| <= 2R and otherwise the minimal d with
    |c_{n,1}|/|a_n| * (R/|a_n|)^(d+1) / (1 - R/|a_n|) <= tail_budget * 2^-n.

    Without an explicit R the series is the plain corrected-free partial
    fraction sum, exact at every non-pole point (infinite validity radius);
    supply a finite R to activate the tail-correction machinery.
    """
    a = np.asarray(poles, float)
    if a.size != np.unique(a).size:
        raise ValueError("poles must be distinct")
    if tail_budget <= 0:
        raise ValueError("tail_budget must be positive")
    norm_coeffs = []
    for c in coeffs:
        if isinstance(c, (tuple, list, np.ndarray)):
            if len(c) < 1:
                raise ValueError("each pole needs at least one principal coefficient")
            norm_coeffs.append(tuple(complex(x) for x in c))
        else:
            norm_coeffs.append((complex(c),))
    if R is None:
        R = math.inf
    degrees = np.zeros(a.size, dtype=int)
    for i in range(a.size):
        aa = abs(a[i])
        if aa <= 2.0 * R or aa == 0.0:
            continue
        q = R / aa
        c1 = abs(norm_coeffs[i][0])
        if c1 == 0.0:
            continue
        target = tail_budget * 2.0 ** (-min(i + 1, 1000))
        # minimal d with (c1/aa) * q^(d+1)/(1-q) <= target
        rhs = target * (1.0 - q) * aa / c1
        if rhs >= 1.0:
            continue
        degrees[i] = max(0, math.ceil(math.log(rhs) / math.log(q)) - 1)
    return MittagLefflerSeries(poles=a, coeffs=tuple(norm_coeffs),
                               correction_degrees=degrees,
                               radius_of_validity=float(R), tail_budget=tail_budget)


def _corrected_higher_term(z: complex, a: float, coeffs: tuple[complex, ...], d: int) -> complex:
    """Corrected term for a pole with K >= 2, degree-d Taylor correction.

    Uses (z-a)^-k = (-1)^k a^-k sum_j C(k-1+j, j) (z/a)^j and sums the
    remainder j > d directly; converges geometrically for |z/a| < 1/2.
    """
    total = 0.0 + 0.0j
    u = z / a
    for k, c in enumerate(coeffs, start=1):
        if c == 0:
            continue
        if d == 0:
            total += c / (z - a) ** k
            continue
        base = c * (-1.0) ** k / a**k
        binom = 1.0
        for j in range(1, d + 1):
            binom *= (k - 1 + j) / j
        term_j = d + 1
        binom *= (k + d) / (d + 1)
        upow = u ** (d + 1)
        acc = 0.0 + 0.0j
        while True:
            t = binom * upow
            acc += t
            if abs(t) <= 1e-18 * max(abs(acc), 1.0) or term_j > d + 2000:
                break
            term_j += 1
            binom *= (k - 1 + term_j) / term_j
            upow *= u
        total += base * acc
    return total


def corrected_term(f: MittagLefflerSeries, i: int, z: complex) -> complex:
    """Corrected term of pole i (0-based) at z."""
    a = float(f.poles[i])
    d = int(f.correction_degrees[i])
    coeffs = f.coeffs[i]
    if len(coeffs) == 1:
        c = coeffs[0]
        if d == 0:
            return c / (z - a)
        return c * (z / a) ** (d + 1) / (z - a)
    return _corrected_higher_term(z, a, coeffs, d)


def eval_series(f: MittagLefflerSeries, z: complex,
                safety_factor: float = DEFAULT_SAFETY_FACTOR) -> complex:
    """Sum of corrected terms in ascending pole order, exactly rounded."""
    z = complex(z)
    if abs(z) > f.radius_of_validity:
        raise ValueError(
            f"|z| = {abs(z):.6g} exceeds the certified radius {f.radius_of_validity:.6g}"
        )
    gap = f.min_gap
    tol = safety_factor * (gap if math.isfinite(gap) else 1.0)
    dist = np.abs(z - f.poles)
    i = int(np.argmin(dist))
    if dist[i] <= tol:
        raise SupportProximityError(i, float(dist[i]), tol)
    if f.is_simple():
        c1 = f.__dict__["_c1"]
        d = f.correction_degrees
        terms = c1 / (z - f.poles)
        if np.any(d > 0):
            idx = np.nonzero(d > 0)[0]
            with np.errstate(under="ignore"):
                terms[idx] = terms[idx] * (z / f.poles[idx]) ** (d[idx] + 1)
        return csum_complex(terms)
    terms = np.array([corrected_term(f, i, z) for i in range(f.size)])
    return csum_complex(terms)


def eval_series_minus_pole(f: MittagLefflerSeries, skip: int, z: complex) -> complex:
    """f(z) minus the full corrected term of pole ``skip`` (0-based).

    Well defined arbitrarily close to that pole; used for removable forms.
    """
    z = complex(z)
    if f.is_simple():
        c1 = f.__dict__["_c1"].copy()
        d = f.correction_degrees
        denom = z - f.poles
        denom = np.where(np.arange(f.size) == skip, 1.0, denom)
        terms = c1 / denom
        if np.any(d > 0):
            idx = np.nonzero(d > 0)[0]
            with np.errstate(under="ignore"):
                terms[idx] = terms[idx] * (z / f.poles[idx]) ** (d[idx] + 1)
        terms[skip] = 0.0
        return csum_complex(terms)
    terms = np.array([corrected_term(f, i, z) if i != skip else 0.0 for i in range(f.size)])
    return csum_complex(terms)


def residue_check(f: MittagLefflerSeries, n: int) -> complex:
    """Numerically extrapolated residue at pole n (1-based).

    Samples (z - a_n) f(z) at shrinking real offsets and Richardson-extrapolates
    to zero step; higher-order principal parts are subtracted exactly first.
    """
    if not 1 <= n <= f.size:
        raise IndexError(f"pole index {n} out of range 1..{f.size}")
    i = n - 1
    a = float(f.poles[i])
    coeffs = f.coeffs[i]
    gap = f.min_gap
    scale = min(1.0, gap / 2.0) if math.isfinite(gap) else 1.0
    steps = [scale * 10.0**-k for k in range(4, 8)]
    values = []
    for h in steps:
        z = a + h
        val = eval_series(f, z)
        for k in range(2, len(coeffs) + 1):
            val -= coeffs[k - 1] / (z - a) ** k
        values.append((z - a) * val)
    est, last_corr = richardson_to_zero(steps, values)
    tol = 1e-6 * max(abs(est), 1e-300)
    if last_corr > tol and abs(est - values[-1]) > 1e-4 * max(abs(est), 1e-300):
        raise ExtrapolationError(
            f"residue extrapolation at pole {n} did not converge "
            f"(last correction {last_corr:.3e}, estimate {est:.6g})",
            table=list(zip(steps, values)),
        )
    return est


def series_to_dict(f: MittagLefflerSeries) -> dict:
    return {
        "poles": f.poles.tolist(),
        "coeffs": [[[c.real, c.imag] for c in cs] for cs in f.coeffs],
        "correction_degrees": f.correction_degrees.tolist(),
        "radius_of_validity": f.radius_of_validity,
        "tail_budget": f.tail_budget,
    }


def series_from_dict(data: dict) -> MittagLefflerSeries:
    coeffs = tuple(tuple(complex(c[0], c[1]) for c in cs) for cs in data["coeffs"])
    return MittagLefflerSeries(
        poles=np.asarray(data["poles"], float),
        coeffs=coeffs,
        correction_degrees=np.asarray(data["correction_degrees"], int),
        radius_of_validity=float(data["radius_of_validity"]),
        tail_budget=float(data["tail_budget"]),
    )
