"""Deterministic summation and small numeric helpers shared by all modules.

Every series in this package is accumulated in ascending index order with
exactly rounded (Shewchuk) summation, so results are bit-reproducible across
runs and independent of how the terms were produced.
"""

from __future__ import annotations

import math
from typing import Iterable, Sequence

import numpy as np

#: default factor applied to the minimum support gap to decide whether an
#: evaluation point is "on" a support point / pole.
DEFAULT_SAFETY_FACTOR = 1e-9

#: largest log-modulus that can be exponentiated into a finite float64.
MAX_EXP_LOG = 709.0


class EvalRangeError(ArithmeticError):
    """Raised when a requested value cannot be represented in float64."""


class SupportProximityError(ValueError):
    """Raised when an evaluation point is too close to a support point/pole."""

    def __init__(self, index: int, distance: float, tolerance: float):
        self.index = index
        self.distance = distance
        self.tolerance = tolerance
        super().__init__(
            f"evaluation point within {distance:.3e} of support point #{index} "
            f"(safety tolerance {tolerance:.3e})"
        )


def csum(values: Iterable[float] | np.ndarray) -> float:
    """Exactly rounded sum of real terms (fixed ascending order by convention)."""
    if isinstance(values, np.ndarray):
        values = values.tolist()
    return math.fsum(values)


def csum_complex(values: np.ndarray) -> complex:
    """Exactly rounded sum of complex terms, real and imaginary parts separately."""
    arr = np.asarray(values)
    return complex(math.fsum(np.real(arr).tolist()), math.fsum(np.imag(arr).tolist()))


def prefix_sums(values: np.ndarray, cutoffs: Sequence[int]) -> list[float]:
    """Exactly rounded partial sums at each cutoff (1-based, inclusive)."""
    vals = np.asarray(values).tolist()
    return [math.fsum(vals[:m]) for m in cutoffs]


def from_polar(log_modulus: float, phase: float) -> complex:
    """Reconstruct a complex value from (log-modulus, phase); refuse overflow."""
    if log_modulus == -math.inf:
        return 0.0 + 0.0j
    if log_modulus > MAX_EXP_LOG:
        raise EvalRangeError(
            f"log-modulus {log_modulus:.6g} exceeds the float64 range; "
            "use the log-space form of this value"
        )
    return math.exp(log_modulus) * complex(math.cos(phase), math.sin(phase))


def nearest_index(points: np.ndarray, z: complex) -> tuple[int, float]:
    """Index (0-based) of the support point nearest to z and the distance."""
    d = np.abs(z - points)
    i = int(np.argmin(d))
    return i, float(d[i])


def richardson_to_zero(steps: Sequence[float], values: Sequence[complex]) -> tuple[complex, float]:
    """Neville extrapolation of values sampled at step sizes ``steps`` to step 0.

    Returns the extrapolated value and the magnitude of the last correction,
    which serves as the convergence diagnostic.
    """
    n = len(steps)
    if n < 2 or n != len(values):
        raise ValueError("need at least two (step, value) samples")
    tab = [complex(v) for v in values]
    last_corr = math.inf
    for j in range(1, n):
        for i in range(n - j):
            h_i, h_ij = steps[i], steps[i + j]
            tab[i] = (h_i * tab[i + 1] - h_ij * tab[i]) / (h_i - h_ij)
        last_corr = abs(tab[0] - tab[1]) if n - j >= 2 else last_corr
    return tab[0], float(last_corr)


def rel_err(approx: complex, exact: complex) -> float:
    """|approx - exact| / |exact| with a guard for exact == 0."""
    scale = abs(exact)
    if scale == 0.0:
        return abs(approx)
    return abs(approx - exact) / scale
