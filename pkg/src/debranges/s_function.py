"""The auxiliary entire function S = Pi * exp(T) with prescribed |S'(t_n)|.

Given a measure and nonzero real targets s_n with sum 1/(s_n^2 mu_n) finite,
the construction takes the canonical product Pi over the support, residues

    c_n = log|s_n / Pi'(t_n)| / Pi'(t_n),

a partial-fraction series f with those residues, and T = Pi * f.  The pole of
f at t_n cancels the zero of Pi, giving T(t_n) = log|s_n / Pi'(t_n)| exactly
and hence |S'(t_n)| = |s_n|.

Scale discipline: Pi'(t_n) is exponentially large in n, so residues are carried
as (log-modulus, sign) pairs alongside their float values (which may underflow
to an exact and harmless zero), and every composite quantity is assembled in
log space before a single final exponentiation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .laws import PowerLaw, power_tail_brackets
from .measures import CoefficientVector, DiscreteMeasure, ell2_norm
from .mittag_leffler import (
    MittagLefflerSeries,
    build_series,
    eval_series,
    eval_series_minus_pole,
    series_to_dict,
)
from .numerics import csum, from_polar, nearest_index
from .weierstrass import (
    WeierstrassProduct,
    build_product,
    derivative_logs,
    eval_product,
    eval_product_over_root,
    product_to_dict,
)

TARGET_POLICIES = ("default", "explicit")

#: distance (in units of the minimum gap) below which T evaluation switches to
#: the removable-singularity form.
REROUTE_GAP_FRACTION = 0.05


class TargetValidationError(ValueError):
    """Explicit targets violate the nonzero or summability requirements."""


@dataclass(frozen=True)
class TargetSet:
    values: np.ndarray
    policy: str
    law: PowerLaw | None = None

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, float))

    @property
    def size(self) -> int:
        return int(self.values.size)


def choose_targets(mu: DiscreteMeasure, policy: str = "default",
                   values=None, law: PowerLaw | None = None) -> TargetSet:
    """Targets s_n for the derivative moduli of S.

    The default policy takes |s_n| = n / sqrt(mu_n) (positive sign), so that
    sum 1/(s_n^2 mu_n) = sum 1/n^2 is certified convergent.  Explicit values
    are validated: no zeros, and the summability requirement must hold either
    by a supplied power law or by a partial-sum growth heuristic.
    """
    if policy not in TARGET_POLICIES:
        raise ValueError(f"unknown target policy {policy!r}")
    if policy == "default":
        n = np.arange(1, mu.size + 1, dtype=float)
        vals = n / np.sqrt(mu.masses)
        tlaw = None
        if mu.tail_law is not None and isinstance(mu.tail_law.masses, PowerLaw):
            m = mu.tail_law.masses
            tlaw = PowerLaw(coef=m.coef ** -0.5, exponent=1.0 - m.exponent / 2.0)
        return TargetSet(values=vals, policy="default", law=tlaw)

    vals = np.asarray(values, dtype=float)
    if vals.shape != mu.points.shape:
        raise TargetValidationError("explicit targets must match the measure size")
    if np.any(vals == 0.0):
        raise TargetValidationError("targets must be nonzero")
    terms = 1.0 / (vals**2 * mu.masses)
    if law is not None:
        mass_law = mu.tail_law.masses if mu.tail_law is not None else PowerLaw(1.0, 0.0)
        exponent = -(2.0 * law.exponent) - (mass_law.exponent if isinstance(mass_law, PowerLaw) else 0.0)
        if exponent >= -1.0:
            raise TargetValidationError(
                f"sum 1/(s_n^2 mu_n) diverges: tail exponent {exponent:g} >= -1"
            )
        return TargetSet(values=vals, policy="explicit", law=law)
    # growth heuristic: a convergent tail leaves the second-half ratio near 1
    full = csum(terms)
    half = csum(terms[: mu.size // 2]) if mu.size >= 2 else full
    if half > 0 and full / half >= 1.5:
        raise TargetValidationError(
            f"sum 1/(s_n^2 mu_n) looks divergent: partial-sum ratio {full / half:.4g}"
        )
    return TargetSet(values=vals, policy="explicit", law=None)


@dataclass(frozen=True)
class SFunction:
    product: WeierstrassProduct
    correction: MittagLefflerSeries
    targets: TargetSet
    residues: np.ndarray          # float c_n; exact zeros where they underflow
    log_residues: np.ndarray      # log|c_n|
    residue_signs: np.ndarray
    t_at_support: np.ndarray      # T(t_n) = log|s_n / Pi'(t_n)| by the collapse
    s_prime_logs: np.ndarray      # log|S'(t_n)|
    s_prime_signs: np.ndarray
    sum_bound: float              # sum_{n<=N} 1/(s_n^2 mu_n)
    sum_tail: tuple[float, float] | None
    radius_of_validity: float
    measure: DiscreteMeasure

    @property
    def size(self) -> int:
        return int(self.product.size)


def build_s(mu: DiscreteMeasure, targets: TargetSet | None = None,
            R: float | None = None, tail_budget: float = 1e-9) -> SFunction:
    """Assemble S for the measure; derivative targets default to n/sqrt(mu_n).

    The product and partial-fraction series are built at the full canonical
    radius (twice the largest support modulus) regardless of the requested
    evaluation radius: derivative values at every zero feed the residues, and
    radius-localized genus boosts make the far derivatives unrepresentable.
    """
    if targets is None:
        targets = choose_targets(mu)
    if targets.size != mu.size:
        raise ValueError("targets do not match the measure size")
    max_abs = float(np.max(np.abs(mu.points)))
    r_internal = 2.0 * max_abs if max_abs > 0 else 1.0
    r_valid = float(R) if R is not None else r_internal
    prod = build_product(mu, R=r_internal, tail_budget=tail_budget)
    dlog, dsign = derivative_logs(prod)

    s_abs = np.abs(targets.values)
    tau = np.log(s_abs) - dlog                      # T(t_n), exact by residue choice
    with np.errstate(divide="ignore"):
        log_c = np.where(tau != 0.0, np.log(np.abs(tau)), -np.inf) - dlog
    sign_c = np.where(tau >= 0.0, 1.0, -1.0) * dsign
    if np.any(log_c > 700.0):
        bad = int(np.argmax(log_c))
        raise ArithmeticError(
            f"residue c_{bad + 1} has log-modulus {log_c[bad]:.3g}; the targets "
            "are too far from the product scale to represent in float64"
        )
    with np.errstate(under="ignore"):
        c = sign_c * np.exp(log_c)

    f = build_series(mu.points, c, R=r_internal, tail_budget=tail_budget)

    sp_logs = dlog + tau
    if not np.all(np.isfinite(sp_logs)):
        raise ArithmeticError(
            "derivative logs are not finite; the product scale overflows float64"
        )

    inv_terms = 1.0 / (s_abs**2 * mu.masses)
    sum_bound = csum(inv_terms)
    sum_tail = None
    if targets.law is not None and mu.tail_law is not None and isinstance(mu.tail_law.masses, PowerLaw):
        mlaw = mu.tail_law.masses
        exponent = -2.0 * targets.law.exponent - mlaw.exponent
        coef = 1.0 / (targets.law.coef**2 * mlaw.coef)
        if exponent < -1.0:
            sum_tail = power_tail_brackets(coef, exponent, mu.size)

    return SFunction(
        product=prod, correction=f, targets=targets,
        residues=c, log_residues=log_c, residue_signs=sign_c,
        t_at_support=tau, s_prime_logs=sp_logs, s_prime_signs=dsign,
        sum_bound=sum_bound, sum_tail=sum_tail,
        radius_of_validity=r_valid, measure=mu,
    )


def eval_t(S: SFunction, z: complex, form: str = "auto",
           product_pair: tuple[float, float] | None = None) -> complex:
    """The entire function T = Pi * f at z.

    ``auto`` switches to the removable-singularity form within a small
    fraction of the minimum gap of a support point:

        T(z) = Pi(z) * (f(z) - c_j/(z - t_j)) + c_j * Pi(z)/(z - t_j),

    where Pi(z)/(z - t_j) is assembled from the remaining factors, so neither
    side touches the 0 * inf indeterminacy.  ``product_pair`` may carry a
    precomputed (log-modulus, phase) of Pi(z).
    """
    z = complex(z)
    pts = S.product.points
    j, dist = nearest_index(pts, z)
    gap = S.product.min_gap
    reroute = REROUTE_GAP_FRACTION * (gap if math.isfinite(gap) else 1.0)
    if form not in ("auto", "direct", "cancellation"):
        raise ValueError(f"unknown T form {form!r}")
    use_cancel = form == "cancellation" or (form == "auto" and dist <= reroute)
    if use_cancel:
        if int(S.correction.correction_degrees[j]) != 0:
            raise ArithmeticError("removable form requires an uncorrected near pole")
        lm, ph = product_pair if product_pair is not None else eval_product(S.product, z)
        lro, pro = eval_product_over_root(S.product, j + 1, z)
        regular = eval_series_minus_pole(S.correction, j, z)
        # Pi(z) * (f(z) - c_j/(z - t_j)), assembled in log space
        if lm == -math.inf or regular == 0.0:
            first = 0.0 + 0.0j
        else:
            first = from_polar(lm + math.log(abs(regular)),
                               ph + math.atan2(regular.imag, regular.real))
        # c_j * Pi(z)/(z - t_j), via the log-carried residue
        clm = S.log_residues[j] + lro
        if clm == -math.inf or clm < -745.0:
            second = 0.0 + 0.0j
        else:
            second = S.residue_signs[j] * from_polar(clm, pro)
        return first + second
    lm, ph = product_pair if product_pair is not None else eval_product(S.product, z)
    fv = eval_series(S.correction, z)
    if fv == 0.0:
        return 0.0 + 0.0j
    log_t = lm + math.log(abs(fv))
    phase_t = ph + math.atan2(fv.imag, fv.real)
    return from_polar(log_t, phase_t)


def _exp_or_zero(logmod: float) -> float:
    if logmod == -math.inf or logmod < -745.0:
        return 0.0
    return math.exp(logmod)


def eval_s(S: SFunction, z: complex) -> tuple[float, float]:
    """(log|S(z)|, arg S(z)); exactly -inf log-modulus on the support."""
    z = complex(z)
    if abs(z) > S.radius_of_validity:
        raise ValueError(
            f"|z| = {abs(z):.6g} exceeds the validity radius {S.radius_of_validity:.6g}"
        )
    lm, ph = eval_product(S.product, z)
    if lm == -math.inf:
        return -math.inf, 0.0
    t_val = eval_t(S, z, product_pair=(lm, ph))
    return lm + t_val.real, ph + t_val.imag


def eval_s_value(S: SFunction, z: complex) -> complex:
    """S(z) as a plain complex; raises EvalRangeError on overflow."""
    return from_polar(*eval_s(S, z))


def s_prime_at(S: SFunction, n: int) -> float:
    """S'(t_n) = Pi'(t_n) e^{T(t_n)}, signed, analytic (1-based n)."""
    if not 1 <= n <= S.size:
        raise IndexError(f"index {n} out of range 1..{S.size}")
    return float(S.s_prime_signs[n - 1] * math.exp(S.s_prime_logs[n - 1]))


def s_prime_all(S: SFunction) -> np.ndarray:
    """Signed S'(t_n) for every support index."""
    return S.s_prime_signs * np.exp(S.s_prime_logs)


def cancellation_diagnostic(S: SFunction, z: complex) -> float:
    """Conditioning indicator near the support: |c_j * Pi(z)/(z - t_j)| / |T(z)|.

    Values far above 1 signal that the direct Pi*f form would lose digits.
    """
    z = complex(z)
    j, _ = nearest_index(S.product.points, z)
    t_val = eval_t(S, z)
    lm2, _ = eval_product_over_root(S.product, j + 1, z)
    pair = _exp_or_zero(S.log_residues[j] + lm2)
    return pair / max(abs(t_val), 1e-300)


def log_abs_s_profile(S: SFunction, z0: complex, z1: complex, count: int):
    """Samples of (z, log|S|, arg S) along the segment from z0 to z1."""
    if count < 2:
        raise ValueError("need at least two samples")
    out = []
    for k in range(count):
        z = z0 + (z1 - z0) * (k / (count - 1))
        lm, ph = eval_s(S, z)
        out.append((z, lm, ph))
    return out


def s_to_dict(S: SFunction) -> dict:
    """Serializable bundle referencing the product and series plus targets."""
    return {
        "product": product_to_dict(S.product),
        "correction": series_to_dict(S.correction),
        "targets": S.targets.values.tolist(),
        "target_policy": S.targets.policy,
        "residues": S.residues.tolist(),
        "sum_bound": S.sum_bound,
        "sum_tail": list(S.sum_tail) if S.sum_tail else None,
        "radius_of_validity": S.radius_of_validity,
    }


def norm_via_support_values(S: SFunction, values: np.ndarray) -> float:
    """l2(mu) norm of a sequence of values on the support (evaluation path)."""
    vec = CoefficientVector(entries=np.asarray(values, complex))
    return ell2_norm(vec, S.measure)
