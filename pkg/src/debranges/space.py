"""The sampled space of entire interpolants X_v built on an S-function.

Elements are Lagrange-type series

    X_v(z) = sum_n v_n * S(z) / ((z - t_n) S'(t_n)),

with X_v(t_n) = v_n, the l2(mu) norm of the coefficients as space norm, and
reproducing kernels realizing point evaluation.  The series is evaluated as
S(z) times an exactly rounded tame sum, so the only range limit is S itself.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .measures import (
    CoefficientVector,
    DiscreteMeasure,
    conjugate,
    divide_at,
    ell2_norm,
)
from .numerics import (
    DEFAULT_SAFETY_FACTOR,
    csum,
    csum_complex,
    from_polar,
    nearest_index,
)
from .s_function import SFunction, build_s, eval_s, eval_s_value, s_prime_all


class ZeroPreconditionError(ValueError):
    """The division identity requires X_v(w) ~ 0; carries the measured value."""

    def __init__(self, value: complex, bound: float):
        self.value = value
        self.bound = bound
        super().__init__(
            f"|X_v(w)| = {abs(value):.3e} exceeds the zero tolerance {bound:.3e}"
        )


@dataclass(frozen=True)
class SampledSpace:
    measure: DiscreteMeasure
    s: SFunction
    kernel_sum: float                       # sum_{n<=N} 1/(|S'(t_n)|^2 mu_n)
    kernel_tail: tuple[float, float] | None

    def __post_init__(self):
        object.__setattr__(self, "_s_primes", s_prime_all(self.s))

    @property
    def size(self) -> int:
        return int(self.measure.size)

    @property
    def s_primes(self) -> np.ndarray:
        return self._s_primes


@dataclass(frozen=True)
class SpaceElement:
    coeffs: CoefficientVector
    space: SampledSpace

    @property
    def norm(self) -> float:
        return ell2_norm(self.coeffs, self.space.measure)


@dataclass(frozen=True)
class KernelVector:
    at: complex
    entries: np.ndarray
    functional_norm: float


def build_space(mu: DiscreteMeasure, targets=None, R: float | None = None,
                tail_budget: float = 1e-9, s: SFunction | None = None) -> SampledSpace:
    """Sampled space over mu; builds (or adopts) the S-function."""
    if s is None:
        s = build_s(mu, targets=targets, R=R, tail_budget=tail_budget)
    sp = s_prime_all(s)
    ksum = csum(1.0 / (np.abs(sp) ** 2 * mu.masses))
    return SampledSpace(measure=mu, s=s, kernel_sum=ksum, kernel_tail=s.sum_tail)


def element(space: SampledSpace, coeffs) -> SpaceElement:
    """Wrap raw entries or a CoefficientVector as a space element."""
    if not isinstance(coeffs, CoefficientVector):
        coeffs = CoefficientVector(entries=np.asarray(coeffs, complex))
    if coeffs.size != space.size:
        raise ValueError("coefficient length does not match the space")
    return SpaceElement(coeffs=coeffs, space=space)


def eval_x(el: SpaceElement, z: complex,
           safety_factor: float = DEFAULT_SAFETY_FACTOR) -> complex:
    """X_v(z); within the safety distance of t_m the removable value v_m.

    Elsewhere: S(z) times the exactly rounded ascending sum of
    v_n / ((z - t_n) S'(t_n)).
    """
    z = complex(z)
    space = el.space
    mu = space.measure
    if abs(z) > space.s.radius_of_validity:
        raise ValueError(
            f"|z| = {abs(z):.6g} exceeds the validity radius "
            f"{space.s.radius_of_validity:.6g}"
        )
    m, dist = nearest_index(mu.points, z)
    if dist <= mu.safety_distance(safety_factor):
        return complex(el.coeffs.entries[m])
    s_val = eval_s_value(space.s, z)
    terms = el.coeffs.entries / ((z - mu.points) * space.s_primes)
    return s_val * csum_complex(terms)


def h3_star(el: SpaceElement) -> SpaceElement:
    """The star conjugate X_v* = X_{v-bar}: conjugated coefficients."""
    return SpaceElement(coeffs=conjugate(el.coeffs), space=el.space)


def h1_divide(el: SpaceElement, w: complex, zero_tol: float = 1e-10,
              safety_factor: float = DEFAULT_SAFETY_FACTOR) -> SpaceElement:
    """Divide out a zero at w: the element with coefficients v_n/(t_n - w).

    Requires |X_v(w)| <= zero_tol * ||v||; the identity
    X_{D_w(v)}(z) (z - w) = X_v(z) - S(z) X_v(w) / S(w) then holds with the
    residual term controlled by the verified zero.
    """
    w = complex(w)
    if w.imag == 0.0:
        m, dist = nearest_index(el.space.measure.points, w)
        if dist <= el.space.measure.safety_distance(safety_factor):
            raise ValueError("w must be nonreal or at least stay off the support")
    value = eval_x(el, w, safety_factor=safety_factor)
    bound = zero_tol * el.norm
    if abs(value) > bound:
        raise ZeroPreconditionError(value, bound)
    coeffs = divide_at(el.coeffs, w, el.space.measure, safety_factor=safety_factor)
    return SpaceElement(coeffs=coeffs, space=el.space)


def adjust_zero_at(el: SpaceElement, w: complex, pivot: int = 0) -> SpaceElement:
    """v' = v - (X_v(w)/X_{e_p}(w)) e_p, so that X_{v'}(w) = 0 up to rounding."""
    space = el.space
    e_p = np.zeros(space.size, complex)
    e_p[pivot] = 1.0
    x_v = eval_x(el, w)
    x_e = eval_x(element(space, e_p), w)
    if x_e == 0.0:
        raise ArithmeticError(f"pivot element vanishes at w = {w}")
    entries = el.coeffs.entries - (x_v / x_e) * e_p
    return element(space, entries)


def kernel_at(space: SampledSpace, w: complex,
              safety_factor: float = DEFAULT_SAFETY_FACTOR) -> KernelVector:
    """Reproducing kernel at w: <v, k_w> = X_v(w) in l2(mu).

    Entries k_w(n) = conj( S(w) / ((w - t_n) S'(t_n)) ) / mu_n; the functional
    norm sqrt(sum mu_n |k_w(n)|^2) is the exact operator norm of evaluation at
    w on the truncated space.
    """
    w = complex(w)
    mu = space.measure
    m, dist = nearest_index(mu.points, w)
    if dist <= mu.safety_distance(safety_factor):
        raise ValueError("kernel point lies on the support within the safety distance")
    s_val = eval_s_value(space.s, w)
    entries = np.conj(s_val / ((w - mu.points) * space.s_primes)) / mu.masses
    fnorm = math.sqrt(csum(mu.masses * np.abs(entries) ** 2))
    return KernelVector(at=w, entries=entries, functional_norm=fnorm)


def inner(space: SampledSpace, v: np.ndarray, u: np.ndarray) -> complex:
    """l2(mu) inner product, anti-linear in the second slot."""
    return csum_complex(space.measure.masses * np.asarray(v) * np.conj(np.asarray(u)))


def eval_bound(space: SampledSpace, rect: tuple[float, float, float, float],
               grid: int, safety_factor: float = DEFAULT_SAFETY_FACTOR) -> float:
    """Grid maximum C_K of |S(z)/(z - t_n)| over z in the rectangle and all n.

    Near a support point the removable value |S'(t_m)| replaces the quotient.
    Bounds |X_v(z)| <= C_K * sqrt(kernel_sum) * ||v|| on the rectangle.
    """
    re0, re1, im0, im1 = rect
    if grid < 1:
        raise ValueError("grid resolution must be at least 1")
    mu = space.measure
    radius = space.s.radius_of_validity
    corner = max(abs(complex(a, b)) for a in (re0, re1) for b in (im0, im1))
    if corner > radius:
        raise ValueError(f"rectangle corner modulus {corner:.6g} exceeds the radius {radius:.6g}")
    tol = max(mu.safety_distance(safety_factor), 1e-6 * mu.min_gap if math.isfinite(mu.min_gap) else 0.0)
    best = 0.0
    res = np.linspace(re0, re1, grid) if grid > 1 else np.array([(re0 + re1) / 2])
    ims = np.linspace(im0, im1, grid) if grid > 1 else np.array([(im0 + im1) / 2])
    sp_abs = np.abs(space.s_primes)
    for x in res:
        for y in ims:
            z = complex(x, y)
            m, dist = nearest_index(mu.points, z)
            if dist <= tol:
                cand = float(sp_abs[m])
            else:
                lm, _ = eval_s(space.s, z)
                cand = math.exp(min(lm, 709.0)) / dist if lm != -math.inf else 0.0
            best = max(best, cand)
    return best


def interpolation_values(el: SpaceElement) -> np.ndarray:
    """X_v at every support point (removable values), as an array."""
    return el.coeffs.entries.copy()


def space_norm_isometry_error(el: SpaceElement) -> float:
    """| ||{X_v(t_n)}||_mu - ||v||_mu | via the evaluation path."""
    vals = np.array([eval_x(el, complex(t)) for t in el.space.measure.points])
    vec = CoefficientVector(entries=vals)
    return abs(ell2_norm(vec, el.space.measure) - el.norm)
