"""Weierstrass canonical products vanishing exactly on a discrete real support.

The product is a finite truncation of  z^m0 * prod E_p(z/t_n)  with elementary
factors E_p(u) = (1-u) * exp(sum_{k<=p} u^k/k).  The per-factor degree p_n is
the canonical genus of the continued support law; points beyond the certified
evaluation radius may additionally be raised to meet a per-factor tail budget.

All evaluation is log-space (log-modulus, phase) so that the exponential
growth of the downstream S-function never needs a raw float representation.
Derivatives at the zeros are analytic products over the remaining factors,
never finite differences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from math import lgamma

import numpy as np

from .laws import GeometricLaw, PowerLaw
from .measures import DiscreteMeasure
from .numerics import csum, from_polar

_LOG2 = math.log(2.0)


def canonical_genus(mu: DiscreteMeasure) -> int:
    """Minimal p with sum |t_n|^-(p+1) convergent for the continued support.

    Lawless (finite, explicit) supports need no convergence factors: genus 0.
    """
    if mu.tail_law is None:
        return 0
    law = mu.tail_law.points
    if isinstance(law, GeometricLaw):
        return 0
    if isinstance(law, PowerLaw) and law.exponent > 0:
        return int(math.floor(1.0 / law.exponent))
    return 0


@dataclass(frozen=True)
class WeierstrassProduct:
    points: np.ndarray
    genus_per_factor: np.ndarray
    origin_multiplicity: int
    radius_of_validity: float
    tail_budget: float

    def __post_init__(self):
        object.__setattr__(self, "points", np.asarray(self.points, float))
        object.__setattr__(self, "genus_per_factor", np.asarray(self.genus_per_factor, int))
        if self.genus_per_factor.shape != self.points.shape:
            raise ValueError("genus array must match the points")

    @property
    def size(self) -> int:
        return int(self.points.size)

    @property
    def min_gap(self) -> float:
        if self.points.size == 1:
            return math.inf
        return float(np.min(np.diff(self.points)))

    def _derivative_data(self) -> tuple[np.ndarray, np.ndarray]:
        cached = self.__dict__.get("_dlogs")
        if cached is None:
            cached = _derivative_logs(self)
            object.__setattr__(self, "_dlogs", cached)
        return cached


def _certified_genus(q: float, index: int, budget: float) -> int:
    """Minimal p with q^(p+1)/(1-q) <= budget * 2^-index, q = R/|t| < 1."""
    # 2^-index underflows long before float64 budgets matter; clamp the split
    target = budget * 2.0 ** (-min(index, 1000))
    if q <= 0.0:
        return 0
    p_plus_1 = math.log(target * (1.0 - q)) / math.log(q)
    return max(0, math.ceil(p_plus_1) - 1)


def build_product(mu: DiscreteMeasure, R: float | None = None,
                  tail_budget: float = 1e-9,
                  heuristic_tail_genus_zero: bool = False) -> WeierstrassProduct:
    """Canonical product for the support of mu, certified for |z| <= R.

    R defaults to twice the largest support modulus, which keeps every stored
    point inside the certified disk.  A smaller caller-supplied R activates
    the per-factor budget rule for points outside the disk; with
    ``heuristic_tail_genus_zero`` points beyond 2R keep the canonical genus.
    """
    if tail_budget <= 0:
        raise ValueError("tail_budget must be positive")
    pts = mu.points
    max_abs = float(np.max(np.abs(pts))) if pts.size else 0.0
    if R is None:
        R = 2.0 * max_abs if max_abs > 0 else 1.0
    if R <= 0:
        raise ValueError("radius of validity must be positive")
    p_std = canonical_genus(mu)
    genus = np.full(pts.size, p_std, dtype=int)
    outside = np.abs(pts) > R
    for i in np.nonzero(outside)[0]:
        if heuristic_tail_genus_zero and abs(pts[i]) > 2.0 * R:
            continue
        q = R / abs(pts[i])
        genus[i] = max(p_std, _certified_genus(q, i + 1, tail_budget))
    origin = int(np.any(pts == 0.0))
    return WeierstrassProduct(points=pts, genus_per_factor=genus,
                              origin_multiplicity=origin,
                              radius_of_validity=float(R), tail_budget=tail_budget)


def _charge_values(u: np.ndarray, genus: np.ndarray) -> np.ndarray:
    """sum_{k<=p_n} u_n^k / k per factor (complex)."""
    out = np.zeros(u.shape, dtype=complex)
    max_p = int(genus.max()) if genus.size else 0
    if max_p == 0:
        return out
    upow = np.ones(u.shape, dtype=complex)
    for k in range(1, max_p + 1):
        upow = upow * u
        mask = genus >= k
        if not mask.any():
            break
        out[mask] += upow[mask] / k
    return out


def eval_product(prod: WeierstrassProduct, z: complex) -> tuple[float, float]:
    """(log|Pi(z)|, arg Pi(z)) accumulated factor-by-factor in ascending order.

    Exactly -inf log-modulus at the zeros; refuses |z| beyond the certified
    radius.
    """
    z = complex(z)
    if abs(z) > prod.radius_of_validity:
        raise ValueError(
            f"|z| = {abs(z):.6g} exceeds the certified radius {prod.radius_of_validity:.6g}"
        )
    pts = prod.points
    nonzero = pts != 0.0
    tnz = pts[nonzero]
    u = z / tnz
    w = 1.0 - u
    charges = _charge_values(u, prod.genus_per_factor[nonzero])
    absw = np.abs(w)
    if np.any(absw == 0.0) or (prod.origin_multiplicity and z == 0.0):
        return -math.inf, 0.0
    log_terms = np.log(absw) + np.real(charges)
    phase_terms = np.angle(w) + np.imag(charges)
    log_mod = csum(log_terms)
    phase = csum(phase_terms)
    if prod.origin_multiplicity:
        log_mod += math.log(abs(z))
        phase += math.atan2(z.imag, z.real)
    return log_mod, phase


def eval_product_value(prod: WeierstrassProduct, z: complex) -> complex:
    """Pi(z) as a plain complex (raises when the log-modulus overflows)."""
    return from_polar(*eval_product(prod, z))


def eval_product_over_root(prod: WeierstrassProduct, n: int, z: complex) -> tuple[float, float]:
    """(log-modulus, phase) of Pi(z) / (z - t_n), 1-based n; regular at t_n.

    The vanishing factor divided by its root is E_p(z/t)/(z-t) = -e^{P_p(z/t)}/t
    for a nonzero t, and 1 for the origin factor, so the quotient stays exactly
    evaluable arbitrarily close to (and at) t_n.
    """
    if not 1 <= n <= prod.size:
        raise IndexError(f"index {n} out of range 1..{prod.size}")
    z = complex(z)
    tn = float(prod.points[n - 1])
    pts = prod.points
    keep = np.ones(pts.size, dtype=bool)
    keep[n - 1] = False
    nonzero = keep & (pts != 0.0)
    tnz = pts[nonzero]
    u = z / tnz
    w = 1.0 - u
    charges = _charge_values(u, prod.genus_per_factor[nonzero])
    absw = np.abs(w)
    if np.any(absw == 0.0):
        return -math.inf, 0.0
    log_mod = csum(np.log(absw) + np.real(charges))
    phase = csum(np.angle(w) + np.imag(charges))
    if prod.origin_multiplicity and tn != 0.0:
        if z == 0.0:
            return -math.inf, 0.0
        log_mod += math.log(abs(z))
        phase += math.atan2(z.imag, z.real)
    if tn != 0.0:
        # own factor over its root: -e^{P_p(z/t_n)} / t_n
        p = int(prod.genus_per_factor[n - 1])
        own_charge = complex(0.0)
        un = z / tn
        upow = complex(1.0)
        for k in range(1, p + 1):
            upow *= un
            own_charge += upow / k
        log_mod += own_charge.real - math.log(abs(tn))
        phase += own_charge.imag + (math.pi if tn > 0 else 0.0)
    return log_mod, phase


def _is_arithmetic(pts: np.ndarray) -> bool:
    if pts.size < 3:
        return False
    d = np.diff(pts)
    return bool(np.all(d == d[0]))


def _derivative_logs(prod: WeierstrassProduct) -> tuple[np.ndarray, np.ndarray]:
    """log|Pi'(t_n)| and sign(Pi'(t_n)) for every support index (0-based).

    The pairwise distance sum collapses to a log-gamma closed form on
    arithmetic supports; general supports fall back to a blocked O(N^2) pass.
    Signs cost O(N) total via prefix counts of positive points.
    """
    pts = prod.points
    n_pts = pts.size
    genus = prod.genus_per_factor

    # --- distance part: sum_{m != n} ln|t_m - t_n| ---
    if _is_arithmetic(pts):
        d = pts[1] - pts[0]
        idx = np.arange(1, n_pts + 1, dtype=float)
        lg = np.array([lgamma(k) for k in idx]) + np.array([lgamma(n_pts - k + 1) for k in idx])
        dist_part = (n_pts - 1) * math.log(d) + lg
    else:
        dist_part = np.empty(n_pts)
        block = max(1, int(2**22 // max(n_pts, 1)))
        for start in range(0, n_pts, block):
            stop = min(start + block, n_pts)
            diff = np.abs(pts[start:stop, None] - pts[None, :])
            np.fill_diagonal(diff[:, start:stop], 1.0)
            with np.errstate(divide="ignore"):
                ld = np.log(diff)
            dist_part[start:stop] = [csum(row) for row in ld]

    # --- normalization: - sum_{m nonzero, m != n} ln|t_m| ---
    nonzero = pts != 0.0
    log_abs = np.zeros(n_pts)
    log_abs[nonzero] = np.log(np.abs(pts[nonzero]))
    total_log_abs = csum(log_abs[nonzero])
    norm_part = -(total_log_abs - np.where(nonzero, log_abs, 0.0))

    # --- charges: sum_{m nonzero, m != n} P_{p_m}(t_n / t_m), real ---
    charge_part = np.zeros(n_pts)
    max_p = int(genus[nonzero].max()) if nonzero.any() else 0
    if max_p > 0 and np.all(genus[nonzero] == genus[nonzero][0]):
        # uniform genus: prefix power sums give all n at once
        inv = np.zeros(n_pts)
        inv[nonzero] = 1.0 / pts[nonzero]
        ipow = np.ones(n_pts)
        for k in range(1, max_p + 1):
            ipow = ipow * inv
            total = csum(ipow[nonzero])
            own = np.where(nonzero, ipow, 0.0)
            charge_part += (pts**k) * (total - own) / k
    elif max_p > 0:
        tnz = pts[nonzero]
        gnz = genus[nonzero]
        for i in range(n_pts):
            u = pts[i] / tnz
            vals = _charge_values(u.astype(complex), gnz).real
            own = np.nonzero(tnz == pts[i])[0]
            if own.size:
                vals[own[0]] = 0.0
            charge_part[i] = csum(vals)
        # subtract the factor-n self-charge only where t_n itself is nonzero:
        # handled above by zeroing the own entry.

    # --- leading factor: derivative of factor n at t_n ---
    lead = np.zeros(n_pts)
    harmonic = np.zeros(n_pts)
    for i in range(n_pts):
        if pts[i] == 0.0:
            continue  # origin factor z has derivative 1
        p = int(genus[i])
        harmonic[i] = sum(1.0 / k for k in range(1, p + 1))
        lead[i] = harmonic[i] - log_abs[i]
    # remove the self pair from dist/charge parts for nonzero t_n:
    # dist_part already excludes m == n; charge_part excluded own entries.

    log_primes = dist_part + norm_part + charge_part + lead

    # --- signs ---
    # factor m at t_n: sign(1 - t_n/t_m) = sign(t_m - t_n) * sign(t_m);
    # ascending points: m > n gives sign(t_m - t_n) = +1, m < n gives -1.
    pos = (pts > 0).astype(int)
    neg = (pts < 0).astype(int)
    pos_before = np.concatenate([[0], np.cumsum(pos)])[:-1]   # positives among m < n
    neg_after = np.cumsum(neg[::-1])[::-1] - neg               # negatives among m > n
    neg_factor_count = pos_before + neg_after
    signs = np.where(neg_factor_count % 2 == 0, 1.0, -1.0)
    lead_sign = np.where(pts > 0, -1.0, np.where(pts < 0, 1.0, 1.0))
    signs = signs * lead_sign
    if prod.origin_multiplicity:
        # the origin factor contributes sign(t_n) at each nonzero t_n
        signs = signs * np.where(pts < 0, -1.0, 1.0)
        # its own derivative entry (t_n == 0) is the product of all E_p(0) = 1
        zero_idx = np.nonzero(pts == 0.0)[0][0]
        log_primes[zero_idx] = dist_part[zero_idx] + norm_part[zero_idx] + charge_part[zero_idx]
        # at t=0 every nonzero factor evaluates to E_p(0) = 1: distances all
        # reduce to ln|t_m|, cancelling norm_part exactly
        signs[zero_idx] = 1.0
    return log_primes, signs


def derivative_logs(prod: WeierstrassProduct) -> tuple[np.ndarray, np.ndarray]:
    """(log|Pi'(t_n)|, sign(Pi'(t_n))) arrays over all support indices."""
    logs, signs = prod._derivative_data()
    return logs.copy(), signs.copy()


def derivative_at_zero(prod: WeierstrassProduct, n: int) -> float:
    """Pi'(t_n) as a signed float (1-based index n), by the analytic product rule."""
    if not 1 <= n <= prod.size:
        raise IndexError(f"index {n} out of range 1..{prod.size}")
    logs, signs = prod._derivative_data()
    lp = logs[n - 1]
    if lp > 709.0:
        return math.inf * signs[n - 1]
    return float(signs[n - 1] * math.exp(lp))


def product_to_dict(prod: WeierstrassProduct) -> dict:
    return {
        "points": prod.points.tolist(),
        "genus_per_factor": prod.genus_per_factor.tolist(),
        "origin_multiplicity": prod.origin_multiplicity,
        "radius_of_validity": prod.radius_of_validity,
        "tail_budget": prod.tail_budget,
    }


def product_from_dict(data: dict) -> WeierstrassProduct:
    return WeierstrassProduct(
        points=np.asarray(data["points"], float),
        genus_per_factor=np.asarray(data["genus_per_factor"], int),
        origin_multiplicity=int(data["origin_multiplicity"]),
        radius_of_validity=float(data["radius_of_validity"]),
        tail_budget=float(data["tail_budget"]),
    )
