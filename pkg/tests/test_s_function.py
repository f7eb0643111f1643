import math

import numpy as np
import pytest

from debranges.measures import make_measure
from debranges.mittag_leffler import residue_check
from debranges.numerics import from_polar, rel_err
from debranges.s_function import (
    TargetValidationError,
    build_s,
    cancellation_diagnostic,
    choose_targets,
    eval_s,
    eval_s_value,
    eval_t,
    log_abs_s_profile,
    s_prime_all,
    s_prime_at,
    s_to_dict,
)

from conftest import strip_points
from oracles import mp_s_chain, mp_s_prime, mp_tail_zeta2, to_complex


def test_default_targets_unit_masses():
    mu = make_measure("integer_lattice", 16)
    t = choose_targets(mu)
    assert np.array_equal(t.values, np.arange(1.0, 17.0))
    assert t.law is not None and t.law.exponent == 1.0


def test_default_targets_quadratic_masses():
    mu = make_measure("explicit_list", 8, points=list(range(1, 9)),
                      masses=[float(n * n) for n in range(1, 9)])
    t = choose_targets(mu)
    assert np.allclose(t.values, 1.0, rtol=0, atol=0)


def test_explicit_targets_rejections():
    mu = make_measure("integer_lattice", 4096)
    with pytest.raises(TargetValidationError, match="nonzero"):
        choose_targets(mu, policy="explicit", values=[0.0] * 4096)
    # s_n = 1 with unit masses: sum 1/(s^2 mu) is harmonic-type divergent
    with pytest.raises(TargetValidationError, match="divergent"):
        choose_targets(mu, policy="explicit", values=np.ones(4096))


def test_explicit_targets_accepts_convergent():
    mu = make_measure("integer_lattice", 4096)
    t = choose_targets(mu, policy="explicit", values=np.arange(1.0, 4097.0))
    assert t.policy == "explicit"


def test_s_vanishes_on_support(s_256):
    for n in (1, 17, 256):
        lm, _ = eval_s(s_256, float(n))
        assert lm == -math.inf


def test_s_prime_matches_targets(s_256):
    ratios = np.abs(s_prime_all(s_256)) / s_256.targets.values
    assert np.max(np.abs(ratios - 1.0)) <= 1e-8


def test_s_prime_signs_positive_exponential(s_256):
    from debranges.weierstrass import derivative_logs

    _, signs = derivative_logs(s_256.product)
    sp = s_prime_all(s_256)
    assert np.array_equal(np.sign(sp), signs)


def test_t_at_support_cancellation_identity(s_256):
    # T(t_n) = log|s_n / Pi'(t_n)| by the residue cancellation
    from debranges.weierstrass import derivative_logs

    dlog, _ = derivative_logs(s_256.product)
    want = np.log(s_256.targets.values) - dlog
    assert np.max(np.abs(s_256.t_at_support - want)) <= 1e-9 * np.max(1 + np.abs(want))


def test_t_direct_vs_rerouted_forms(s_256):
    # both forms agree a small distance from a support point
    for n, dist in ((3, 1e-3), (7, 1e-3), (12, 5e-4)):
        z = float(n) + dist
        direct = eval_t(s_256, z, form="direct")
        rerouted = eval_t(s_256, z, form="cancellation")
        assert rel_err(rerouted, direct) <= 1e-8
        zc = complex(n, dist)
        assert rel_err(eval_t(s_256, zc, form="cancellation"),
                       eval_t(s_256, zc, form="direct")) <= 1e-8


def test_s_prime_finite_difference(s_256):
    # valid only at the first nodes: T'' grows so fast along the support that
    # the h^2 truncation term swamps the quotient beyond n ~ 5
    h = 1e-6
    for n in (1, 2, 3):
        t = float(n)
        fd = (eval_s_value(s_256, t + h) - eval_s_value(s_256, t - h)) / (2 * h)
        assert rel_err(s_prime_at(s_256, n), fd.real) <= 1e-6


def test_real_symmetry_random(rng, s_256):
    for z in strip_points(rng, 200, re_max=8.0, im_lo=0.1, im_hi=8.0):
        lm, ph = eval_s(s_256, z)
        lmc, phc = eval_s(s_256, np.conj(z))
        assert lmc == pytest.approx(lm, rel=1e-12, abs=1e-12)
        assert phc == pytest.approx(-ph, rel=1e-12, abs=1e-12)


def test_real_axis_imaginary_residue(rng, s_256):
    # |sin(phase)| is the relative imaginary part of the reconstruction; the
    # phase noise is eps * |T|, so the bound is checked where |T| is moderate
    # (between the first support nodes; |T| blows up combinatorially past ~8)
    for _ in range(50):
        x = rng.uniform(0.0, 7.0)
        if np.min(np.abs(x - s_256.product.points)) < 0.05:
            continue
        _, ph = eval_s(s_256, x)
        assert abs(math.sin(ph)) <= 1e-12


def test_s_matches_extended_precision_chain(rng):
    mu = make_measure("integer_lattice", 96)
    S = build_s(mu)
    prod = S.product
    for _ in range(6):
        z = complex(rng.uniform(-2, 2), rng.uniform(0.5, 2))
        got = eval_s_value(S, z)
        want = to_complex(mp_s_chain(prod.points, prod.genus_per_factor,
                                     prod.origin_multiplicity, S.targets.values, z))
        assert rel_err(got, want) <= 1e-11


def test_s_prime_matches_extended_precision_chain():
    mu = make_measure("integer_lattice", 96)
    S = build_s(mu)
    prod = S.product
    for n in (1, 5, 36, 96):
        want = mp_s_prime(prod.points, prod.genus_per_factor,
                          prod.origin_multiplicity, S.targets.values, n)
        assert rel_err(s_prime_at(S, n), to_complex(want).real) <= 1e-9


def test_lemma_residues_consistent_with_series(s_256):
    # the series' residue at t_5 equals c_5 computed from Pi'(t_5) and s_5
    got = residue_check(s_256.correction, 5)
    assert rel_err(got, s_256.residues[4]) <= 1e-8


def test_sum_bound_and_tail_certificate(s_256):
    want = float(sum(1.0 / n**2 for n in range(1, 257)))
    assert s_256.sum_bound == pytest.approx(want, rel=1e-12)
    lo, hi = s_256.sum_tail
    true_tail = float(mp_tail_zeta2(256))
    assert lo < true_tail < hi


def test_genus_budget_robustness(rng):
    mu = make_measure("integer_lattice", 64)
    a = build_s(mu, tail_budget=1e-9)
    b = build_s(mu, tail_budget=1e-8)
    for z in strip_points(rng, 20):
        la, pa = eval_s(a, z)
        lb, pb = eval_s(b, z)
        assert abs(la - lb) <= 2e-8 and abs(pa - pb) <= 2e-8


def test_cancellation_diagnostic_grows_near_support(s_256):
    near = cancellation_diagnostic(s_256, 3.0 + 1e-6)
    far = cancellation_diagnostic(s_256, 3.5)
    assert near > far


def test_validity_radius_enforced():
    mu = make_measure("integer_lattice", 32)
    S = build_s(mu, R=10.0)
    with pytest.raises(ValueError, match="radius"):
        eval_s(S, 11.0)


def test_profile_and_serialization(s_256):
    rows = log_abs_s_profile(s_256, 0.25 + 0.5j, 2.25 + 0.5j, 9)
    assert len(rows) == 9
    assert rows[0][0] == 0.25 + 0.5j
    bundle = s_to_dict(s_256)
    assert bundle["target_policy"] == "default"
    assert len(bundle["residues"]) == 256
