import math

import numpy as np
import pytest

from debranges.counterexample import (
    CounterexampleConfig,
    TildeElement,
    default_config,
    discontinuity_witness,
    eval_g,
    eval_h,
    h1_check_tilde,
    h3_check_tilde,
    l_membership,
    space_for,
    validate_config,
)
from debranges.laws import PowerLaw
from debranges.measures import CoefficientVector, ell2_norm, make_measure
from debranges.numerics import rel_err
from debranges.space import ZeroPreconditionError, adjust_zero_at, element, eval_x, h1_divide

from conftest import strip_points
from oracles import mp_tail_zeta2


@pytest.fixture(scope="module")
def cfg_small():
    return default_config(master=1024, schedule=(16, 32, 64, 128, 256))


@pytest.fixture(scope="module")
def tilde_space(cfg_small):
    return space_for(cfg_small)


def tilde(cfg, space, alpha, c_entries):
    return TildeElement(alpha=alpha, c=CoefficientVector(entries=np.asarray(c_entries, complex)),
                        cfg=cfg, space=space)


def test_validate_default_config(cfg_small, tilde_space):
    report = validate_config(cfg_small, tilde_space)
    assert report.ok
    assert report.domain.verdict == "not_in"
    # u0 = 1/n on unit masses: t^2-weighted partial sums are exactly the cutoff
    for cut, val in report.domain.partial_sums:
        assert val == float(cut)
    assert abs(report.x_u0_at_z0) > 0.5  # empirically ~0.68
    assert report.z0 == 0.0


def test_validate_rejects_domain_member(cfg_small):
    n = np.arange(1.0, 1025.0)
    inside = CoefficientVector(entries=(1.0 / n**2).astype(complex),
                               tail_law=PowerLaw(1.0, -2.0))
    cfg = CounterexampleConfig(measure=cfg_small.measure, u0=inside, z0=0.0,
                               truncation_schedule=(16, 64))
    with pytest.raises(ValueError, match="inside the multiplication domain"):
        validate_config(cfg)


def test_validate_rejects_z0_on_support(cfg_small):
    cfg = CounterexampleConfig(measure=cfg_small.measure, u0=cfg_small.u0, z0=5.0,
                               truncation_schedule=(16, 64))
    with pytest.raises(ValueError, match="support"):
        validate_config(cfg)


def test_eval_g_vanishes_at_z0_exactly(cfg_small, tilde_space):
    assert eval_g(1.0, 0.0, cfg_small, tilde_space) == 0.0
    assert eval_g(2.3 - 1j, 0.0, cfg_small, tilde_space) == 0.0
    assert eval_g(0.0, 1.7 + 0.4j, cfg_small, tilde_space) == 0.0


def test_eval_g_interpolates_u0_on_support(cfg_small, tilde_space):
    # G_{u0}(t_m) = (t_m - z0) * u0_m / (t_m - z0) = u0_m
    for m in (1, 2, 7, 40):
        got = eval_g(1.0, float(m), cfg_small, tilde_space)
        assert rel_err(got, cfg_small.u0.entries[m - 1]) <= 1e-11


def test_eval_h_support_shortcut_isometry(cfg_small, tilde_space, rng):
    c = rng.standard_normal(1024) / np.arange(1.0, 1025.0) ** 2
    e = tilde(cfg_small, tilde_space, 0.7, c)
    vals = np.array([eval_h(e, float(t)) for t in cfg_small.measure.points[:64]])
    combined = e.combined[:64]
    assert np.max(np.abs(vals - combined)) == 0.0


def test_eval_h_norm_through_evaluation(cfg_small, tilde_space, rng):
    c = np.zeros(1024, complex)
    c[:8] = rng.standard_normal(8) + 1j * rng.standard_normal(8)
    e = tilde(cfg_small, tilde_space, 0.3 - 0.2j, c)
    vals = np.array([eval_h(e, float(t)) for t in cfg_small.measure.points])
    norm_vals = ell2_norm(CoefficientVector(entries=vals), cfg_small.measure)
    assert abs(norm_vals - e.norm) <= 1e-10 * e.norm


def test_eval_h_alpha_zero_reduces_to_space_interpolant(cfg_small, tilde_space, rng):
    c = np.zeros(1024, complex)
    c[:16] = rng.standard_normal(16)
    e = tilde(cfg_small, tilde_space, 0.0, c)
    el = element(tilde_space, c)
    for z in strip_points(rng, 10):
        assert eval_h(e, complex(z)) == eval_x(el, complex(z))


def test_h3_tilde_real_fixed_point(cfg_small, tilde_space):
    c = np.zeros(1024)
    c[:4] = (1.0, -2.0, 0.5, 3.0)
    e = tilde(cfg_small, tilde_space, 1.5, c)
    report = h3_check_tilde(e, [complex(z) for z in (0.5 + 0.5j, 1.3 - 0.7j)])
    assert report.max_residual <= 1e-13


def test_h3_tilde_complex_case(cfg_small, tilde_space):
    c = np.zeros(1024, complex)
    c[0] = 1j
    e = tilde(cfg_small, tilde_space, 1j, c)
    report = h3_check_tilde(e, [complex(0.4, 1.1)])
    assert report.max_residual <= 1e-11


def test_h3_tilde_random_suite(cfg_small, tilde_space, rng):
    worst = 0.0
    for _ in range(100):
        c = np.zeros(1024, complex)
        c[:32] = rng.standard_normal(32) + 1j * rng.standard_normal(32)
        e = tilde(cfg_small, tilde_space, complex(rng.standard_normal(), rng.standard_normal()), c)
        report = h3_check_tilde(e, [complex(strip_points(rng, 1)[0])])
        worst = max(worst, report.max_residual)
    assert worst <= 1e-10


def test_h3_tilde_rejects_complex_seed(cfg_small, tilde_space):
    bad_u0 = CoefficientVector(entries=cfg_small.u0.entries * 1j)
    cfg = CounterexampleConfig(measure=cfg_small.measure, u0=bad_u0, z0=0.0,
                               truncation_schedule=(16, 64))
    e = TildeElement(alpha=1.0, c=CoefficientVector(np.zeros(1024, complex)),
                     cfg=cfg, space=tilde_space)
    with pytest.raises(ValueError, match="real-entried"):
        h3_check_tilde(e, [0.5 + 0.5j])


def test_h1_tilde_zero_element(cfg_small, tilde_space):
    e = tilde(cfg_small, tilde_space, 0.0, np.zeros(1024))
    result, report = h1_check_tilde(e, 1 + 1j, sample=[0.5 + 0.5j])
    assert result.alpha == 0.0
    assert report["identity_residual"] == 0.0


def test_h1_tilde_alpha_zero_consistency(cfg_small, tilde_space, rng):
    # with alpha = 0 the construction must agree with plain division in the
    # bootstrap space
    w = 1 + 1j
    c = np.zeros(1024, complex)
    c[:16] = rng.standard_normal(16) + 1j * rng.standard_normal(16)
    adj = adjust_zero_at(element(tilde_space, c), w)
    e = tilde(cfg_small, tilde_space, 0.0, adj.coeffs.entries)
    result, report = h1_check_tilde(e, w, zero_tol=1e-9,
                                    sample=[complex(z) for z in strip_points(rng, 10)])
    plain = h1_divide(adj, w, zero_tol=1e-9)
    assert np.max(np.abs(result.c.entries - plain.coeffs.entries)) == 0.0
    assert report["identity_residual"] <= 1e-9


def test_h1_tilde_full_chain(cfg_small, tilde_space, rng):
    w = 1 + 1j
    # seed with alpha = 1, then adjust c so that H(w) = 0 via the first basis entry
    c0 = np.zeros(1024, complex)
    c0[:8] = rng.standard_normal(8)
    e0 = tilde(cfg_small, tilde_space, 1.0, c0)
    h_w = eval_h(e0, w)
    e1 = element(tilde_space, np.eye(1024, dtype=complex)[0])
    x_e1 = eval_x(e1, w)
    c_adj = c0.copy()
    c_adj[0] -= h_w / x_e1
    e = tilde(cfg_small, tilde_space, 1.0, c_adj)
    assert abs(eval_h(e, w)) <= 1e-10 * e.norm
    sample = [complex(z) for z in strip_points(rng, 100, re_max=2.5, im_lo=0.4, im_hi=1.6)]
    result, report = h1_check_tilde(e, w, zero_tol=1e-9, sample=sample)
    assert report["intermediate_zero"] <= 1e-9 * e.norm
    assert report["identity_residual"] <= 1e-9
    assert report["l_membership"]["d_z0_u"][0] == "in"
    assert report["l_membership"]["result_c"][0] == "in"


def test_h1_tilde_rejects_real_w(cfg_small, tilde_space):
    e = tilde(cfg_small, tilde_space, 0.0, np.zeros(1024))
    with pytest.raises(ValueError, match="nonreal"):
        h1_check_tilde(e, 2.5, sample=[])


def test_h1_tilde_rejects_nonzero_value(cfg_small, tilde_space, rng):
    c = np.zeros(1024, complex)
    c[:4] = rng.standard_normal(4)
    e = tilde(cfg_small, tilde_space, 1.0, c)
    with pytest.raises(ZeroPreconditionError):
        h1_check_tilde(e, 1 + 1j, sample=[])


def test_l_membership_classifications(cfg_small):
    mu = cfg_small.measure
    fin = np.zeros(1024, complex)
    fin[:10] = 1.0
    assert l_membership(CoefficientVector(entries=fin), mu)[0] == "in"
    assert l_membership(cfg_small.u0, mu)[0] == "not_in"


def test_witness_rows_default_config(cfg_small, tilde_space):
    table = discontinuity_witness(cfg_small, tilde_space)
    assert table.h_u0_at_z0 == 0.0
    master = cfg_small.measure.size
    tail = float(mp_tail_zeta2(master))
    for row in table.rows:
        want_sq = float(mp_tail_zeta2(row.cutoff)) - tail + 0.5 * sum(table.distance_tail)
        assert abs(row.distance**2 - want_sq) <= 1e-10
        assert 1.0 / (row.cutoff + 1) < row.distance**2 < 1.0 / row.cutoff
    values = [abs(r.value - table.limit_value) for r in table.rows]
    assert all(b < a for a, b in zip(values, values[1:]))
    ratios = [r.ratio for r in table.rows]
    assert all(b / a >= 1.3 for a, b in zip(ratios, ratios[1:]))
    assert table.growth_ok


def test_witness_distance_monotone(cfg_small, tilde_space):
    table = discontinuity_witness(cfg_small, tilde_space)
    dists = [r.distance for r in table.rows]
    assert all(b < a for a, b in zip(dists, dists[1:]))


def test_coexistence_finitely_supported_in_both(cfg_small, tilde_space, rng):
    # a finitely supported vector is representable in both spaces with the
    # same values on the support
    c = np.zeros(1024, complex)
    c[:12] = rng.standard_normal(12)
    e = tilde(cfg_small, tilde_space, 0.0, c)
    el = element(tilde_space, c)
    for t in cfg_small.measure.points[:24]:
        assert eval_h(e, float(t)) == eval_x(el, float(t))
