import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from debranges.laws import PowerLaw, parse_law
from debranges.measures import (
    CoefficientVector,
    conjugate,
    divide_at,
    ell2_norm,
    make_measure,
    measure_from_config,
    multiplication_domain_check,
    vector_from_config,
)
from debranges.numerics import SupportProximityError

from oracles import mp_ell2_norm, mp_weighted_partial

# frozen, computed with the extended-precision summation oracle at 40 digits
SQRT_ZETA2_PARTIAL_4096 = 1.282454660416158145044568
ZETA2_PARTIAL_64 = 1.6294305014088875063166712
ZETA2_PARTIAL_512 = 1.6429828479550967635395101
ZETA2_PARTIAL_4096 = 1.6446899560231235049919119


def test_make_measure_integer_lattice():
    mu = make_measure("integer_lattice", 4)
    assert np.array_equal(mu.points, [1.0, 2.0, 3.0, 4.0])
    assert np.array_equal(mu.masses, [1.0, 1.0, 1.0, 1.0])
    assert mu.tail_law is not None


def test_make_measure_explicit_with_zero_point():
    mu = make_measure("explicit_list", 3, points=(-1.0, 0.0, 2.0), masses=(1.0, 2.0, 1.0))
    assert 0.0 in mu.points
    assert mu.tail_law is None


def test_make_measure_rejects_duplicates_and_bad_masses():
    with pytest.raises(ValueError, match="strictly increasing"):
        make_measure("explicit_list", 3, points=(1.0, 1.0, 2.0), masses=(1.0, 1.0, 1.0))
    with pytest.raises(ValueError, match="strictly positive"):
        make_measure("explicit_list", 2, points=(1.0, 2.0), masses=(1.0, 0.0))
    with pytest.raises(ValueError, match="family"):
        make_measure("no_such_family", 3)


def test_measure_regeneration_matches_tail_law():
    mu = make_measure("scaled_lattice", 8, params=(0.5, 2.0))
    bigger = mu.regenerate(16)
    assert bigger.size == 16
    assert np.array_equal(bigger.points[:8], mu.points)
    assert np.array_equal(bigger.masses[:8], mu.masses)


def test_geometric_support_family():
    mu = make_measure("geometric_support", 10, params=(2.0,))
    assert mu.points[0] == 1.0 and mu.points[9] == 512.0
    with pytest.raises(ValueError, match="overflow"):
        make_measure("geometric_support", 5000, params=(2.0,))


def test_ell2_norm_pythagorean():
    mu = make_measure("explicit_list", 2, points=(1.0, 2.0), masses=(1.0, 1.0))
    v = CoefficientVector(entries=np.array([3.0, 4.0]))
    assert ell2_norm(v, mu) == 5.0


def test_ell2_norm_zero_vector(lattice_256):
    v = CoefficientVector(entries=np.zeros(256))
    assert ell2_norm(v, lattice_256) == 0.0


def test_ell2_norm_against_oracle_4096():
    mu = make_measure("integer_lattice", 4096)
    v = vector_from_config({"tail_law": "1/n"}, mu)
    got = ell2_norm(v, mu)
    assert abs(got - SQRT_ZETA2_PARTIAL_4096) <= 1e-12 * SQRT_ZETA2_PARTIAL_4096


def test_ell2_norm_random_against_oracle(rng, lattice_256):
    entries = rng.standard_normal(256) + 1j * rng.standard_normal(256)
    v = CoefficientVector(entries=entries)
    got = ell2_norm(v, lattice_256)
    want = float(mp_ell2_norm(lattice_256.masses, entries))
    assert abs(got - want) <= 1e-13 * want


def test_ell2_norm_length_mismatch(lattice_256):
    with pytest.raises(ValueError, match="length"):
        ell2_norm(CoefficientVector(entries=np.ones(8)), lattice_256)


def test_conjugate_entrywise_and_involution(rng, lattice_256):
    v = CoefficientVector(entries=np.array([1j, 1 - 1j] + [0.0] * 254))
    cv = conjugate(v)
    assert cv.entries[0] == -1j and cv.entries[1] == 1 + 1j
    w = CoefficientVector(entries=rng.standard_normal(256) + 1j * rng.standard_normal(256))
    assert np.array_equal(conjugate(conjugate(w)).entries, w.entries)
    assert ell2_norm(conjugate(w), lattice_256) == ell2_norm(w, lattice_256)


def test_divide_at_direct_formula():
    mu = make_measure("explicit_list", 2, points=(1.0, 2.0), masses=(1.0, 1.0))
    v = CoefficientVector(entries=np.array([1.0, 1.0]))
    out = divide_at(v, 0.0, mu)
    assert np.allclose(out.entries, [1.0, 0.5], rtol=0, atol=0)


def test_divide_at_lattice_value():
    mu = make_measure("integer_lattice", 8)
    v = vector_from_config({"tail_law": "1/n"}, mu)
    out = divide_at(v, 0.5, mu)
    assert out.entries[2] == pytest.approx(2.0 / 15.0, rel=1e-15)
    assert out.tail_law is not None


def test_divide_at_rejects_support_proximity(lattice_256):
    v = CoefficientVector(entries=np.ones(256))
    with pytest.raises(SupportProximityError):
        divide_at(v, 3.0 + 1e-12, lattice_256)


def test_divide_at_conjugation_symmetry(rng, lattice_256):
    entries = rng.standard_normal(256) + 1j * rng.standard_normal(256)
    v = CoefficientVector(entries=entries)
    w = 0.7 + 0.9j
    lhs = divide_at(conjugate(v), np.conj(w), lattice_256).entries
    rhs = conjugate(divide_at(v, w, lattice_256)).entries
    assert np.max(np.abs(lhs - rhs)) == 0.0


def test_divide_at_composition_symmetry(rng, lattice_256):
    entries = rng.standard_normal(256) + 1j * rng.standard_normal(256)
    v = CoefficientVector(entries=entries)
    w1, w2 = 0.3 + 1.1j, -0.4 + 0.6j
    a = divide_at(divide_at(v, w1, lattice_256), w2, lattice_256).entries
    b = divide_at(divide_at(v, w2, lattice_256), w1, lattice_256).entries
    assert np.max(np.abs(a - b)) <= 1e-13 * np.max(np.abs(a))


def test_domain_check_divergent_seed():
    mu = make_measure("integer_lattice", 4096)
    v = vector_from_config({"tail_law": "1/n"}, mu)
    report = multiplication_domain_check(v, mu, [16, 256, 4096])
    # each term mu_n t_n^2 / n^2 is exactly 1, so P_M = M exactly
    assert report.partial_sums == ((16, 16.0), (256, 256.0), (4096, 4096.0))
    assert report.verdict == "not_in"


def test_domain_check_convergent_seed_oracle_match():
    mu = make_measure("integer_lattice", 4096)
    v = vector_from_config({"tail_law": "1/n^2"}, mu)
    report = multiplication_domain_check(v, mu, [64, 512, 4096])
    assert report.verdict == "in"
    for (cut, got), want in zip(report.partial_sums,
                                (ZETA2_PARTIAL_64, ZETA2_PARTIAL_512, ZETA2_PARTIAL_4096)):
        assert abs(got - want) <= 1e-12 * want
        oracle = float(mp_weighted_partial(mu.masses, mu.points, v.entries, cut))
        assert abs(got - oracle) <= 1e-12 * oracle


def test_domain_check_finitely_supported(lattice_256):
    entries = np.zeros(256)
    entries[:5] = 1.0
    report = multiplication_domain_check(CoefficientVector(entries=entries),
                                         lattice_256, [8, 64, 256])
    sums = [s for _, s in report.partial_sums]
    assert sums[0] == sums[1] == sums[2]


def test_domain_check_validates_schedule(lattice_256):
    v = CoefficientVector(entries=np.ones(256))
    with pytest.raises(ValueError, match="empty"):
        multiplication_domain_check(v, lattice_256, [])
    with pytest.raises(ValueError, match="increasing"):
        multiplication_domain_check(v, lattice_256, [8, 8])
    with pytest.raises(ValueError, match="exceeds"):
        multiplication_domain_check(v, lattice_256, [512])


@settings(max_examples=60, derandomize=True)
@given(scale=st.floats(min_value=1e-6, max_value=1e6, allow_nan=False))
def test_norm_homogeneity(scale):
    mu = make_measure("integer_lattice", 32)
    base = np.linspace(1.0, 2.0, 32) * (1 + 0.5j)
    v = CoefficientVector(entries=base * scale)
    ref = ell2_norm(CoefficientVector(entries=base), mu)
    assert abs(ell2_norm(v, mu) - scale * ref) <= 1e-12 * scale * ref


@settings(max_examples=40, derandomize=True)
@given(seed=st.integers(min_value=0, max_value=2**31))
def test_triangle_inequality(seed):
    gen = np.random.default_rng(seed)
    mu = make_measure("integer_lattice", 64)
    a = gen.standard_normal(64) + 1j * gen.standard_normal(64)
    b = gen.standard_normal(64) + 1j * gen.standard_normal(64)
    na = ell2_norm(CoefficientVector(entries=a), mu)
    nb = ell2_norm(CoefficientVector(entries=b), mu)
    nab = ell2_norm(CoefficientVector(entries=a + b), mu)
    assert nab <= na + nb + 1e-12 * (na + nb)


def test_parse_law_round_trips():
    assert parse_law("1/n") == PowerLaw(1.0, -1.0)
    assert parse_law("n") == PowerLaw(1.0, 1.0)
    assert parse_law("2*n^2") == PowerLaw(2.0, 2.0)
    assert parse_law("1/n^2") == PowerLaw(1.0, -2.0)
    assert parse_law("3") == PowerLaw(3.0, 0.0)
    geo = parse_law("2^(n-1)")
    assert geo.ratio == 2.0


def test_measure_config_round_trip():
    mu = measure_from_config({"family": "integer_lattice", "N": 16})
    assert mu.size == 16
    v = vector_from_config({"entries": [[1.0, 2.0]] * 16}, mu)
    assert v.entries[0] == 1.0 + 2.0j


def test_vector_csv_export(tmp_path, lattice_256):
    from debranges.measures import vector_to_csv

    v = vector_from_config({"tail_law": "1/n"}, lattice_256)
    path = tmp_path / "vec.csv"
    vector_to_csv(v, lattice_256, str(path))
    lines = path.read_text().splitlines()
    assert lines[0] == "index,t,mass,re,im"
    assert len(lines) == 257
