import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from bvlab.geometry import (
    DiscreteBoundary,
    GaussianBoundary,
    NoiseModel,
    PosteriorScenario,
    Profile,
    RegionEscapeError,
    UniformBoundary,
    boundary_from_noise,
    boundary_moments,
    load_scenario_json,
    parse_scenario,
    posteriors_at,
    sample_boundary,
    tg_class_moments,
)


def scen(s=1.0, t1=-0.6, t2=0.6, eta=0.0, z=None):
    return PosteriorScenario(s, t1, t2, eta=Profile.constant(eta), z=None if z is None else Profile.constant(z))


# -- scenario ---------------------------------------------------------------


def test_posteriors_table_rows():
    sc = PosteriorScenario(1.0, -0.6, 0.6, eta=Profile.constant(0.1))
    assert posteriors_at(sc, 0.5) == pytest.approx((0.2, 0.7, 0.1), abs=1e-15)
    assert posteriors_at(sc, -0.5) == pytest.approx((0.7, 0.2, 0.1), abs=1e-15)
    p_i, p_j, _ = posteriors_at(sc, 0.0)
    assert p_i == p_j


def test_given_z_must_match_reconstruction():
    # s|a| = 0.5 with eta 0.1 forces z = 0.3 at a = 0.5, but z is constant: only valid at one a
    with pytest.raises(ValueError, match="inconsistent"):
        PosteriorScenario(1.0, -0.6, 0.6, eta=Profile.constant(0.1), z=Profile.constant(0.3))
    zt = Profile.tabulated([-0.6, 0.0, 0.6], [0.25, 0.55, 0.25])
    PosteriorScenario(1.0, -0.6, 0.6, eta=Profile.constant(0.1), z=zt)


@pytest.mark.parametrize("kw", [dict(s=0.0), dict(t1=0.1), dict(t2=-0.1), dict(s=2.0, t2=0.6)])
def test_scenario_validation(kw):
    with pytest.raises(ValueError):
        scen(**kw)


def test_posteriors_outside_region():
    with pytest.raises(ValueError):
        posteriors_at(scen(), 0.7)


@given(st.floats(0.5, 4), st.floats(0, 0.5), st.floats(-1, 1))
def test_posteriors_sum_and_linear_consistency(s, eta, u):
    t = (1 - eta) / s
    sc = PosteriorScenario(s, -t, t, eta=Profile.constant(eta))
    a = u * t
    p_i, p_j, p_r = posteriors_at(sc, a)
    assert abs(p_i + p_j + p_r - 1) <= 1e-12
    assert (p_j - p_i) == pytest.approx(s * a, abs=1e-12)
    z = min(p_i, p_j) + p_r
    assert -1e-12 <= p_r <= z + 1e-12


# -- boundary distributions -------------------------------------------------


def test_moments_examples():
    assert boundary_moments(UniformBoundary(-0.3, 0.3, (-0.6, 0.6))) == pytest.approx((0, 0.03, 0), abs=1e-15)
    d = DiscreteBoundary([(1, 0.6), (0, 0.4)], (-2, 2))
    assert boundary_moments(d) == pytest.approx((0.6, 0.24, 1.0), abs=1e-15)
    assert boundary_moments(DiscreteBoundary.point(0.0, (-1, 1))) == (0.0, 0.0, 0.0)


def test_median_convention_at_exact_half():
    d = DiscreteBoundary([(-0.1, 0.5), (0.2, 0.5)], (-1, 1))
    assert d.median() == -0.1


def test_empty_empirical_rejected():
    with pytest.raises(ValueError):
        DiscreteBoundary.from_samples([], (-1, 1))


@given(st.floats(-0.2, 0.2), st.floats(1e-4, 0.05))
def test_gaussian_normalized_and_symmetric_median(mu, var):
    d = GaussianBoundary(mu, var, (-0.6, 0.6))
    assert d.cdf(-0.6) == pytest.approx(0, abs=1e-12)
    assert d.cdf(0.6) == pytest.approx(1, abs=1e-9)
    if abs(mu) < 1e-9:
        assert d.median() == pytest.approx(d.mean(), abs=1e-9)


def test_truncated_gaussian_records_mass():
    d = GaussianBoundary(0.0, 0.09, (-0.3, 0.6))
    want = 0.5 * math.erfc(1 / math.sqrt(2)) + 0.5 * math.erfc(2 / math.sqrt(2))
    assert d.truncated_mass == pytest.approx(want, rel=1e-9)


def test_escape_error():
    with pytest.raises(RegionEscapeError, match="escapes decision region"):
        GaussianBoundary(0.0, 4.0, (-0.5, 0.5))


# -- noise and sampling -----------------------------------------------------


def test_tg_class_moments_examples():
    assert tg_class_moments(NoiseModel(0.03, 0.03, 0.01, 0.02), 2.0)[0] == 0
    assert tg_class_moments(NoiseModel(0, 0, 0.01, 0.01, 0.0), 2.0)[1] == pytest.approx(0.005)
    assert tg_class_moments(NoiseModel(0, 0, 0.01, 0.01, 0.01), 1.0)[1] == 0
    with pytest.raises(ValueError):
        tg_class_moments(NoiseModel(), 0.0)


def test_noise_validation():
    with pytest.raises(ValueError):
        NoiseModel(var_i=-1)
    with pytest.raises(ValueError):
        NoiseModel(var_i=0.01, var_j=0.01, cov=0.02)


def test_sample_zero_noise():
    sc = scen()
    assert np.all(sample_boundary(sc, NoiseModel(), 0, 50).values == 0)
    d = sample_boundary(sc, NoiseModel(0.02, -0.01), 0, 50)
    assert np.all(d.values == pytest.approx(0.03, abs=1e-15))


def test_sample_variance():
    sc = scen(s=2.0, t1=-0.45, t2=0.45)
    d = sample_boundary(sc, NoiseModel(0, 0, 0.01, 0.01), 3, 100_000)
    v = d.values
    # standard error of a Gaussian sample variance: var * sqrt(2/(n-1))
    assert abs(v.var() - 0.005) <= 3 * 0.005 * math.sqrt(2 / (v.size - 1))


def test_sample_reproducible_and_worker_independent():
    sc = scen(s=2.0, t1=-0.45, t2=0.45)
    nm = NoiseModel(0.01, 0, 0.02, 0.01, 0.005)
    a = sample_boundary(sc, nm, 11, 150_000)
    b = sample_boundary(sc, nm, 11, 150_000, workers=3)
    assert np.array_equal(a.values, b.values)
    assert a.truncated_mass == b.truncated_mass


def test_sample_escape():
    with pytest.raises(RegionEscapeError):
        sample_boundary(scen(), NoiseModel(0, 0, 4.0, 4.0), 0, 1000)


@pytest.mark.slow
def test_empirical_moments_converge():
    sc = scen(s=2.0, t1=-0.45, t2=0.45)
    nm = NoiseModel(0.02, -0.01, 0.004, 0.002, 0.001)
    d = sample_boundary(sc, nm, 5, 1_000_000)
    beta, var_b = tg_class_moments(nm, 2.0)
    n = d.values.size
    assert abs(d.mean() - beta) <= 4 * math.sqrt(var_b / n)
    assert abs(d.var() - var_b) <= 4 * var_b * math.sqrt(2 / (n - 1))


@given(st.floats(0.1, 0.5), st.floats(0.0, 0.4))
def test_truncation_monotone(t, widen):
    nm = NoiseModel(0, 0, 0.01, 0.01)
    narrow = boundary_from_noise(scen(s=1.0, t1=-t, t2=t), nm)
    wide = boundary_from_noise(scen(s=1.0, t1=-t - widen, t2=t + widen), nm)
    assert wide.truncated_mass <= narrow.truncated_mass + 1e-15


def test_two_point_noise_boundary_atoms():
    nm = NoiseModel(0, 0, 0.01, 0.0, family="two-point", skew_i=0.2)
    d = boundary_from_noise(scen(), nm)
    assert sorted(d.values.tolist()) == pytest.approx([-0.05, 0.2])
    assert d.mean() == pytest.approx(0, abs=1e-15)
    assert d.var() == pytest.approx(0.01)


# -- JSON -------------------------------------------------------------------


def test_scenario_json_roundtrip(tmp_path):
    doc = {"schema_version": 1, "slope_s": 2.0, "t1": -0.4, "t2": 0.4, "eta": 0.05,
           "biases": [0.01, 0.0], "variances": [0.001, 0.001], "cov": 0.0,
           "boundary": {"family": "uniform", "lo": -0.1, "hi": 0.2}}
    path = tmp_path / "s.json"
    path.write_text(json.dumps(doc))
    sd = load_scenario_json(path)
    assert isinstance(sd.boundary, UniformBoundary)
    assert sd.scenario.to_json()["slope_s"] == 2.0


@pytest.mark.parametrize("bad", [{"slope_s": 1}, {"slope_s": 1, "t1": -1, "t2": 1, "colour": 1},
                                 {"slope_s": 1, "t1": -0.5, "t2": 0.5, "boundary": {"family": "cauchy"}}])
def test_scenario_json_errors(bad):
    with pytest.raises(ValueError):
        parse_scenario(bad)
