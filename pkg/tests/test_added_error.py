import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from bvlab.added_error import (
    added_error_report,
    r_add_class_terms,
    r_add_integral,
    r_add_moments,
    r_add_monte_carlo,
)
from bvlab.geometry import (
    DiscreteBoundary,
    GaussianBoundary,
    NoiseModel,
    PosteriorScenario,
    Profile,
    UniformBoundary,
    boundary_from_noise,
    tg_class_moments,
)


def scen(s, t):
    return PosteriorScenario(s, -t, t, eta=Profile.constant(0.0))


def test_integral_examples():
    assert r_add_integral(DiscreteBoundary.point(0.0, (-1, 1)), 1.0) == 0
    assert r_add_integral(UniformBoundary(-0.3, 0.3, (-0.5, 0.5)), 1.0) == pytest.approx(0.015, abs=1e-12)
    assert r_add_integral(DiscreteBoundary([(1, 0.6), (0, 0.4)], (-2, 2)), 1.0) == pytest.approx(0.3, abs=1e-15)
    with pytest.raises(ValueError):
        r_add_integral(DiscreteBoundary.point(0.0, (-1, 1)), 0.0)


def test_moments_examples():
    assert r_add_moments(0, 0, 1) == 0
    assert r_add_moments(0.1, 0.02, 2.0) == pytest.approx(0.03, abs=1e-15)
    d = GaussianBoundary(0.1, 0.02, (-1.5, 1.5))
    # region is 9 sd wide on each side, so truncation is far below tolerance
    assert r_add_integral(d, 2.0) == pytest.approx(0.03, abs=1e-8)
    assert r_add_moments(0, 0.04, 3.0) == pytest.approx(0.06)
    with pytest.raises(ValueError):
        r_add_moments(0, -0.1, 1)


def test_class_terms_examples():
    assert r_add_class_terms(NoiseModel(), 1.0) == 0
    assert r_add_class_terms(NoiseModel(0.1, 0.1, 0.01, 0.01), 2.0) == pytest.approx(0.005, abs=1e-15)
    with pytest.raises(ValueError):
        r_add_class_terms(NoiseModel(), -1.0)


def test_monte_carlo_examples():
    sc = scen(2.0, 0.45)
    est, se = r_add_monte_carlo(sc, NoiseModel(), 0, 1000)
    assert est == 0 and se == 0
    est, se = r_add_monte_carlo(sc, NoiseModel(0, 0, 0.01, 0.01), 1, 1_000_000)
    assert abs(est - 0.005) <= 3 * se
    with pytest.raises(ValueError):
        r_add_monte_carlo(sc, NoiseModel(), 0, 99)


def test_monte_carlo_skewed_two_point():
    sc = scen(1.0, 0.9)
    nm = NoiseModel(0.02, 0, 0.01, 0.004, family="two-point", skew_i=0.15, skew_j=0.7)
    d = boundary_from_noise(sc, nm)
    est, se = r_add_monte_carlo(sc, nm, 2, 1_000_000)
    assert abs(est - r_add_integral(d, 1.0)) <= 3 * se


@given(st.floats(-0.5, 0.5), st.floats(0, 0.3), st.floats(-1e-6, 1e-6), st.floats(0.1, 5))
def test_class_terms_match_noise_moments(bias_diff, var, cov_frac, s):
    nm = NoiseModel(bias_diff, 0.0, var, var * 0.5, cov_frac * var)
    beta, var_b = tg_class_moments(nm, s)
    assert r_add_class_terms(nm, s) == pytest.approx(r_add_moments(beta, var_b, s), abs=1e-12)


@given(st.floats(-1, 1), st.floats(0, 1), st.floats(0, 1), st.floats(0.1, 5))
def test_moments_monotone(beta, var, extra, s):
    base = r_add_moments(beta, var, s)
    assert r_add_moments(beta, var + extra, s) >= base
    assert r_add_moments(math.copysign(abs(beta) + extra, beta), var, s) >= base


@given(st.lists(st.tuples(st.floats(-0.2, 0.2), st.floats(0.01, 1)), min_size=1, max_size=6), st.floats(0.1, 4))
def test_integral_scales_quadratically(atoms, lam):
    d = DiscreteBoundary(atoms, (-1, 1))
    scaled = DiscreteBoundary([(v * lam, w) for v, w in atoms], (-1, 1))
    assert r_add_integral(scaled, 1.5) == pytest.approx(lam**2 * r_add_integral(d, 1.5), rel=1e-12, abs=1e-15)


def test_report_routes_agree_on_untruncated_gaussian():
    sc = scen(2.0, 0.45)
    nm = NoiseModel(0.03, 0.0, 0.0008, 0.0004, 0.0001)
    rep = added_error_report(sc, nm, seed=4, n=200_000)
    assert rep.ok, rep.agreement
    assert rep.truncated_mass < 1e-12
    assert set(rep.agreement) >= {"integral~moments", "class-terms~moments", "monte-carlo~moments"}


def test_report_route_subset():
    sc = scen(2.0, 0.45)
    rep = added_error_report(sc, NoiseModel(0, 0, 0.001, 0.001), routes=("moments",))
    assert rep.r_integral is None and rep.r_moments is not None and rep.agreement == {}
    with pytest.raises(ValueError):
        added_error_report(sc, NoiseModel(), routes=("guess",))


def test_report_truncated_skips_class_terms_equality():
    sc = scen(1.0, 0.2)
    nm = NoiseModel(0, 0, 0.01, 0.01)
    rep = added_error_report(sc, nm, routes=("integral", "moments", "class-terms"))
    assert rep.truncated_mass > 0.01
    assert "class-terms~integral" not in rep.agreement
    assert rep.ok
    assert rep.r_class_terms > rep.r_integral


def test_estimates_nonnegative():
    rng = np.random.default_rng(0)
    for _ in range(20):
        atoms = [(float(v), float(w)) for v, w in zip(rng.uniform(-1, 1, 4), rng.uniform(0.1, 1, 4))]
        assert r_add_integral(DiscreteBoundary(atoms, (-1, 1)), 1.0) >= 0
