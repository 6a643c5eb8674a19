import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bvlab.added_error import r_add_integral
from bvlab.bridge import checksum, se_closed, se_numeric, ve_closed, ve_numeric
from bvlab.geometry import (
    DiscreteBoundary,
    GaussianBoundary,
    PosteriorScenario,
    Profile,
    UniformBoundary,
    boundary_moments,
    posteriors_at,
)
from bvlab.james import LabelDistribution, aggregate, james_decompose

from oracles import atoms_cdf, grid_bridge, truncated_normal_cdf, uniform_cdf


def scen(s, t1, t2, eta=0.0):
    return PosteriorScenario(s, t1, t2, eta=Profile.constant(eta))


TWO_POINT = [(1.0, 0.6), (0.0, 0.4)]


# -- closed forms -----------------------------------------------------------


def test_se_closed_examples():
    assert se_closed(0.0, 3.0) == 0
    assert se_closed(0.1, 2.0) == pytest.approx(0.01, abs=1e-16)
    _, _, m = boundary_moments(DiscreteBoundary(TWO_POINT, (-1, 1)))
    assert m == 1.0 and se_closed(m, 1.0) == 0.5


def test_ve_closed_examples():
    assert ve_closed(0.05, 0.01, 0.05, 2.0) == pytest.approx(0.01, abs=1e-16)
    assert ve_closed(0, 0, 0, 1.0) == 0
    beta, var_b, m = boundary_moments(DiscreteBoundary(TWO_POINT, (-1, 1)))
    assert ve_closed(beta, var_b, m, 1.0) == pytest.approx(-0.2, abs=1e-15)


# -- numeric oracles --------------------------------------------------------


def test_point_mass_at_bayes_boundary():
    sc = scen(2.0, -0.4, 0.4, 0.1)
    d = DiscreteBoundary.point(0.0, sc.region)
    assert se_numeric(sc, d) == pytest.approx(0, abs=1e-15)
    assert ve_numeric(sc, d) == pytest.approx(0, abs=1e-15)


def test_gaussian_case():
    sc = scen(2.0, -0.45, 0.45, 0.05)
    d = GaussianBoundary(0.1, 0.05**2, sc.region)
    assert se_numeric(sc, d) == pytest.approx(se_closed(0.1, 2.0), abs=1e-6)
    beta, var_b, m = boundary_moments(d)
    assert ve_numeric(sc, d) == pytest.approx(ve_closed(beta, var_b, m, 2.0), abs=1e-6)
    se_g, ve_g = grid_bridge(2.0, 0.05, sc.region, truncated_normal_cdf(0.1, 0.05, sc.region))
    assert se_numeric(sc, d) == pytest.approx(se_g, abs=1e-6)
    assert ve_numeric(sc, d) == pytest.approx(ve_g, abs=1e-6)


def test_uniform_case():
    sc = scen(1.0, -0.5, 0.5)
    d = UniformBoundary(0.0, 0.4, sc.region)
    assert d.median() == pytest.approx(0.2)
    assert se_numeric(sc, d) == pytest.approx(0.02, abs=1e-6)
    se_g, ve_g = grid_bridge(1.0, 0.0, sc.region, uniform_cdf(0.0, 0.4))
    assert ve_numeric(sc, d) == pytest.approx(ve_g, abs=1e-6)


def test_two_point_negative_ve():
    sc = scen(1.0, -1.0, 1.0)
    d = DiscreteBoundary(TWO_POINT, sc.region)
    assert se_numeric(sc, d) == pytest.approx(0.5, abs=1e-12)
    assert ve_numeric(sc, d) == pytest.approx(-0.2, abs=1e-12)
    se_g, ve_g = grid_bridge(1.0, 0.0, sc.region, atoms_cdf(TWO_POINT))
    assert (se_g, ve_g) == pytest.approx((0.5, -0.2), abs=1e-6)
    rep = checksum(sc, d)
    assert rep.se_closed + rep.ve_closed == pytest.approx(0.3, abs=1e-15)
    assert r_add_integral(d, 1.0) == pytest.approx(0.3, abs=1e-15)
    assert abs(rep.checksum_residual) <= 1e-10


def test_symmetric_gaussian_is_pure_variance():
    sc = scen(1.5, -0.6, 0.6)
    d = GaussianBoundary(0.0, 0.01, sc.region)
    rep = checksum(sc, d)
    assert rep.se_closed == pytest.approx(0, abs=1e-15)
    assert rep.ve_closed == pytest.approx(rep.r_add_ref, abs=1e-10)


def test_negative_median_matches_numeric():
    sc = scen(2.0, -0.45, 0.45, 0.02)
    for d in (GaussianBoundary(-0.12, 0.003, sc.region), UniformBoundary(-0.3, 0.05, sc.region),
              DiscreteBoundary([(-0.2, 0.7), (0.1, 0.3)], sc.region)):
        rep = checksum(sc, d)
        assert rep.median < 0
        assert rep.se_numeric == pytest.approx(rep.se_closed, abs=1e-6)
        assert rep.ve_numeric == pytest.approx(rep.ve_closed, abs=1e-6)


def test_region_mismatch():
    with pytest.raises(ValueError, match="region"):
        se_numeric(scen(1.0, -0.5, 0.5), UniformBoundary(-0.1, 0.1, (-0.4, 0.4)))


def test_se_numeric_matches_james_on_a_grid():
    sc = scen(1.0, -0.5, 0.5, 0.1)
    d = UniformBoundary(-0.05, 0.25, sc.region)
    n = 4000
    h = 1.0 / n
    decs = []
    for a in -0.5 + h * (np.arange(n) + 0.5):
        F = d.cdf(a)
        decs.append(james_decompose(LabelDistribution.of(posteriors_at(sc, a)), LabelDistribution.of((1 - F, F, 0.0))))
    tot = aggregate(decs)
    width = sc.t2 - sc.t1
    assert tot.se * width == pytest.approx(se_numeric(sc, d), abs=1e-4)
    assert tot.ve * width == pytest.approx(ve_numeric(sc, d), abs=1e-4)


def test_profiles_cancel():
    d_args = (0.05, 0.004)
    a = scen(1.2, -0.5, 0.5, 0.0)
    b = PosteriorScenario(1.2, -0.5, 0.5, eta=Profile.tabulated([-0.5, 0.0, 0.5], [0.3, 0.1, 0.2]))
    da, db = GaussianBoundary(*d_args, a.region), GaussianBoundary(*d_args, b.region)
    assert se_numeric(a, da) == pytest.approx(se_numeric(b, db), abs=1e-9)
    assert ve_numeric(a, da) == pytest.approx(ve_numeric(b, db), abs=1e-9)


@st.composite
def bridge_case(draw):
    s = draw(st.floats(0.5, 4.0))
    eta = draw(st.floats(0.0, 0.3))
    t = (1 - eta) / s
    sc = scen(s, -t * draw(st.floats(0.3, 1.0)), t * draw(st.floats(0.3, 1.0)), eta)
    t1, t2 = sc.region
    kind = draw(st.sampled_from(["gaussian", "uniform", "two-point"]))
    if kind == "gaussian":
        sd = draw(st.floats(0.02, 0.15)) * min(-t1, t2)
        mu = draw(st.floats(-0.5, 0.5)) * min(-t1, t2)
        d = GaussianBoundary(mu, sd * sd, sc.region)
    elif kind == "uniform":
        lo = draw(st.floats(0.0, 0.9)) * t1
        hi = draw(st.floats(0.0, 0.9)) * t2
        if hi - lo < 1e-3:
            hi = lo + 1e-3
        d = UniformBoundary(lo, hi, sc.region)
    else:
        v1 = draw(st.floats(0.0, 0.95)) * t1
        v2 = draw(st.floats(0.0, 0.95)) * t2
        w = draw(st.floats(0.05, 0.95).filter(lambda x: abs(x - 0.5) > 1e-3))
        d = DiscreteBoundary([(v1, w), (v2, 1 - w)], sc.region)
    return sc, d


@settings(max_examples=40)
@given(bridge_case())
def test_bridge_agreement(case):
    sc, d = case
    rep = checksum(sc, d)
    assert abs(rep.se_closed - rep.se_numeric) <= 1e-5
    assert abs(rep.ve_closed - rep.ve_numeric) <= 1e-5
    assert abs(rep.checksum_residual) <= 1e-10
    assert (rep.ve_closed < 0) == (rep.beta**2 + rep.var_b < rep.median**2)


def test_median_shift_breaks_agreement():
    sc = scen(2.0, -0.45, 0.45)
    d = GaussianBoundary(0.1, 0.002, sc.region)
    assert not checksum(sc, d, median_shift=0.01).within(1e-5)
    assert checksum(sc, d).within(1e-5)
