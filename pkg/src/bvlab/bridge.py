"""James' SE and VE over the transition region, in boundary-distribution terms.

Integrated over the region, the systematic effect depends only on the
boundary median ``m`` and the variance effect on the mean, variance and
median together:

    SE = s * m**2 / 2
    VE = s * (beta**2 + var_b - m**2) / 2  =  R_add - SE

The ``*_numeric`` functions never touch ``m``: they rebuild the per-pattern
label distributions (true posteriors from the scenario, predicted-label
frequencies from the boundary CDF) and integrate James' pointwise SE/VE.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass

import numpy as np

from .added_error import r_add_integral
from .geometry import BoundaryDistribution, PosteriorScenario, boundary_moments
from .quadrature import DEFAULT_TOL, integrate_pieces, piecewise_simpson

TIE_TOL = 1e-12
CHECKSUM_TOL = 1e-10
# reference added error is integrated well below the checksum tolerance
REF_TOL = 1e-13


def se_closed(m: float, s: float) -> float:
    if not s > 0:
        raise ValueError(f"slope must be > 0, got {s}")
    return 0.5 * m * m * s


def ve_closed(beta: float, var_b: float, m: float, s: float) -> float:
    if not s > 0:
        raise ValueError(f"slope must be > 0, got {s}")
    if var_b < 0:
        raise ValueError(f"variance must be >= 0, got {var_b}")
    return 0.5 * (beta * beta + var_b - m * m) * s


def _check_coupling(scenario: PosteriorScenario, d: BoundaryDistribution) -> None:
    if tuple(d.region) != tuple(scenario.region):
        raise ValueError(f"region mismatch: scenario {scenario.region} vs boundary {d.region}")


def _pointwise(scenario: PosteriorScenario, a, F):
    """Per-pattern (SE, VE) given offsets ``a`` and boundary CDF values ``F``.

    Predicted-label frequencies: class i wins when the boundary lies right of
    ``a`` (mass ``1 - F``), class j otherwise.  An exact tie defers to the
    Bayes class at ``a``.
    """
    post = scenario.posteriors(a)
    p_i, p_j = post[..., 0], post[..., 1]
    a = np.asarray(a, dtype=float)
    bayes_is_j = a > 0
    p_sy = np.where(bayes_is_j, p_j, p_i)
    pick_j = np.where(np.abs(F - 0.5) <= TIE_TOL, bayes_is_j, F > 0.5)
    p_syhat = np.where(pick_j, p_j, p_i)
    matched = p_i * (1.0 - F) + p_j * F
    return p_sy - p_syhat, p_syhat - matched


def _half_crossing(d: BoundaryDistribution) -> float:
    """Bisect the CDF for its 0.5 crossing, where the aggregate label flips."""
    lo, hi = d.region
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if d.cdf(mid) < 0.5:
            lo = mid
        else:
            hi = mid
    return hi


def _integrate(scenario, d, which: int, tol: float) -> float:
    _check_coupling(scenario, d)
    pts = sorted({*scenario.breakpoints(), *d.breakpoints()})
    if not d.is_atomic:
        # the integrand jumps where the aggregate label flips; quadrature must see it
        pts = sorted({*pts, _half_crossing(d)})
    if d.is_atomic:
        # integrand is piecewise linear between atoms and kinks: Simpson is exact
        def f(x, ref):
            return _pointwise(scenario, x, d.cdf(ref))[which]

        return piecewise_simpson(f, pts)

    def g(x):
        return float(_pointwise(scenario, x, d.cdf(x))[which])

    return integrate_pieces(g, pts, tol)


def se_numeric(scenario: PosteriorScenario, d: BoundaryDistribution, tol: float = DEFAULT_TOL) -> float:
    """Integrate James' pointwise SE across the region."""
    return _integrate(scenario, d, 0, tol)


def ve_numeric(scenario: PosteriorScenario, d: BoundaryDistribution, tol: float = DEFAULT_TOL) -> float:
    """Integrate James' pointwise VE across the region."""
    return _integrate(scenario, d, 1, tol)


@dataclass
class BridgeReport:
    se_closed: float
    se_numeric: float
    ve_closed: float
    ve_numeric: float
    r_add_ref: float
    checksum_residual: float
    beta: float = 0.0
    var_b: float = 0.0
    median: float = 0.0

    def within(self, tol: float) -> bool:
        return (
            abs(self.se_closed - self.se_numeric) <= tol
            and abs(self.ve_closed - self.ve_numeric) <= tol
            and abs(self.checksum_residual) <= CHECKSUM_TOL
        )

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def checksum(
    scenario: PosteriorScenario, d: BoundaryDistribution, *, median_shift: float = 0.0
) -> BridgeReport:
    """Closed and numeric SE/VE plus the ``SE + VE - R_add`` residual.

    ``median_shift`` deliberately misstates the median fed to the closed
    forms; it exists so the verification harness can prove it fails loudly.
    """
    _check_coupling(scenario, d)
    s = scenario.slope_s
    beta, var_b, m = boundary_moments(d)
    m = m + median_shift
    se_c = se_closed(m, s)
    ve_c = ve_closed(beta, var_b, m, s)
    r_ref = r_add_integral(d, s, tol=REF_TOL)
    return BridgeReport(
        se_closed=se_c,
        se_numeric=se_numeric(scenario, d),
        ve_closed=ve_c,
        ve_numeric=ve_numeric(scenario, d),
        r_add_ref=r_ref,
        checksum_residual=(se_c + ve_c) - r_ref,
        beta=beta,
        var_b=var_b,
        median=m,
    )
