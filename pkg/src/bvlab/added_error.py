"""Expected added error over the Bayes error, computed along independent routes.

A classifier whose boundary sits at offset ``b`` adds a triangle of area
``s * b**2 / 2``.  The expectation over ``b`` can be taken directly
(quadrature or atom sums), from the boundary mean/variance, from the
class-level noise parameters, or by Monte Carlo.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

from .geometry import (
    BoundaryDistribution,
    NoiseModel,
    PosteriorScenario,
    boundary_from_noise,
    boundary_moments,
    sample_boundary,
    tg_class_moments,
)
from .quadrature import DEFAULT_TOL, integrate_pieces

ROUTES = ("integral", "moments", "class-terms", "monte-carlo")
ANALYTIC_TOL = 1e-8
CLASS_TERMS_TOL = 1e-12
MC_SIGMAS = 3.0
# class-level terms ignore truncation; compare them only when it is negligible
TRUNCATION_NEGLIGIBLE = 1e-12


def _check_slope(s: float) -> None:
    if not s > 0:
        raise ValueError(f"slope must be > 0, got {s}")


def r_add_integral(d: BoundaryDistribution, s: float, tol: float = DEFAULT_TOL) -> float:
    """``(s/2) * E[b^2]``: quadrature for densities, exact sums for atoms."""
    _check_slope(s)
    if d.is_atomic:
        return 0.5 * s * math.fsum((d.masses * d.values * d.values).tolist())
    second = integrate_pieces(lambda b: b * b * d.pdf(b), d.breakpoints(), tol)
    return 0.5 * s * second


def r_add_moments(beta: float, var_b: float, s: float) -> float:
    if var_b < 0:
        raise ValueError(f"variance must be >= 0, got {var_b}")
    _check_slope(s)
    return 0.5 * s * (var_b + beta * beta)


def r_add_class_terms(noise: NoiseModel, s: float) -> float:
    """Added error straight from per-class biases, variances and covariance."""
    _check_slope(s)
    beta = (noise.bias_i - noise.bias_j) / s
    return (noise.var_i + noise.var_j - 2.0 * noise.cov) / (2.0 * s) + s * beta * beta / 2.0


def r_add_monte_carlo(
    scenario: PosteriorScenario, noise: NoiseModel, seed: int, n: int, workers: int = 1
) -> tuple[float, float]:
    """Mean triangle area over sampled boundaries, with its standard error."""
    if n < 100:
        raise ValueError("monte carlo estimate needs n >= 100")
    d = sample_boundary(scenario, noise, seed, n, workers=workers)
    area = 0.5 * scenario.slope_s * d.values**2
    return float(area.mean()), float(area.std() / math.sqrt(n))


@dataclass
class AddedErrorReport:
    r_integral: float | None = None
    r_moments: float | None = None
    r_class_terms: float | None = None
    r_monte_carlo: float | None = None
    mc_stderr: float | None = None
    agreement: dict[str, bool] = field(default_factory=dict)
    truncated_mass: float = 0.0

    @property
    def ok(self) -> bool:
        return all(self.agreement.values())

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def added_error_report(
    scenario: PosteriorScenario,
    noise: NoiseModel,
    d: BoundaryDistribution | None = None,
    *,
    routes=ROUTES,
    seed: int = 0,
    n: int = 1_000_000,
) -> AddedErrorReport:
    """Run the selected routes and check every pair that was computed.

    ``d`` defaults to the exact boundary distribution of ``noise``.
    """
    unknown = set(routes) - set(ROUTES)
    if unknown:
        raise ValueError(f"unknown routes {sorted(unknown)}; choose from {ROUTES}")
    s = scenario.slope_s
    d = boundary_from_noise(scenario, noise) if d is None else d
    rep = AddedErrorReport(truncated_mass=float(d.truncated_mass))
    untruncated = d.truncated_mass <= TRUNCATION_NEGLIGIBLE
    if "integral" in routes:
        rep.r_integral = r_add_integral(d, s)
    if "moments" in routes:
        beta, var_b, _ = boundary_moments(d)
        rep.r_moments = r_add_moments(beta, var_b, s)
    if "class-terms" in routes:
        rep.r_class_terms = r_add_class_terms(noise, s)
    if "monte-carlo" in routes:
        rep.r_monte_carlo, rep.mc_stderr = r_add_monte_carlo(scenario, noise, seed, n)

    if rep.r_integral is not None and rep.r_moments is not None:
        rep.agreement["integral~moments"] = abs(rep.r_integral - rep.r_moments) <= ANALYTIC_TOL
    if rep.r_class_terms is not None:
        beta, var_b = tg_class_moments(noise, s)
        ref = r_add_moments(beta, var_b, s)
        rep.agreement["class-terms~noise-moments"] = abs(rep.r_class_terms - ref) <= CLASS_TERMS_TOL
        if untruncated:
            for name, val in (("integral", rep.r_integral), ("moments", rep.r_moments)):
                if val is not None:
                    rep.agreement[f"class-terms~{name}"] = abs(rep.r_class_terms - val) <= ANALYTIC_TOL
    if rep.r_monte_carlo is not None:
        for name, val in (
            ("moments", rep.r_moments),
            ("integral", rep.r_integral),
            ("class-terms", rep.r_class_terms if untruncated else None),
        ):
            if val is not None:
                rep.agreement[f"monte-carlo~{name}"] = (
                    abs(rep.r_monte_carlo - val) <= MC_SIGMAS * rep.mc_stderr + 1e-15
                )
    return rep


__all__ = [
    "AddedErrorReport",
    "added_error_report",
    "r_add_class_terms",
    "r_add_integral",
    "r_add_moments",
    "r_add_monte_carlo",
    "ROUTES",
]
