"""Randomized identity suites: James additivity, the bridge, added-error routes,
the ensemble law and the Geman mapping.

Every suite returns a ``SuiteResult``; ``run_all`` bundles them into a
``VerifyReport`` whose ``ok`` flag drives the CLI exit status.
"""
from __future__ import annotations

import json
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from .added_error import ROUTES, added_error_report
from .bridge import CHECKSUM_TOL, checksum
from .ensemble import (
    EnsembleNoiseProfile,
    profile_correlations,
    r_add_ave_full,
    r_add_ave_simplified,
)
from .geometry import (
    GaussianBoundary,
    NoiseModel,
    PosteriorScenario,
    Profile,
    UniformBoundary,
    boundary_from_noise,
)
from .james import decompose_arrays, geman_decompose
from .learners import class_variance

SUITES = ("james", "bridge", "added-error", "ensemble", "geman")
BRIDGE_FAMILIES = ("gaussian", "uniform", "two-point")
MIN_INSIDE_MASS = 0.99


@dataclass
class VerifyConfig:
    seed: int = 0
    suites: tuple[str, ...] = SUITES
    james_cases: int = 10_000
    bridge_cases: int = 120
    bridge_tol: float = 1e-5
    added_error_cases: int = 12
    routes: tuple[str, ...] = ROUTES
    mc_samples: int = 1_000_000
    ensemble_cases: int = 200
    geman_cases: int = 1000
    # test hook: misstate the median fed to the closed forms
    median_shift: float = 0.0

    def __post_init__(self):
        self.suites = tuple(self.suites)
        self.routes = tuple(self.routes)
        bad = set(self.suites) - set(SUITES)
        if bad:
            raise ValueError(f"unknown suites {sorted(bad)}; choose from {SUITES}")
        bad = set(self.routes) - set(ROUTES)
        if bad:
            raise ValueError(f"unknown routes {sorted(bad)}; choose from {ROUTES}")
        for name in ("james_cases", "bridge_cases", "added_error_cases", "ensemble_cases", "geman_cases"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.mc_samples < 100:
            raise ValueError("mc_samples must be >= 100")


@dataclass
class SuiteResult:
    name: str
    cases: int
    failures: int
    max_error: dict[str, float] = field(default_factory=dict)
    notes: dict[str, object] = field(default_factory=dict)
    rows: list[dict] = field(default_factory=list)
    seconds: float = 0.0

    @property
    def ok(self) -> bool:
        return self.failures == 0


@dataclass
class VerifyReport:
    seed: int
    suites: list[SuiteResult]

    @property
    def ok(self) -> bool:
        return all(s.ok for s in self.suites)

    def to_dict(self, timings: bool = False) -> dict:
        out = {"seed": self.seed, "ok": self.ok, "suites": []}
        for s in self.suites:
            d = asdict(s)
            d["ok"] = s.ok
            if not timings:
                d.pop("seconds")
            out["suites"].append(d)
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def table(self) -> str:
        lines = [f"{'suite':<12} {'cases':>6} {'fail':>5}  max errors"]
        for s in self.suites:
            errs = ", ".join(f"{k}={v:.2e}" for k, v in sorted(s.max_error.items()))
            lines.append(f"{s.name:<12} {s.cases:>6} {s.failures:>5}  {errs}")
        lines.append("PASS" if self.ok else "FAIL")
        return "\n".join(lines)


def _rng(seed: int, suite: str) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(SUITES.index(suite),)))


def _random_simplex(rng, n, k):
    # uniform on the simplex, with occasional exact zeros and one-hot rows
    P = rng.dirichlet(np.ones(k), size=n)
    mask = rng.random((n, k)) < 0.1
    P = np.where(mask, 0.0, P)
    empty = P.sum(axis=1) == 0
    P[empty, 0] = 1.0
    return P / P.sum(axis=1, keepdims=True)


# ---------------------------------------------------------------------------
# Suites
# ---------------------------------------------------------------------------


def james_suite(cfg: VerifyConfig) -> SuiteResult:
    """``loss == Var_Y + SE + VE`` on random simplex pairs, k in 2..10."""
    rng = _rng(cfg.seed, "james")
    ks = rng.integers(2, 11, size=cfg.james_cases)
    worst = 0.0
    for k in range(2, 11):
        n = int(np.sum(ks == k))
        if n == 0:
            continue
        d = decompose_arrays(_random_simplex(rng, n, k), _random_simplex(rng, n, k))
        resid = np.abs(d["expected_loss"] - (d["var_y"] + d["se"] + d["ve"]))
        worst = max(worst, float(resid.max()))
    fails = int(worst > 1e-12)
    return SuiteResult("james", cfg.james_cases, fails, {"additivity": worst})


def _bridge_case(rng, family: str):
    s = float(rng.uniform(0.5, 4.0))
    eta = float(rng.uniform(0.0, 0.2))
    reach = (1.0 - eta) / s
    t1 = -float(rng.uniform(0.5, 1.0)) * reach
    t2 = float(rng.uniform(0.5, 1.0)) * reach
    scen = PosteriorScenario(s, t1, t2, eta=Profile.constant(eta))
    width = t2 - t1
    params: dict = {"slope_s": s, "eta": eta, "t1": t1, "t2": t2, "family": family}
    if family == "gaussian":
        mu = float(rng.uniform(t1 + 0.3 * width, t2 - 0.3 * width))
        # 2.6 sd on the near side keeps >= 99% of the mass inside
        sd = float(rng.uniform(0.05, 1.0)) * min(mu - t1, t2 - mu) / 2.6
        d = GaussianBoundary(mu, sd * sd, scen.region)
        params.update(mean=mu, variance=sd * sd)
        return scen, d, params
    if family == "uniform":
        lo = float(rng.uniform(t1, t1 + 0.5 * width))
        hi = float(rng.uniform(lo + 0.05 * width, t2))
        params.update(lo=lo, hi=hi)
        return scen, UniformBoundary(lo, hi, scen.region), params
    while True:
        # skewed two-point class noise; four boundary atoms
        p_i, p_j = rng.uniform(0.1, 0.9, size=2)
        scale = float(rng.uniform(0.05, 0.3)) * s * width
        v_i, v_j = (scale * rng.uniform(0.1, 1.0, size=2)) ** 2
        bias = float(rng.uniform(-0.2, 0.2)) * s * width
        noise = NoiseModel(bias, 0.0, float(v_i), float(v_j), family="two-point",
                           skew_i=float(p_i), skew_j=float(p_j))
        try:
            d = boundary_from_noise(scen, noise)
        except ValueError:
            continue
        # keep the cdf away from exactly one half so the median is unambiguous
        if d.truncated_mass <= 1.0 - MIN_INSIDE_MASS and np.all(np.abs(d.cdf(d.values) - 0.5) > 1e-6):
            params.update(bias_i=bias, var_i=float(v_i), var_j=float(v_j), skew=[float(p_i), float(p_j)])
            return scen, d, params


def bridge_suite(cfg: VerifyConfig) -> SuiteResult:
    """Closed-form SE/VE against pointwise integration, and the checksum."""
    rng = _rng(cfg.seed, "bridge")
    rows, fails = [], 0
    worst = {"se": 0.0, "ve": 0.0, "checksum": 0.0}
    negative_ve = 0
    for idx in range(cfg.bridge_cases):
        family = BRIDGE_FAMILIES[idx % len(BRIDGE_FAMILIES)]
        scen, d, params = _bridge_case(rng, family)
        rep = checksum(scen, d, median_shift=cfg.median_shift)
        se_err = abs(rep.se_closed - rep.se_numeric)
        ve_err = abs(rep.ve_closed - rep.ve_numeric)
        ok = se_err <= cfg.bridge_tol and ve_err <= cfg.bridge_tol and abs(rep.checksum_residual) <= CHECKSUM_TOL
        fails += not ok
        worst["se"] = max(worst["se"], se_err)
        worst["ve"] = max(worst["ve"], ve_err)
        worst["checksum"] = max(worst["checksum"], abs(rep.checksum_residual))
        negative_ve += rep.ve_numeric < 0 and ok
        rows.append({"case": idx, **params, **rep.to_dict(), "ok": ok})
    notes = {"negative_ve_cases": negative_ve}
    if negative_ve == 0:
        fails += 1
        notes["error"] = "no case with VE < 0 was generated"
    return SuiteResult("bridge", cfg.bridge_cases, fails, worst, notes, rows)


def added_error_suite(cfg: VerifyConfig) -> SuiteResult:
    """All requested R_add routes on untruncated Gaussian noise."""
    rng = _rng(cfg.seed, "added-error")
    rows, fails = [], 0
    worst: dict[str, float] = {}
    for idx in range(cfg.added_error_cases):
        s = float(rng.uniform(0.5, 4.0))
        eta = float(rng.uniform(0.0, 0.2))
        reach = (1.0 - eta) / s
        scen = PosteriorScenario(s, -reach, reach, eta=Profile.constant(eta))
        # region spans >= 9 boundary sd on each side: truncation is far below 1e-15
        sd_b = float(rng.uniform(0.02, 0.1)) * reach
        sd_i, sd_j = rng.uniform(0.2, 1.0, size=2)
        rho = float(rng.uniform(-0.5, 0.5))
        raw = (sd_i**2 + sd_j**2 - 2 * rho * sd_i * sd_j) / (s * s)
        f = sd_b**2 / raw
        var_i, var_j = float(f * sd_i**2), float(f * sd_j**2)
        cov = float(f * rho * sd_i * sd_j)
        bias_i = float(rng.uniform(-0.1, 0.1)) * s * reach
        noise = NoiseModel(bias_i, 0.0, var_i, var_j, cov)
        rep = added_error_report(scen, noise, routes=cfg.routes, seed=cfg.seed + idx, n=cfg.mc_samples)
        fails += not rep.ok
        vals = [v for v in (rep.r_integral, rep.r_moments, rep.r_class_terms) if v is not None]
        if len(vals) > 1:
            worst["analytic"] = max(worst.get("analytic", 0.0), max(vals) - min(vals))
        if rep.r_monte_carlo is not None and vals:
            z = max(abs(rep.r_monte_carlo - v) for v in vals) / rep.mc_stderr
            worst["mc_sigmas"] = max(worst.get("mc_sigmas", 0.0), z)
        rows.append({"case": idx, "slope_s": s, **asdict(noise), **rep.to_dict(), "ok": rep.ok})
    return SuiteResult("added-error", cfg.added_error_cases, fails, worst,
                       {"routes": list(cfg.routes)}, rows)


def _random_correlation(rng, n):
    F = rng.normal(size=(n, int(rng.integers(1, n + 1))))
    F *= rng.uniform(0.0, 1.5)
    S = F @ F.T + np.diag(rng.uniform(0.05, 1.0, size=n))
    d = np.sqrt(np.diag(S))
    R = S / np.outer(d, d)
    np.fill_diagonal(R, 1.0)
    return R


def ensemble_suite(cfg: VerifyConfig) -> SuiteResult:
    """Full ensemble added error against the ``(1 + C(N-1))/N`` law."""
    rng = _rng(cfg.seed, "ensemble")
    fails = 0
    worst = 0.0
    for _ in range(cfg.ensemble_cases):
        n = int(rng.integers(2, 11))
        s = float(rng.uniform(0.5, 4.0))
        sigma2 = float(rng.uniform(1e-4, 0.05))
        prof = EnsembleNoiseProfile.tg_assumptions(
            sigma2, _random_correlation(rng, n), _random_correlation(rng, n), s
        )
        c_i, c_j = profile_correlations(prof)
        single = prof.member(0)
        r_single = (single.var_i + single.var_j) / (2 * s)
        full = r_add_ave_full(prof)
        simple = r_add_ave_simplified(r_single, n, 0.5 * (c_i + c_j))
        err = abs(full - simple)
        worst = max(worst, err)
        fails += err > 1e-10
    # exact special cases
    r = float(rng.uniform(1e-3, 0.1))
    exact = {
        "C=1": r_add_ave_simplified(r, 6, 1.0) == r,
        "C=0,N=6": r_add_ave_simplified(r, 6, 0.0) == r / 6,
    }
    fails += sum(not v for v in exact.values())
    return SuiteResult("ensemble", cfg.ensemble_cases, fails, {"full~simplified": worst}, {"exact": exact})


def geman_suite(cfg: VerifyConfig) -> SuiteResult:
    """Geman terms sum to the MSE; class_variance on one pattern matches."""
    rng = _rng(cfg.seed, "geman")
    worst = {"sum~mse": 0.0, "class_variance~geman": 0.0}
    fails = 0
    for _ in range(cfg.geman_cases):
        n_cls = int(rng.integers(2, 30))
        k = int(rng.integers(2, 8))
        est = rng.dirichlet(np.ones(k), size=n_cls)
        target = rng.dirichlet(np.ones(k))
        i = int(rng.integers(k))
        variance, bias_sq, noise = geman_decompose(est[:, i], float(target[i]), 0.0)
        mse = float(np.mean((est[:, i] - target[i]) ** 2))
        e1 = abs(variance + bias_sq + noise - mse)
        e2 = abs(class_variance(est[:, None, :], i) - variance)
        worst["sum~mse"] = max(worst["sum~mse"], e1)
        worst["class_variance~geman"] = max(worst["class_variance~geman"], e2)
        fails += e1 > 1e-12 or e2 > 1e-12
    return SuiteResult("geman", cfg.geman_cases, fails, worst)


_RUNNERS = {
    "james": james_suite,
    "bridge": bridge_suite,
    "added-error": added_error_suite,
    "ensemble": ensemble_suite,
    "geman": geman_suite,
}


def run_all(cfg: VerifyConfig) -> VerifyReport:
    out = []
    for name in SUITES:
        if name not in cfg.suites:
            continue
        t0 = time.perf_counter()
        res = _RUNNERS[name](cfg)
        res.seconds = time.perf_counter() - t0
        out.append(res)
    return VerifyReport(cfg.seed, out)
