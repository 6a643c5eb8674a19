"""Transition-region model of a two-class decision boundary.

A pattern is addressed by its signed distance ``a`` from the Bayes point.
Inside the region ``[t1, t2]`` only two classes carry posterior mass, plus a
lumped residual ``eta``.  A trained classifier puts its boundary at offset
``b``; the distribution of ``b`` over training realizations is what every
other module consumes.
"""
from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from statistics import NormalDist
from typing import Any, Mapping, Sequence

import numpy as np

SUM_TOL = 1e-12
MEDIAN_TOL = 1e-12
MAX_REJECTION = 0.5
SAMPLE_CHUNK = 1 << 16

_STD_NORMAL = NormalDist()
_SQRT2 = math.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


class RegionEscapeError(ValueError):
    """Too much boundary mass falls outside the transition region."""


# ---------------------------------------------------------------------------
# Profiles over the region
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Profile:
    """Constant or piecewise-linear function of the offset ``a``."""

    nodes: tuple[float, ...] = ()
    values: tuple[float, ...] = (0.0,)

    def __post_init__(self):
        if self.nodes:
            if len(self.nodes) != len(self.values) or len(self.nodes) < 2:
                raise ValueError("tabulated profile needs matching nodes/values, at least 2")
            if any(b <= a for a, b in zip(self.nodes[:-1], self.nodes[1:])):
                raise ValueError("profile nodes must be strictly increasing")
        elif len(self.values) != 1:
            raise ValueError("constant profile takes exactly one value")

    @classmethod
    def constant(cls, value: float) -> "Profile":
        return cls((), (float(value),))

    @classmethod
    def tabulated(cls, nodes: Sequence[float], values: Sequence[float]) -> "Profile":
        return cls(tuple(float(x) for x in nodes), tuple(float(v) for v in values))

    @classmethod
    def from_json(cls, obj: Any) -> "Profile":
        if isinstance(obj, (int, float)):
            return cls.constant(obj)
        if isinstance(obj, Mapping) and set(obj) == {"nodes", "values"}:
            return cls.tabulated(obj["nodes"], obj["values"])
        raise ValueError(f"profile must be a number or {{nodes, values}}, got {obj!r}")

    def to_json(self) -> Any:
        if not self.nodes:
            return self.values[0]
        return {"nodes": list(self.nodes), "values": list(self.values)}

    @property
    def is_constant(self) -> bool:
        return not self.nodes

    def __call__(self, a):
        if not self.nodes:
            if np.ndim(a) == 0:
                return self.values[0]
            return np.full(np.shape(a), self.values[0])
        out = np.interp(a, self.nodes, self.values)
        return float(out) if np.ndim(a) == 0 else out


# ---------------------------------------------------------------------------
# Posterior scenario
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PosteriorScenario:
    """Linearized posteriors around the Bayes point.

    ``slope_s`` is the difference of the two dominant posteriors' slopes at
    the Bayes point.  The Bayes error profile is not free: once ``slope_s``
    and ``eta`` are fixed, posteriors summing to one force
    ``z(a) = (1 + eta(a) - s|a|) / 2``.  A user-supplied ``z`` is therefore
    only checked against that reconstruction.
    """

    slope_s: float
    t1: float
    t2: float
    eta: Profile = field(default_factory=lambda: Profile.constant(0.0))
    z: Profile | None = None

    def __post_init__(self):
        if not self.slope_s > 0:
            raise ValueError(f"slope_s must be > 0, got {self.slope_s}")
        if not (self.t1 < 0 < self.t2):
            raise ValueError(f"region must satisfy t1 < 0 < t2, got ({self.t1}, {self.t2})")
        probe = self.probe_points()
        eta = np.asarray(self.eta(probe), dtype=float)
        if np.any(eta < 0) or np.any(eta > 1):
            raise ValueError("eta must lie in [0, 1] over the region")
        # second-dominant posterior (z - eta) must stay nonnegative
        second = 0.5 * (1.0 - eta - self.slope_s * np.abs(probe))
        if np.any(second < -SUM_TOL):
            worst = probe[int(np.argmin(second))]
            raise ValueError(
                f"region too wide for slope {self.slope_s} and eta: second posterior "
                f"negative at a={worst:g} (need s*|a| + eta <= 1)"
            )
        if self.z is not None:
            zprobe = np.union1d(probe, np.asarray(self.z.nodes, dtype=float))
            zprobe = zprobe[(zprobe >= self.t1) & (zprobe <= self.t2)]
            given = np.asarray(self.z(zprobe), dtype=float)
            implied = self.bayes_error(zprobe)
            bad = np.abs(given - implied) > SUM_TOL
            if np.any(bad):
                a = zprobe[int(np.argmax(bad))]
                raise ValueError(
                    f"z profile inconsistent with slope and eta at a={a:g}: "
                    f"given {float(self.z(a)):.12g}, posteriors need {float(self.bayes_error(a)):.12g}"
                )

    @property
    def region(self) -> tuple[float, float]:
        return (self.t1, self.t2)

    def probe_points(self) -> np.ndarray:
        pts = [self.t1, 0.0, self.t2, *self.eta.nodes]
        if self.z is not None:
            pts.extend(self.z.nodes)
        pts = np.unique(np.asarray(pts, dtype=float))
        return pts[(pts >= self.t1) & (pts <= self.t2)]

    def breakpoints(self) -> list[float]:
        """Points where the posterior curves may have kinks."""
        return self.probe_points().tolist()

    def bayes_error(self, a):
        return 0.5 * (1.0 + self.eta(a) - self.slope_s * np.abs(a))

    def posteriors(self, a) -> np.ndarray:
        """Vectorized ``(p_i, p_j, p_r)`` rows, shape ``(..., 3)``."""
        a = np.asarray(a, dtype=float)
        eta = np.asarray(self.eta(a), dtype=float)
        second = 0.5 * (1.0 - eta - self.slope_s * np.abs(a))
        first = second + self.slope_s * np.abs(a)
        p_i = np.where(a > 0, second, first)
        p_j = np.where(a > 0, first, second)
        return np.stack([p_i, p_j, eta], axis=-1)

    def to_json(self) -> dict:
        out = {"slope_s": self.slope_s, "t1": self.t1, "t2": self.t2, "eta": self.eta.to_json()}
        if self.z is not None:
            out["z"] = self.z.to_json()
        return out


def posteriors_at(scenario: PosteriorScenario, a: float) -> tuple[float, float, float]:
    """True posteriors ``(p_i, p_j, p_r)`` at offset ``a``.

    Class j is the Bayes class for ``a > 0`` and class i for ``a < 0``.
    """
    if not (scenario.t1 <= a <= scenario.t2):
        raise ValueError(f"a={a} outside region [{scenario.t1}, {scenario.t2}]")
    eta = float(scenario.eta(a))
    z = float(scenario.bayes_error(a))
    first, second = 1.0 - z, z - eta
    if a > 0:
        return second, first, eta
    if a < 0:
        return first, second, eta
    return second, second, eta


# ---------------------------------------------------------------------------
# Noise model
# ---------------------------------------------------------------------------

NOISE_FAMILIES = ("gaussian", "two-point")


@dataclass(frozen=True)
class NoiseModel:
    """Per-class posterior estimation error ``eps = bias + noise``.

    ``family="two-point"`` gives skewed zero-mean noise taking
    ``sigma*sqrt((1-p)/p)`` with probability ``p`` and ``-sigma*sqrt(p/(1-p))``
    otherwise; the two classes are then independent.
    """

    bias_i: float = 0.0
    bias_j: float = 0.0
    var_i: float = 0.0
    var_j: float = 0.0
    cov: float = 0.0
    family: str = "gaussian"
    skew_i: float = 0.5
    skew_j: float = 0.5

    def __post_init__(self):
        if self.family not in NOISE_FAMILIES:
            raise ValueError(f"unknown noise family {self.family!r}")
        if not (math.isfinite(self.var_i) and math.isfinite(self.var_j)):
            raise ValueError("noise variances must be finite")
        if self.var_i < 0 or self.var_j < 0:
            raise ValueError("noise variances must be >= 0")
        if abs(self.cov) > math.sqrt(self.var_i) * math.sqrt(self.var_j) * (1 + 1e-12) + 1e-300:
            raise ValueError("|cov| must not exceed sigma_i * sigma_j")
        if self.family == "two-point":
            if self.cov != 0:
                raise ValueError("two-point noise supports independent classes only (cov=0)")
            for p in (self.skew_i, self.skew_j):
                if not 0 < p < 1:
                    raise ValueError("two-point skew must be in (0, 1)")

    def two_point_atoms(self, var: float, p: float) -> list[tuple[float, float]]:
        if var == 0:
            return [(0.0, 1.0)]
        sd = math.sqrt(var)
        return [(sd * math.sqrt((1 - p) / p), p), (-sd * math.sqrt(p / (1 - p)), 1 - p)]

    def draw(self, rng: np.random.Generator, n: int) -> tuple[np.ndarray, np.ndarray]:
        if self.family == "two-point":
            out = []
            for var, p in ((self.var_i, self.skew_i), (self.var_j, self.skew_j)):
                atoms = self.two_point_atoms(var, p)
                if len(atoms) == 1:
                    out.append(np.zeros(n))
                    continue
                up = rng.random(n) < p
                out.append(np.where(up, atoms[0][0], atoms[1][0]))
            return out[0], out[1]
        z1 = rng.standard_normal(n)
        z2 = rng.standard_normal(n)
        sd_i, sd_j = math.sqrt(self.var_i), math.sqrt(self.var_j)
        rho = self.cov / (sd_i * sd_j) if sd_i > 0 and sd_j > 0 else 0.0
        rho = max(-1.0, min(1.0, rho))
        n_i = sd_i * z1
        n_j = sd_j * (rho * z1 + math.sqrt(max(0.0, 1.0 - rho * rho)) * z2)
        return n_i, n_j


def tg_class_moments(noise: NoiseModel, s: float) -> tuple[float, float]:
    """Mean and variance of the boundary offset implied by class-level errors."""
    if not s > 0:
        raise ValueError(f"slope must be > 0, got {s}")
    beta = (noise.bias_i - noise.bias_j) / s
    var_b = (noise.var_i + noise.var_j - 2.0 * noise.cov) / (s * s)
    return beta, max(var_b, 0.0)


# ---------------------------------------------------------------------------
# Boundary distributions
# ---------------------------------------------------------------------------


def _phi(x: float) -> float:
    return _INV_SQRT_2PI * math.exp(-0.5 * x * x)


def _Phi(x: float) -> float:
    return 0.5 * math.erfc(-x / _SQRT2)


def _Q(x: float) -> float:
    return 0.5 * math.erfc(x / _SQRT2)


class BoundaryDistribution:
    """Distribution of the boundary offset ``b``, truncated to the region."""

    form: str = ""
    region: tuple[float, float]
    truncated_mass: float

    @property
    def is_atomic(self) -> bool:
        return False

    def cdf(self, x: float) -> float:
        raise NotImplementedError

    def mean(self) -> float:
        raise NotImplementedError

    def var(self) -> float:
        raise NotImplementedError

    def median(self) -> float:
        raise NotImplementedError

    def breakpoints(self) -> list[float]:
        return list(self.region)

    def _check_region(self, region):
        t1, t2 = float(region[0]), float(region[1])
        if not t1 < t2:
            raise ValueError(f"bad region {region}")
        return t1, t2

    def _check_truncation(self):
        if self.truncated_mass > MAX_REJECTION:
            raise RegionEscapeError(
                f"boundary distribution escapes decision region "
                f"({self.truncated_mass:.1%} of mass outside {self.region})"
            )


class GaussianBoundary(BoundaryDistribution):
    form = "analytic-gaussian"

    def __init__(self, mean: float, variance: float, region: Sequence[float]):
        if not variance > 0:
            raise ValueError("gaussian boundary needs variance > 0; use a point mass instead")
        self.region = self._check_region(region)
        self.mu = float(mean)
        self.sigma = math.sqrt(variance)
        t1, t2 = self.region
        self._alpha = (t1 - self.mu) / self.sigma
        self._beta = (t2 - self.mu) / self.sigma
        al, be = self._alpha, self._beta
        if al >= 0:
            z = _Q(al) - _Q(be)
        elif be <= 0:
            z = _Phi(be) - _Phi(al)
        else:
            z = 1.0 - _Phi(al) - _Q(be)
        if not z > 0:
            raise RegionEscapeError("gaussian boundary has no mass inside the region")
        self._z = z
        self._phi_lo = _Phi(al)
        self.truncated_mass = max(0.0, 1.0 - z)
        self._check_truncation()

    def __repr__(self):
        return f"GaussianBoundary(mean={self.mu!r}, sd={self.sigma!r}, region={self.region!r})"

    def pdf(self, x: float) -> float:
        if x < self.region[0] or x > self.region[1]:
            return 0.0
        return _phi((x - self.mu) / self.sigma) / (self.sigma * self._z)

    def cdf(self, x: float) -> float:
        if x <= self.region[0]:
            return 0.0
        if x >= self.region[1]:
            return 1.0
        u = (x - self.mu) / self.sigma
        if u > 0 and self._alpha < 0:
            # upper tail form keeps precision when the cdf is near 1
            return 1.0 - (_Q(u) - _Q(self._beta)) / self._z
        return (_Phi(u) - self._phi_lo) / self._z

    def mean(self) -> float:
        d = (_phi(self._alpha) - _phi(self._beta)) / self._z
        return self.mu + self.sigma * d

    def var(self) -> float:
        al, be = self._alpha, self._beta
        d = (_phi(al) - _phi(be)) / self._z
        # phi(+-inf) * inf -> 0
        tail = (al * _phi(al) if math.isfinite(al) else 0.0) - (be * _phi(be) if math.isfinite(be) else 0.0)
        return self.sigma**2 * max(0.0, 1.0 + tail / self._z - d * d)

    def median(self) -> float:
        target = self._phi_lo + 0.5 * self._z
        return self.mu + self.sigma * _STD_NORMAL.inv_cdf(target)

    def breakpoints(self) -> list[float]:
        t1, t2 = self.region
        pts = [t1, t2] + [self.mu + k * self.sigma for k in range(-10, 11)]
        return sorted(p for p in set(pts) if t1 <= p <= t2)


class UniformBoundary(BoundaryDistribution):
    form = "analytic-uniform"

    def __init__(self, lo: float, hi: float, region: Sequence[float]):
        if not hi > lo:
            raise ValueError("uniform boundary needs hi > lo; use a point mass instead")
        self.region = self._check_region(region)
        self.raw = (float(lo), float(hi))
        t1, t2 = self.region
        self.lo, self.hi = max(lo, t1), min(hi, t2)
        if not self.hi > self.lo:
            raise RegionEscapeError("uniform boundary has no mass inside the region")
        self.truncated_mass = max(0.0, 1.0 - (self.hi - self.lo) / (hi - lo))
        self._check_truncation()

    def __repr__(self):
        return f"UniformBoundary(lo={self.lo!r}, hi={self.hi!r}, region={self.region!r})"

    def pdf(self, x: float) -> float:
        return 1.0 / (self.hi - self.lo) if self.lo <= x <= self.hi else 0.0

    def cdf(self, x: float) -> float:
        return min(1.0, max(0.0, (x - self.lo) / (self.hi - self.lo)))

    def mean(self) -> float:
        return 0.5 * (self.lo + self.hi)

    def var(self) -> float:
        return (self.hi - self.lo) ** 2 / 12.0

    def median(self) -> float:
        return 0.5 * (self.lo + self.hi)

    def breakpoints(self) -> list[float]:
        return sorted({*self.region, self.lo, self.hi})


class DiscreteBoundary(BoundaryDistribution):
    """Finite atoms ``(value, mass)``; also backs empirical sample sets."""

    def __init__(
        self,
        atoms: Sequence[tuple[float, float]],
        region: Sequence[float],
        *,
        form: str = "discrete",
        truncated_mass: float | None = None,
    ):
        self.region = self._check_region(region)
        self.form = form
        if len(atoms) == 0:
            raise ValueError("boundary distribution needs at least one atom")
        vals = np.asarray([float(v) for v, _ in atoms])
        mass = np.asarray([float(w) for _, w in atoms])
        if np.any(mass < 0) or not np.all(np.isfinite(vals)):
            raise ValueError("atom masses must be >= 0 and values finite")
        total = math.fsum(mass.tolist())
        if not total > 0:
            raise ValueError("atoms carry no mass")
        t1, t2 = self.region
        keep = (vals >= t1) & (vals <= t2)
        kept = math.fsum(mass[keep].tolist())
        if kept <= 0:
            raise RegionEscapeError("no boundary mass inside the region")
        order = np.argsort(vals[keep], kind="stable")
        self.values = vals[keep][order]
        self.masses = mass[keep][order] / kept
        self.truncated_mass = (
            (total - kept) / total if truncated_mass is None else float(truncated_mass)
        )
        self._cum = np.cumsum(self.masses)
        self._check_truncation()

    @classmethod
    def point(cls, value: float, region: Sequence[float]) -> "DiscreteBoundary":
        return cls([(value, 1.0)], region)

    @classmethod
    def from_samples(
        cls, samples: Sequence[float], region: Sequence[float], truncated_mass: float = 0.0
    ) -> "DiscreteBoundary":
        samples = np.asarray(samples, dtype=float)
        if samples.size == 0:
            raise ValueError("empirical boundary distribution needs at least one sample")
        t1, t2 = float(region[0]), float(region[1])
        if np.any((samples < t1) | (samples > t2)):
            raise ValueError("empirical samples must lie inside the region")
        obj = cls.__new__(cls)
        obj.region = obj._check_region(region)
        obj.form = "empirical"
        obj.values = np.sort(samples)
        obj.masses = np.full(samples.size, 1.0 / samples.size)
        obj._cum = np.arange(1, samples.size + 1) / samples.size
        obj.truncated_mass = float(truncated_mass)
        return obj

    def __repr__(self):
        return f"DiscreteBoundary(form={self.form!r}, n_atoms={self.values.size}, region={self.region!r})"

    @property
    def is_atomic(self) -> bool:
        return True

    @property
    def atoms(self) -> list[tuple[float, float]]:
        return list(zip(self.values.tolist(), self.masses.tolist()))

    def cdf(self, x):
        """Mass at or below ``x``."""
        idx = np.searchsorted(self.values, x, side="right")
        cum = np.concatenate([[0.0], self._cum])
        out = cum[idx]
        return float(out) if np.ndim(x) == 0 else out

    def mean(self) -> float:
        return float(np.dot(self.masses, self.values))

    def second_moment(self) -> float:
        return float(np.dot(self.masses, self.values * self.values))

    def var(self) -> float:
        mu = self.mean()
        return float(np.dot(self.masses, (self.values - mu) ** 2))

    def median(self) -> float:
        idx = int(np.searchsorted(self._cum, 0.5 - MEDIAN_TOL, side="left"))
        return float(self.values[min(idx, self.values.size - 1)])

    def breakpoints(self) -> list[float]:
        return sorted({*self.region, *self.values.tolist()})


def boundary_moments(d: BoundaryDistribution) -> tuple[float, float, float]:
    """``(beta, var_b, median)`` of a boundary distribution.

    The median is ``inf{x : CDF(x) >= 0.5}``.
    """
    return d.mean(), d.var(), d.median()


def boundary_from_noise(scenario: PosteriorScenario, noise: NoiseModel) -> BoundaryDistribution:
    """Exact boundary distribution implied by a noise model, truncated to the region."""
    s = scenario.slope_s
    beta, var_b = tg_class_moments(noise, s)
    if noise.family == "gaussian":
        if var_b == 0:
            return DiscreteBoundary.point(beta, scenario.region)
        return GaussianBoundary(beta, var_b, scenario.region)
    atoms = []
    for ni, wi in noise.two_point_atoms(noise.var_i, noise.skew_i):
        for nj, wj in noise.two_point_atoms(noise.var_j, noise.skew_j):
            atoms.append(((ni - nj) / s + beta, wi * wj))
    return DiscreteBoundary(atoms, scenario.region)


def _draw_chunk(scenario, noise, seed, index, size):
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))
    n_i, n_j = noise.draw(rng, size)
    s = scenario.slope_s
    b = (n_i - n_j) / s + (noise.bias_i - noise.bias_j) / s
    inside = (b >= scenario.t1) & (b <= scenario.t2)
    return b[inside], size


def sample_boundary(
    scenario: PosteriorScenario,
    noise: NoiseModel,
    seed: int,
    n: int,
    workers: int = 1,
) -> DiscreteBoundary:
    """Draw ``n`` in-region boundary offsets.

    Draws are made in fixed-size chunks, each seeded from ``(seed, chunk
    index)``, so the result does not depend on ``workers``.  Out-of-region
    draws are rejected and replaced; their share is ``truncated_mass``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    sizes = [SAMPLE_CHUNK] * (n // SAMPLE_CHUNK)
    if n % SAMPLE_CHUNK:
        sizes.append(n % SAMPLE_CHUNK)

    def run(jobs):
        if workers > 1 and len(jobs) > 1:
            with ThreadPoolExecutor(workers) as ex:
                return list(ex.map(lambda j: _draw_chunk(scenario, noise, seed, *j), jobs))
        return [_draw_chunk(scenario, noise, seed, *j) for j in jobs]

    results = run(list(enumerate(sizes)))
    kept = [r[0] for r in results]
    accepted = sum(k.size for k in kept)
    drawn = sum(r[1] for r in results)
    if (drawn - accepted) / drawn > MAX_REJECTION:
        raise RegionEscapeError(
            f"boundary distribution escapes decision region "
            f"({(drawn - accepted) / drawn:.1%} of draws outside {scenario.region})"
        )
    next_index = len(sizes)
    while accepted < n:
        b, size = _draw_chunk(scenario, noise, seed, next_index, SAMPLE_CHUNK)
        kept.append(b)
        accepted += b.size
        drawn += size
        next_index += 1
    samples = np.concatenate(kept)[:n]
    # rejected share over every raw draw consumed
    return DiscreteBoundary.from_samples(samples, scenario.region, (drawn - accepted) / drawn)


# ---------------------------------------------------------------------------
# JSON documents
# ---------------------------------------------------------------------------

SCENARIO_SCHEMA_VERSION = 1
_SCENARIO_KEYS = {
    "schema_version", "slope_s", "t1", "t2", "z", "eta", "biases", "variances",
    "cov", "noise_family", "skew", "boundary",
}
_BOUNDARY_KEYS = {
    "gaussian": {"family", "mean", "variance"},
    "uniform": {"family", "lo", "hi"},
    "discrete": {"family", "atoms"},
    "from-noise": {"family"},
    "empirical": {"family", "n", "seed"},
}


@dataclass(frozen=True)
class ScenarioDocument:
    scenario: PosteriorScenario
    noise: NoiseModel
    boundary: BoundaryDistribution


def parse_boundary(spec: Mapping, scenario: PosteriorScenario, noise: NoiseModel) -> BoundaryDistribution:
    family = spec.get("family")
    if family not in _BOUNDARY_KEYS:
        raise ValueError(f"unknown boundary family {family!r}")
    extra = set(spec) - _BOUNDARY_KEYS[family]
    if extra:
        raise ValueError(f"unknown keys for boundary family {family!r}: {sorted(extra)}")
    region = scenario.region
    if family == "gaussian":
        if spec["variance"] == 0:
            return DiscreteBoundary.point(spec["mean"], region)
        return GaussianBoundary(spec["mean"], spec["variance"], region)
    if family == "uniform":
        return UniformBoundary(spec["lo"], spec["hi"], region)
    if family == "discrete":
        return DiscreteBoundary([tuple(a) for a in spec["atoms"]], region)
    if family == "empirical":
        return sample_boundary(scenario, noise, int(spec["seed"]), int(spec["n"]))
    return boundary_from_noise(scenario, noise)


def parse_scenario(doc: Mapping) -> ScenarioDocument:
    """Build scenario, noise model and boundary distribution from a JSON mapping."""
    unknown = set(doc) - _SCENARIO_KEYS
    if unknown:
        raise ValueError(f"unknown scenario keys: {sorted(unknown)}")
    version = doc.get("schema_version", SCENARIO_SCHEMA_VERSION)
    if version != SCENARIO_SCHEMA_VERSION:
        raise ValueError(f"unsupported scenario schema_version {version}")
    for key in ("slope_s", "t1", "t2"):
        if key not in doc:
            raise ValueError(f"scenario missing required key {key!r}")
    scenario = PosteriorScenario(
        float(doc["slope_s"]),
        float(doc["t1"]),
        float(doc["t2"]),
        eta=Profile.from_json(doc.get("eta", 0.0)),
        z=Profile.from_json(doc["z"]) if "z" in doc else None,
    )
    bi, bj = doc.get("biases", (0.0, 0.0))
    vi, vj = doc.get("variances", (0.0, 0.0))
    pi, pj = doc.get("skew", (0.5, 0.5))
    noise = NoiseModel(
        float(bi), float(bj), float(vi), float(vj), float(doc.get("cov", 0.0)),
        family=doc.get("noise_family", "gaussian"), skew_i=float(pi), skew_j=float(pj),
    )
    boundary = parse_boundary(doc.get("boundary", {"family": "from-noise"}), scenario, noise)
    return ScenarioDocument(scenario, noise, boundary)


def load_scenario_json(path: str | Path) -> ScenarioDocument:
    with open(path) as fh:
        return parse_scenario(json.load(fh))
