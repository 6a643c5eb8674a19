"""Added error of a mean-combiner ensemble.

Noise for ``N`` classifiers on the two dominant classes is described by one
joint covariance over ``(n_i^1..n_i^N, n_j^1..n_j^N)``; the per-classifier
and cross-classifier blocks are slices of it.
"""
from __future__ import annotations

import csv
import itertools
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .geometry import NoiseModel

PSD_TOL = 1e-12


@dataclass(frozen=True)
class EnsembleNoiseProfile:
    bias_i: np.ndarray
    bias_j: np.ndarray
    cov: np.ndarray
    slope_s: float

    def __post_init__(self):
        bi = np.atleast_1d(np.asarray(self.bias_i, dtype=float))
        bj = np.atleast_1d(np.asarray(self.bias_j, dtype=float))
        cov = np.atleast_2d(np.asarray(self.cov, dtype=float))
        n = bi.size
        if n < 1 or bj.shape != (n,) or cov.shape != (2 * n, 2 * n):
            raise ValueError(
                f"inconsistent shapes: bias_i {bi.shape}, bias_j {bj.shape}, cov {cov.shape}"
            )
        if not self.slope_s > 0:
            raise ValueError(f"slope must be > 0, got {self.slope_s}")
        if not np.allclose(cov, cov.T, rtol=0, atol=PSD_TOL):
            raise ValueError("covariance must be symmetric")
        scale = max(1.0, float(np.abs(cov).max()))
        if np.linalg.eigvalsh(cov).min() < -PSD_TOL * scale:
            raise ValueError("covariance is not positive semidefinite")
        object.__setattr__(self, "bias_i", bi)
        object.__setattr__(self, "bias_j", bj)
        object.__setattr__(self, "cov", cov)

    @property
    def n_classifiers(self) -> int:
        return self.bias_i.size

    def block(self, a: str, b: str) -> np.ndarray:
        """``N x N`` covariance block, e.g. ``block("i", "j")[m, n] = cov(n_i^m, n_j^n)``."""
        n = self.n_classifiers
        sl = {"i": slice(0, n), "j": slice(n, 2 * n)}
        return self.cov[sl[a], sl[b]]

    def member(self, m: int) -> NoiseModel:
        ii, jj, ij = self.block("i", "i"), self.block("j", "j"), self.block("i", "j")
        return NoiseModel(
            float(self.bias_i[m]), float(self.bias_j[m]),
            float(ii[m, m]), float(jj[m, m]), float(ij[m, m]),
        )

    @classmethod
    def from_members(
        cls,
        members: Sequence[NoiseModel],
        slope_s: float,
        cross_ii: np.ndarray | None = None,
        cross_jj: np.ndarray | None = None,
        cross_ij: np.ndarray | None = None,
    ) -> "EnsembleNoiseProfile":
        """Assemble from per-classifier models plus optional cross-classifier blocks.

        Diagonals of the ``cross_*`` blocks are overwritten by the members.
        """
        n = len(members)
        ii = np.zeros((n, n)) if cross_ii is None else np.array(cross_ii, dtype=float)
        jj = np.zeros((n, n)) if cross_jj is None else np.array(cross_jj, dtype=float)
        ij = np.zeros((n, n)) if cross_ij is None else np.array(cross_ij, dtype=float)
        for m, nm in enumerate(members):
            ii[m, m], jj[m, m], ij[m, m] = nm.var_i, nm.var_j, nm.cov
        cov = np.block([[ii, ij], [ij.T, jj]])
        return cls(
            np.array([nm.bias_i for nm in members]),
            np.array([nm.bias_j for nm in members]),
            cov,
            slope_s,
        )

    @classmethod
    def tg_assumptions(
        cls, sigma2: float, corr_i: np.ndarray, corr_j: np.ndarray, slope_s: float
    ) -> "EnsembleNoiseProfile":
        """Zero bias, equal variances, no between-class covariance (within or across classifiers)."""
        corr_i, corr_j = np.asarray(corr_i, float), np.asarray(corr_j, float)
        n = corr_i.shape[0]
        z = np.zeros((n, n))
        cov = sigma2 * np.block([[corr_i, z], [z, corr_j]])
        return cls(np.zeros(n), np.zeros(n), cov, slope_s)


def ensemble_moments(p: EnsembleNoiseProfile) -> tuple[float, float]:
    """Mean and variance of the averaged boundary offset."""
    n, s = p.n_classifiers, p.slope_s
    beta_ave = (p.bias_i.mean() - p.bias_j.mean()) / s
    w = np.concatenate([np.full(n, 1.0 / n), np.full(n, -1.0 / n)])
    var_ave = float(w @ p.cov @ w) / (s * s)
    return float(beta_ave), max(var_ave, 0.0)


def r_add_ave_full(p: EnsembleNoiseProfile) -> float:
    """Term-by-term: within-classifier block, bias term, cross-classifier block."""
    n, s = p.n_classifiers, p.slope_s
    ii, jj, ij = p.block("i", "i"), p.block("j", "j"), p.block("i", "j")
    within = math.fsum(
        (ii[m, m] + jj[m, m] - 2.0 * ij[m, m]) / (2.0 * s) for m in range(n)
    ) / n**2
    beta_ave = (p.bias_i.mean() - p.bias_j.mean()) / s
    bias_term = 0.5 * s * beta_ave**2
    cross = math.fsum(
        ii[m, k] + jj[m, k] - 2.0 * ij[m, k]
        for m in range(n)
        for k in range(n)
        if m != k
    ) / (2.0 * n**2 * s)
    return within + float(bias_term) + cross


def r_add_ave_simplified(r_add_single: float, n: int, c: float) -> float:
    """Single-classifier added error scaled by ``(1 + C(N-1)) / N``."""
    if n < 1:
        raise ValueError("N must be >= 1")
    num = 1.0 + c * (n - 1)
    # multiply before dividing so C = 0 gives exactly R/N; C = 1 returns R untouched
    out = r_add_single if num == n else r_add_single * num / n
    if out < 0:
        raise ValueError(f"correlation outside feasible range for this N (C={c}, N={n})")
    return out


def profile_correlations(p: EnsembleNoiseProfile) -> tuple[float, float]:
    """Mean pairwise noise correlation among classifiers, per class ``(C_i, C_j)``."""
    n = p.n_classifiers
    out = []
    for cls in ("i", "j"):
        blk = p.block(cls, cls)
        sd = np.sqrt(np.diag(blk))
        rs = [blk[a, b] / (sd[a] * sd[b]) for a, b in itertools.combinations(range(n), 2)]
        out.append(float(np.mean(rs)) if rs else 1.0)
    return out[0], out[1]


# ---------------------------------------------------------------------------
# Correlation from observed error signals
# ---------------------------------------------------------------------------


@dataclass
class CorrelationSummary:
    priors: list[float]
    class_correlations: list[float | None]
    overall: float
    excluded_pairs: int = 0
    pairs_per_class: list[int] = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def estimate_C(
    error_matrices: Sequence[np.ndarray], priors: Sequence[float] | None = None
) -> CorrelationSummary:
    """Prior-weighted mean pairwise Pearson correlation of classifier errors.

    ``error_matrices[i]`` is ``(N classifiers, patterns)`` for class ``i``.
    Pairs where either error vector is constant are skipped and counted.
    A class with no usable pair drops out and the remaining priors are
    renormalized.
    """
    mats = [np.asarray(e, dtype=float) for e in error_matrices]
    k = len(mats)
    if k == 0:
        raise ValueError("need at least one class")
    n, npat = mats[0].shape
    if any(e.shape != (n, npat) for e in mats):
        raise ValueError("all error matrices must share one (classifiers, patterns) shape")
    if n < 2:
        raise ValueError("need at least 2 classifiers to correlate")
    if npat < 2:
        raise ValueError("need at least 2 patterns to correlate")
    pri = np.full(k, 1.0 / k) if priors is None else np.asarray(priors, dtype=float)
    if pri.shape != (k,) or np.any(pri < 0) or abs(pri.sum() - 1.0) > 1e-9:
        raise ValueError("priors must be a simplex with one entry per class")

    excluded = 0
    per_class: list[float | None] = []
    used = []
    for e in mats:
        centered = e - e.mean(axis=1, keepdims=True)
        norms = np.sqrt((centered**2).sum(axis=1))
        ok = norms > 1e-12 * max(1.0, float(np.abs(e).max()))
        rs = []
        for a, b in itertools.combinations(range(n), 2):
            if not (ok[a] and ok[b]):
                excluded += 1
                continue
            r = float(centered[a] @ centered[b] / (norms[a] * norms[b]))
            rs.append(min(1.0, max(-1.0, r)))
        used.append(len(rs))
        per_class.append(math.fsum(rs) / len(rs) if rs else None)
    valid = [i for i, c in enumerate(per_class) if c is not None]
    if not valid:
        raise ValueError("correlation undefined: every error vector is constant")
    w = pri[valid]
    if w.sum() <= 0:
        raise ValueError("correlation undefined: no prior mass on classes with usable pairs")
    overall = math.fsum((w / w.sum() * np.array([per_class[i] for i in valid])).tolist())
    return CorrelationSummary(pri.tolist(), per_class, overall, excluded, used)


def read_error_matrix_csv(path: str | Path) -> np.ndarray:
    """Rows = classifiers, columns = patterns; no header."""
    rows = []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row:
                continue
            try:
                rows.append([float(x) for x in row])
            except ValueError:
                raise ValueError(f"{path}:{lineno}: non-numeric entry") from None
            if len(rows[-1]) != len(rows[0]):
                raise ValueError(f"{path}:{lineno}: expected {len(rows[0])} columns, got {len(rows[-1])}")
    if not rows:
        raise ValueError(f"{path}: empty error matrix")
    return np.asarray(rows)


def write_error_matrix_csv(path: str | Path, mat: np.ndarray) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        for row in np.asarray(mat, dtype=float):
            w.writerow([repr(float(x)) for x in row])
