"""James' generalized bias/variance for 0/1 loss, plus Geman's squared-error split.

For one pattern, ``P`` is the response label distribution and ``P_hat`` the
distribution of predicted labels over training sets.  Under 0/1 loss:

    loss = Var(Y) + SE + VE
    Var(Y) = 1 - max P
    SE     = P[SY] - P[SY_hat]
    VE     = P[SY_hat] - sum_i P[i] * P_hat[i]

where SY / SY_hat are the argmaxes of P / P_hat.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

SIMPLEX_TOL = 1e-12


@dataclass(frozen=True)
class LabelDistribution:
    probs: tuple[float, ...]

    def __post_init__(self):
        p = self.probs
        if len(p) < 2:
            raise ValueError("label distribution needs k >= 2 classes")
        if any(not (0.0 <= x <= 1.0) for x in p):
            raise ValueError(f"probabilities must lie in [0, 1]: {p}")
        if abs(math.fsum(p) - 1.0) > SIMPLEX_TOL:
            raise ValueError(f"probabilities must sum to 1, got {math.fsum(p)!r}")

    @classmethod
    def of(cls, probs: Iterable[float]) -> "LabelDistribution":
        return cls(tuple(float(x) for x in probs))

    @property
    def k(self) -> int:
        return len(self.probs)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.probs)


@dataclass(frozen=True)
class PatternDecomposition:
    bias_j: float
    var_y: float
    var_yhat: float
    se: float
    ve: float
    expected_loss: float
    sy: int | None = None
    syhat: int | None = None

    def to_dict(self) -> dict:
        return asdict(self)


SCALAR_FIELDS = ("bias_j", "var_y", "var_yhat", "se", "ve", "expected_loss")


def systematic_part(d: LabelDistribution) -> int:
    """Most probable class; ties go to the lowest index."""
    return int(np.argmax(d.as_array()))


def james_decompose(p: LabelDistribution, phat: LabelDistribution) -> PatternDecomposition:
    if p.k != phat.k:
        raise ValueError(f"class count mismatch: {p.k} vs {phat.k}")
    P, Q = p.as_array(), phat.as_array()
    sy, syhat = systematic_part(p), systematic_part(phat)
    match = math.fsum((P * Q).tolist())
    return PatternDecomposition(
        bias_j=float(sy != syhat),
        var_y=float(1.0 - P[sy]),
        var_yhat=float(1.0 - Q[syhat]),
        se=float(P[sy] - P[syhat]),
        ve=float(P[syhat] - match),
        expected_loss=1.0 - match,
        sy=sy,
        syhat=syhat,
    )


def decompose_arrays(P: np.ndarray, Q: np.ndarray) -> dict[str, np.ndarray]:
    """Row-wise decomposition of ``(n, k)`` arrays; same fields as :func:`james_decompose`."""
    P = np.asarray(P, dtype=float)
    Q = np.asarray(Q, dtype=float)
    if P.shape != Q.shape or P.ndim != 2:
        raise ValueError(f"shape mismatch: {P.shape} vs {Q.shape}")
    rows = np.arange(P.shape[0])
    sy = np.argmax(P, axis=1)
    syhat = np.argmax(Q, axis=1)
    match = np.einsum("ij,ij->i", P, Q)
    return {
        "bias_j": (sy != syhat).astype(float),
        "var_y": 1.0 - P[rows, sy],
        "var_yhat": 1.0 - Q[rows, syhat],
        "se": P[rows, sy] - P[rows, syhat],
        "ve": P[rows, syhat] - match,
        "expected_loss": 1.0 - match,
        "sy": sy,
        "syhat": syhat,
    }


def estimate_phat_from_votes(votes: Sequence[int], k: int) -> LabelDistribution:
    """Frequency of each predicted label across training runs."""
    if len(votes) == 0:
        raise ValueError("need at least one vote")
    v = np.asarray(votes, dtype=int)
    if v.min() < 0 or v.max() >= k:
        raise ValueError(f"vote outside 0..{k - 1}")
    counts = np.bincount(v, minlength=k)
    return LabelDistribution.of(counts / counts.sum())


def vote_frequencies(votes: np.ndarray, k: int) -> np.ndarray:
    """``(runs, patterns)`` hard predictions -> ``(patterns, k)`` frequencies."""
    votes = np.asarray(votes, dtype=int)
    out = np.zeros((votes.shape[1], k))
    for c in range(k):
        out[:, c] = (votes == c).mean(axis=0)
    return out


def response_distribution(observed_label: int, k: int, mode: str = "point-mass") -> LabelDistribution:
    """Noise-free response: all mass on the observed label."""
    if mode != "point-mass":
        raise ValueError(f"unsupported response mode {mode!r}")
    if not 0 <= observed_label < k:
        raise ValueError(f"label {observed_label} outside 0..{k - 1}")
    probs = [0.0] * k
    probs[observed_label] = 1.0
    return LabelDistribution(tuple(probs))


def aggregate(
    decomps: Sequence[PatternDecomposition], weights: Sequence[float] | None = None
) -> PatternDecomposition:
    """Weighted mean of every scalar field (uniform weights by default)."""
    n = len(decomps)
    if n == 0:
        raise ValueError("nothing to aggregate")
    w = np.full(n, 1.0 / n) if weights is None else np.asarray(weights, dtype=float)
    if w.shape != (n,):
        raise ValueError(f"{len(w)} weights for {n} decompositions")
    if np.any(w < 0) or abs(math.fsum(w.tolist()) - 1.0) > 1e-12:
        raise ValueError("weights must be nonnegative and sum to 1")
    totals = {
        f: math.fsum((w * np.array([getattr(d, f) for d in decomps])).tolist())
        for f in SCALAR_FIELDS
    }
    return PatternDecomposition(**totals)


def geman_decompose(
    estimates: Sequence[float], response_mean: float, response_var: float
) -> tuple[float, float, float]:
    """``(variance, bias_sq, noise)`` of squared error; they sum to the MSE."""
    x = np.asarray(estimates, dtype=float)
    if x.size < 2:
        raise ValueError("need at least 2 estimates")
    mean = math.fsum(x.tolist()) / x.size
    variance = math.fsum(((x - mean) ** 2).tolist()) / x.size
    return variance, (mean - response_mean) ** 2, float(response_var)


# ---------------------------------------------------------------------------
# Prediction logs
# ---------------------------------------------------------------------------

LOG_COLUMNS = ("run_id", "pattern_id", "predicted_class", "true_class")


class LogFormatError(ValueError):
    pass


@dataclass(frozen=True)
class PredictionLog:
    pattern_ids: list[str]
    true_class: np.ndarray
    votes: dict[str, list[int]]
    k: int


def read_prediction_log(path: str | Path, k: int | None = None) -> PredictionLog:
    """Parse a ``run_id,pattern_id,predicted_class,true_class`` CSV."""
    path = Path(path)
    votes: dict[str, list[int]] = {}
    truth: dict[str, int] = {}
    max_label = -1
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise LogFormatError(f"{path}: empty prediction log")
        header = [h.strip() for h in header]
        if tuple(header) != LOG_COLUMNS:
            raise LogFormatError(f"{path}:1: expected header {','.join(LOG_COLUMNS)}, got {','.join(header)}")
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 4:
                raise LogFormatError(f"{path}:{lineno}: expected 4 fields, got {len(row)}")
            _, pid, pred, true = (c.strip() for c in row)
            try:
                pred_i, true_i = int(pred), int(true)
            except ValueError:
                raise LogFormatError(f"{path}:{lineno}: class labels must be integers") from None
            if pred_i < 0 or true_i < 0:
                raise LogFormatError(f"{path}:{lineno}: negative class label")
            if pid in truth and truth[pid] != true_i:
                raise LogFormatError(f"{path}:{lineno}: pattern {pid} has conflicting true_class")
            truth[pid] = true_i
            votes.setdefault(pid, []).append(pred_i)
            max_label = max(max_label, pred_i, true_i)
    if not votes:
        raise LogFormatError(f"{path}: prediction log has no rows")
    k = max(max_label + 1, 2) if k is None else k
    if max_label >= k:
        raise LogFormatError(f"{path}: label {max_label} outside 0..{k - 1}")
    ids = list(votes)
    return PredictionLog(ids, np.array([truth[i] for i in ids]), votes, k)


def decompose_log(log: PredictionLog) -> tuple[list[dict], PatternDecomposition]:
    """Per-pattern rows and the uniform aggregate for a prediction log."""
    rows = []
    decomps = []
    for pid, true in zip(log.pattern_ids, log.true_class):
        d = james_decompose(
            response_distribution(int(true), log.k),
            estimate_phat_from_votes(log.votes[pid], log.k),
        )
        decomps.append(d)
        rows.append({"pattern_id": pid, "n_runs": len(log.votes[pid]), **d.to_dict()})
    return rows, aggregate(decomps)


def write_decomposition(rows: list[dict], total: PatternDecomposition, out_dir: Path, fmt: str) -> list[Path]:
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    if fmt in ("csv", "both"):
        per = out_dir / "decomposition_patterns.csv"
        cols = ["pattern_id", "n_runs", *SCALAR_FIELDS, "sy", "syhat"]
        with open(per, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=cols, lineterminator="\n")
            w.writeheader()
            for r in rows:
                w.writerow({c: _fmt(r[c]) for c in cols})
        agg = out_dir / "decomposition_aggregate.csv"
        with open(agg, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["n_patterns", *SCALAR_FIELDS])
            w.writerow([len(rows), *(_fmt(getattr(total, f)) for f in SCALAR_FIELDS)])
        written += [per, agg]
    if fmt in ("json", "both"):
        doc = {
            "response_model": "point-mass on observed label (noise-free; Var_Y = 0)",
            "n_patterns": len(rows),
            "aggregate": {f: getattr(total, f) for f in SCALAR_FIELDS},
            "patterns": rows,
        }
        path = out_dir / "decomposition.json"
        path.write_text(json.dumps(doc, indent=2, default=_json_default) + "\n")
        written.append(path)
    return written


def _fmt(x):
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return x


def _json_default(x):
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.floating):
        return float(x)
    raise TypeError(type(x))
