"""Small seeded learners and the statistics that turn their outputs into B&V inputs."""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

MODEL_FORMAT_VERSION = 1


class TrainingError(RuntimeError):
    pass


class UndefinedCorrelationError(ValueError):
    pass


class DatasetFormatError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Data
# ---------------------------------------------------------------------------


@dataclass
class Dataset:
    """Standardized features with train/test split tags.

    Standardization statistics come from the train split only.
    """

    features: np.ndarray
    labels: np.ndarray
    split: np.ndarray
    class_names: list[str]
    feature_names: list[str] = field(default_factory=list)
    mean: np.ndarray | None = None
    scale: np.ndarray | None = None

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=float)
        self.labels = np.asarray(self.labels, dtype=int)
        self.split = np.asarray(self.split)
        if self.features.ndim != 2 or self.features.shape[0] != self.labels.shape[0]:
            raise ValueError("features/labels shape mismatch")
        if self.split.shape != self.labels.shape:
            raise ValueError("split tags must match labels")
        if not np.all(np.isfinite(self.features)):
            raise ValueError("features contain missing or non-finite values")
        if self.labels.size and (self.labels.min() < 0 or self.labels.max() >= self.k):
            raise ValueError("labels outside class range")
        if not set(np.unique(self.split)) <= {"train", "test"}:
            raise ValueError("split tags must be 'train' or 'test'")

    @property
    def k(self) -> int:
        return len(self.class_names)

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    def _part(self, tag):
        mask = self.split == tag
        return self.features[mask], self.labels[mask]

    @property
    def train(self) -> tuple[np.ndarray, np.ndarray]:
        return self._part("train")

    @property
    def test(self) -> tuple[np.ndarray, np.ndarray]:
        return self._part("test")

    def standardized(self) -> "Dataset":
        X_tr, _ = self.train
        if X_tr.shape[0] == 0:
            raise ValueError("cannot standardize without training rows")
        mean = X_tr.mean(axis=0)
        scale = X_tr.std(axis=0)
        scale[scale < 1e-12] = 1.0
        return Dataset(
            (self.features - mean) / scale, self.labels, self.split,
            self.class_names, self.feature_names, mean, scale,
        )


@dataclass(frozen=True)
class CSVSchema:
    """How to read a dataset CSV.

    ``features=None`` takes every column except the label and split columns.
    Without a split column, rows are split at random with ``test_fraction``.
    """

    label: str = "label"
    features: tuple[str, ...] | None = None
    split_column: str | None = "split"
    test_fraction: float = 0.25
    seed: int = 0
    skip_rows: int = 0


def load_csv(path: str | Path, schema: CSVSchema = CSVSchema()) -> Dataset:
    path = Path(path)
    with open(path, newline="") as fh:
        lines = fh.read().splitlines()
    lines = lines[schema.skip_rows:]
    if not lines or not lines[0].strip():
        raise DatasetFormatError(f"{path}: empty file")
    reader = csv.reader(lines)
    header = [h.strip() for h in next(reader)]
    first_line = schema.skip_rows + 1
    if schema.label not in header:
        raise DatasetFormatError(f"{path}:{first_line}: label column {schema.label!r} not in header")
    split_col = schema.split_column if schema.split_column in header else None
    if schema.features is None:
        feat_cols = [h for h in header if h not in (schema.label, split_col)]
    else:
        missing = [c for c in schema.features if c not in header]
        if missing:
            raise DatasetFormatError(f"{path}:{first_line}: missing feature columns {missing}")
        feat_cols = list(schema.features)
    if not feat_cols:
        raise DatasetFormatError(f"{path}: no feature columns")
    idx = {h: i for i, h in enumerate(header)}
    X, raw_labels, tags = [], [], []
    for lineno, row in enumerate(reader, start=first_line + 1):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise DatasetFormatError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
        try:
            vals = [float(row[idx[c]]) for c in feat_cols]
        except ValueError:
            raise DatasetFormatError(f"{path}:{lineno}: non-numeric feature value") from None
        if not all(math.isfinite(v) for v in vals):
            raise DatasetFormatError(f"{path}:{lineno}: missing or non-finite feature value")
        label = row[idx[schema.label]].strip()
        if not label:
            raise DatasetFormatError(f"{path}:{lineno}: empty label")
        X.append(vals)
        raw_labels.append(label)
        if split_col:
            tag = row[idx[split_col]].strip().lower()
            if tag not in ("train", "test"):
                raise DatasetFormatError(f"{path}:{lineno}: split must be train/test, got {tag!r}")
            tags.append(tag)
    if not X:
        raise DatasetFormatError(f"{path}: header only, no data rows")
    names = _sorted_labels(set(raw_labels))
    code = {n: i for i, n in enumerate(names)}
    labels = np.array([code[r] for r in raw_labels])
    if split_col:
        split = np.array(tags)
    else:
        rng = np.random.default_rng(schema.seed)
        n_test = int(round(schema.test_fraction * len(X)))
        split = np.full(len(X), "train", dtype=object)
        split[rng.permutation(len(X))[:n_test]] = "test"
        split = split.astype(str)
    return Dataset(np.array(X), labels, split, names, feat_cols).standardized()


def _sorted_labels(labels: set[str]) -> list[str]:
    try:
        return [str(x) for x in sorted(labels, key=lambda s: float(s))]
    except ValueError:
        return sorted(labels)


SEGMENT_CLASSES = ["brickface", "sky", "foliage", "cement", "window", "path", "grass"]
SEGMENT_FEATURES = [
    "region_centroid_col", "region_centroid_row", "region_pixel_count",
    "short_line_density_5", "short_line_density_2", "vedge_mean", "vedge_sd",
    "hedge_mean", "hedge_sd", "intensity_mean", "rawred_mean", "rawblue_mean",
    "rawgreen_mean", "exred_mean", "exblue_mean", "exgreen_mean", "value_mean",
    "saturation_mean", "hue_mean",
]


def synthetic_segmentation(
    seed: int = 0,
    n_train_per_class: int = 30,
    n_test_per_class: int = 300,
    spacing: float = 1.3,
    grass_offset: float = 4.0,
    spread: float = 0.45,
):
    """Seeded 7-class, 19-feature surrogate shaped like the Image Segmentation data.

    Five latent traits per region (brightness, redness, greenness, texture,
    row position) drive the 19 channels the way pixel statistics would: a
    block of nearly collinear colour means, opponent-colour and hue channels,
    edge statistics from texture, a noise column and a constant pixel count.
    Six classes sit on the axes of the brightness/redness/texture space at
    distance ``spacing``; grass sits far out on the greenness axis.

    Training rows come grouped by class, in ``SEGMENT_CLASSES`` order.
    Returns ``(X, y, split, class_names)``.
    """
    rng = np.random.default_rng(seed)
    a, k = spacing, len(SEGMENT_CLASSES)
    #                 B    R    G             T    row
    means = np.array([
        [0.0, a, 0.0, 0.0, 0.0],               # brickface
        [a, 0.0, 0.0, 0.0, -0.5],              # sky
        [0.0, 0.0, 0.0, a, 0.0],               # foliage
        [0.0, -a, 0.0, 0.0, 0.0],              # cement
        [-a, 0.0, 0.0, 0.0, 0.0],              # window
        [0.0, 0.0, 0.0, -a, 0.5],              # path
        [0.0, 0.0, grass_offset, 0.0, 0.0],    # grass
    ])
    sds = np.array([spread] * 4 + [1.0])

    def draw(per_class):
        y = np.repeat(np.arange(k), per_class)
        n = y.size
        B, R, G, T, row = (means[y] + rng.normal(size=(n, 5)) * sds).T

        def noise(s):
            return rng.normal(0.0, s, n)

        red = B + 0.5 * R - 0.2 * G + noise(0.05)
        green = B - 0.2 * R + 0.5 * G + noise(0.05)
        blue = B - 0.3 * R - 0.3 * G + noise(0.05)
        value = np.maximum(np.maximum(red, green), blue)
        low = np.minimum(np.minimum(red, green), blue)
        X = np.column_stack([
            rng.uniform(-1.7, 1.7, n),
            row,
            np.full(n, 9.0),
            np.clip(0.1 * T + noise(0.1), 0.0, None),
            np.clip(0.05 * T + noise(0.05), 0.0, None),
            np.exp(0.5 * T) + noise(0.1),
            np.exp(0.7 * T) * np.abs(1.0 + noise(0.3)),
            np.exp(0.5 * T) + noise(0.1),
            np.exp(0.7 * T) * np.abs(1.0 + noise(0.3)),
            (red + green + blue) / 3.0,
            red,
            blue,
            green,
            2 * red - green - blue,
            2 * blue - red - green,
            2 * green - red - blue,
            value,
            (value - low) / (np.abs(value) + 1.0),
            np.arctan2(np.sqrt(3.0) * (green - blue), 2 * red - green - blue),
        ])
        return X, y

    X_tr, y_tr = draw(n_train_per_class)
    X_te, y_te = draw(n_test_per_class)
    X = np.vstack([X_tr, X_te])
    y = np.concatenate([y_tr, y_te])
    split = np.array(["train"] * len(y_tr) + ["test"] * len(y_te))
    return X, y, split, list(SEGMENT_CLASSES)


def write_dataset_csv(path: str | Path, X, y, split, class_names, feature_names=None) -> None:
    X = np.asarray(X)
    names = feature_names or [f"f{i + 1}" for i in range(X.shape[1])]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(list(names) + ["label", "split"])
        for row, lab, tag in zip(X, y, split):
            w.writerow([f"{v:.6f}" for v in row] + [class_names[lab], tag])


# ---------------------------------------------------------------------------
# Single-hidden-layer network
# ---------------------------------------------------------------------------


PRESENTATION_ORDERS = ("file", "fixed", "per-seed")


@dataclass(frozen=True)
class MLPConfig:
    hidden_nodes: int = 16
    epochs: int = 8
    learning_rate: float = 0.1
    seed: int = 0
    batch_size: int = 1
    init_range: float = 0.5
    # "file": rows in dataset order every epoch; "fixed": one shuffle from
    # order_seed shared by all networks; "per-seed": reshuffled from the init seed
    order: str = "file"
    order_seed: int = 0

    def __post_init__(self):
        if self.hidden_nodes < 1 or self.epochs < 1:
            raise ValueError("hidden_nodes and epochs must be >= 1")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be > 0")
        if self.order not in PRESENTATION_ORDERS:
            raise ValueError(f"order must be one of {PRESENTATION_ORDERS}, got {self.order!r}")


def _sigmoid(x):
    return 0.5 * (1.0 + np.tanh(0.5 * x))


def _softmax(z):
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


@dataclass
class MLP:
    """Sigmoid hidden layer, softmax output."""

    W1: np.ndarray
    b1: np.ndarray
    W2: np.ndarray
    b2: np.ndarray

    @property
    def n_features(self) -> int:
        return self.W1.shape[0]

    @property
    def k(self) -> int:
        return self.W2.shape[1]

    def forward(self, X):
        h = _sigmoid(X @ self.W1 + self.b1)
        return h, _softmax(h @ self.W2 + self.b2)

    def predict_proba(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise ValueError(f"expected (n, {self.n_features}) features, got {X.shape}")
        return self.forward(X)[1]

    def predict(self, X) -> np.ndarray:
        return np.argmax(self.predict_proba(X), axis=1)

    def to_json(self) -> str:
        doc = {
            "format": "bvlab-mlp",
            "version": MODEL_FORMAT_VERSION,
            "W1": self.W1.tolist(), "b1": self.b1.tolist(),
            "W2": self.W2.tolist(), "b2": self.b2.tolist(),
        }
        return json.dumps(doc)

    @classmethod
    def from_json(cls, text: str) -> "MLP":
        doc = json.loads(text)
        if doc.get("format") != "bvlab-mlp" or doc.get("version") != MODEL_FORMAT_VERSION:
            raise ValueError("not a version-1 bvlab-mlp weight document")
        return cls(*(np.asarray(doc[k], dtype=float) for k in ("W1", "b1", "W2", "b2")))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json() + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "MLP":
        return cls.from_json(Path(path).read_text())


def train_mlp(X: np.ndarray, y: np.ndarray, k: int, cfg: MLPConfig) -> MLP:
    """Seeded mini-batch gradient descent on cross-entropy for exactly ``cfg.epochs`` passes."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=int)
    n, d = X.shape
    rng = np.random.default_rng(cfg.seed)
    r = cfg.init_range
    model = MLP(
        rng.uniform(-r, r, (d, cfg.hidden_nodes)),
        rng.uniform(-r, r, cfg.hidden_nodes),
        rng.uniform(-r, r, (cfg.hidden_nodes, k)),
        rng.uniform(-r, r, k),
    )
    onehot = np.eye(k)[y]
    lr, bs = cfg.learning_rate, cfg.batch_size
    order_rng = rng if cfg.order == "per-seed" else np.random.default_rng(cfg.order_seed)
    for epoch in range(cfg.epochs):
        order = np.arange(n) if cfg.order == "file" else order_rng.permutation(n)
        for start in range(0, n, bs):
            idx = order[start:start + bs]
            xb, tb = X[idx], onehot[idx]
            h, p = model.forward(xb)
            g_out = (p - tb) / len(idx)
            g_h = (g_out @ model.W2.T) * h * (1.0 - h)
            model.W2 -= lr * (h.T @ g_out)
            model.b2 -= lr * g_out.sum(axis=0)
            model.W1 -= lr * (xb.T @ g_h)
            model.b1 -= lr * g_h.sum(axis=0)
        _, p = model.forward(X)
        loss = -np.mean(np.log(np.clip(p[np.arange(n), y], 1e-300, None)))
        if not math.isfinite(loss) or not all(np.all(np.isfinite(w)) for w in (model.W1, model.b1, model.W2, model.b2)):
            raise TrainingError(
                f"non-finite training loss at epoch {epoch + 1}/{cfg.epochs} "
                f"(lr={lr}, batch={bs}, hidden={cfg.hidden_nodes}, seed={cfg.seed})"
            )
    return model


def train_on(data: Dataset, cfg: MLPConfig) -> MLP:
    X, y = data.train
    return train_mlp(X, y, data.k, cfg)


def predict_posteriors(model: MLP, X: np.ndarray) -> np.ndarray:
    """``(patterns, k)`` output activations; each row is a simplex."""
    return model.predict_proba(X)


# ---------------------------------------------------------------------------
# Statistics over a population of classifiers
# ---------------------------------------------------------------------------


def _check_tensor(t) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    if t.ndim != 3:
        raise ValueError(f"expected (classifiers, patterns, k) tensor, got shape {t.shape}")
    return t


def _spread(t: np.ndarray) -> np.ndarray:
    """Population variance over axis 0, shifted by the first classifier.

    The shift makes identical classifiers give exactly 0.
    """
    d = t - t[0]
    return np.maximum((d * d).mean(axis=0) - d.mean(axis=0) ** 2, 0.0)


def class_bias(tensor, reference, i: int) -> float:
    """Signed mean over patterns of (mean estimate - reference posterior) for class ``i``."""
    t = _check_tensor(tensor)
    ref = np.asarray(
        [r.probs if hasattr(r, "probs") else r for r in reference], dtype=float
    )
    if ref.shape != t.shape[1:]:
        raise ValueError(f"reference shape {ref.shape} does not match tensor {t.shape[1:]}")
    return float(np.mean(t[:, :, i].mean(axis=0) - ref[:, i]))


def class_variance(tensor, i: int) -> float:
    """Across-classifier population variance of class-``i`` estimates, averaged over patterns."""
    t = _check_tensor(tensor)
    if t.shape[0] < 2:
        raise ValueError("class variance needs at least 2 classifiers")
    return float(_spread(t[:, :, i]).mean())


def tg_variance_scalar(tensor) -> float:
    """Class variance averaged over all classes."""
    t = _check_tensor(tensor)
    if t.shape[0] < 2:
        raise ValueError("class variance needs at least 2 classifiers")
    return float(_spread(t).mean())


def pearson(x: Sequence[float], y: Sequence[float]) -> float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1 or x.size < 2:
        raise ValueError("pearson needs two equal-length vectors of length >= 2")
    dx, dy = x - x.mean(), y - y.mean()
    sx, sy = math.sqrt(float(dx @ dx)), math.sqrt(float(dy @ dy))
    if sx == 0 or sy == 0:
        raise UndefinedCorrelationError("correlation undefined for a zero-variance vector")
    return max(-1.0, min(1.0, float(dx @ dy) / (sx * sy)))
