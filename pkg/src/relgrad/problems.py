"""Logistic classification objective, data ingestion and smoothness
estimation.

The objective is the plain (unregularized, unaveraged) logistic loss over
a binary dataset, optimized over a weight vector and a bias.  The
smoothness constant is estimated by tracking secant slopes of the gradient
along a probe run that needs no knowledge of L.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Dataset",
    "LogisticParams",
    "LogisticProblem",
    "QuadraticProblem",
    "SmoothnessEstimate",
    "DatasetFormatError",
    "logistic_loss",
    "logistic_gradient",
    "accuracy",
    "estimate_smoothness",
    "load_dataset",
    "synthetic_dataset",
    "train_test_split",
    "scale_features_unit",
    "params_to_vector",
    "vector_to_params",
]


class DatasetFormatError(ValueError):
    """Raised on malformed dataset files, pointing at the offending row."""


@dataclass(frozen=True)
class Dataset:
    """K examples with d features each and binary labels."""

    features: np.ndarray
    labels: np.ndarray
    split_tag: str = "train"

    def __post_init__(self):
        features = np.asarray(self.features, dtype=np.float64)
        labels = np.asarray(self.labels, dtype=np.int64)
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "labels", labels)
        if features.ndim != 2 or features.shape[0] < 1:
            raise ValueError("features must be a nonempty K x d matrix")
        if labels.shape != (features.shape[0],):
            raise ValueError("labels length must match the number of examples")
        if not np.all(np.isfinite(features)):
            raise ValueError("features must be finite")
        if not np.all((labels == 0) | (labels == 1)):
            raise ValueError("labels must be 0 or 1")

    @property
    def n_examples(self) -> int:
        return int(self.features.shape[0])

    @property
    def n_features(self) -> int:
        return int(self.features.shape[1])


@dataclass(frozen=True)
class LogisticParams:
    weights: np.ndarray
    bias: float

    def __post_init__(self):
        weights = np.asarray(self.weights, dtype=np.float64)
        object.__setattr__(self, "weights", weights)
        if not (np.all(np.isfinite(weights)) and np.isfinite(self.bias)):
            raise ValueError("parameters must be finite")


def params_to_vector(params: LogisticParams) -> np.ndarray:
    """Pack (w, b) as [w_0..w_{d-1}, b] for the vector-valued solvers."""
    return np.concatenate([params.weights, [params.bias]])


def vector_to_params(theta: np.ndarray) -> LogisticParams:
    theta = np.asarray(theta, dtype=np.float64)
    return LogisticParams(weights=theta[:-1], bias=float(theta[-1]))


def _margins(params: LogisticParams, data: Dataset) -> np.ndarray:
    return data.features @ params.weights + params.bias


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def logistic_loss(params: LogisticParams, data: Dataset) -> float:
    """Summed logistic loss.

    Uses the softplus identity loss_k = softplus(z_k) - y_k z_k with the
    overflow-safe form softplus(z) = max(z, 0) + log1p(exp(-|z|)), so the
    value stays finite for any finite margins.
    """
    z = _margins(params, data)
    softplus = np.maximum(z, 0.0) + np.log1p(np.exp(-np.abs(z)))
    return float(np.sum(softplus - data.labels * z))


def logistic_gradient(params: LogisticParams, data: Dataset) -> np.ndarray:
    """Gradient of :func:`logistic_loss` over (w, b), packed as one vector:
    residuals r_k = sigma(z_k) - y_k give d/dw = X^T r and d/db = sum r."""
    residuals = _sigmoid(_margins(params, data)) - data.labels
    return np.concatenate([data.features.T @ residuals, [np.sum(residuals)]])


def accuracy(params: LogisticParams, data: Dataset) -> float:
    """Fraction of correct predictions; a probability of exactly 1/2
    (zero margin) predicts label 1."""
    predictions = (_margins(params, data) >= 0.0).astype(np.int64)
    return float(np.mean(predictions == data.labels))


class LogisticProblem:
    """Smooth convex objective over packed parameters [w, b]."""

    def __init__(self, data: Dataset):
        self.data = data
        self.dimension = data.n_features + 1

    def value(self, theta: np.ndarray) -> float:
        return logistic_loss(vector_to_params(theta), self.data)

    def gradient(self, theta: np.ndarray) -> np.ndarray:
        return logistic_gradient(vector_to_params(theta), self.data)


class QuadraticProblem:
    """f(x) = (L/2) ||x||^2, the canonical curvature-L test objective."""

    def __init__(self, smoothness: float = 1.0):
        if smoothness <= 0:
            raise ValueError("smoothness must be positive")
        self.smoothness = smoothness

    def value(self, x: np.ndarray) -> float:
        x = np.asarray(x, dtype=np.float64)
        return 0.5 * self.smoothness * float(x @ x)

    def gradient(self, x: np.ndarray) -> np.ndarray:
        return self.smoothness * np.asarray(x, dtype=np.float64)


@dataclass(frozen=True)
class SmoothnessEstimate:
    """Running maximum of secant slopes ||g_k - g_{k+1}|| / ||x_k - x_{k+1}||
    along a probe run; an upper bound on the curvature actually observed."""

    L_value: float
    iterate_count: int
    per_step_curvatures: np.ndarray


def estimate_smoothness(
    problem, x0: np.ndarray, n_steps: int, probe_length: float = 0.1
) -> SmoothnessEstimate:
    """Estimate the smoothness constant without knowing it in advance.

    Probe iterates follow normalized gradient descent with a fixed
    displacement, x_{k+1} = x_k - probe_length * g_k / ||g_k||, so every
    step has length probe_length regardless of scale.  Steps shorter than
    1e-12 are skipped; a zero starting gradient returns L = 0.
    """
    if n_steps < 1:
        raise ValueError("need at least one probe step")
    x = np.asarray(x0, dtype=np.float64).copy()
    g = np.asarray(problem.gradient(x), dtype=np.float64)
    curvatures: list[float] = []
    count = 0
    for _ in range(n_steps):
        norm_g = float(np.linalg.norm(g))
        if norm_g == 0.0:
            break
        x_next = x - probe_length * g / norm_g
        g_next = np.asarray(problem.gradient(x_next), dtype=np.float64)
        displacement = float(np.linalg.norm(x_next - x))
        if displacement >= 1e-12:
            curvatures.append(float(np.linalg.norm(g_next - g)) / displacement)
        x, g = x_next, g_next
        count += 1
    return SmoothnessEstimate(
        L_value=max(curvatures) if curvatures else 0.0,
        iterate_count=count,
        per_step_curvatures=np.array(curvatures),
    )


def load_dataset(path, split_tag: str = "train") -> Dataset:
    """Read a CSV of rows ``label,feature_1,...,feature_d``."""
    rows: list[list[float]] = []
    labels: list[int] = []
    width: int | None = None
    with open(path, newline="") as handle:
        for number, row in enumerate(csv.reader(handle), start=1):
            if not row or all(not cell.strip() for cell in row):
                continue
            try:
                values = [float(cell) for cell in row]
            except ValueError as exc:
                raise DatasetFormatError(f"row {number}: non-numeric value ({exc})") from exc
            label = values[0]
            if label not in (0.0, 1.0):
                raise DatasetFormatError(f"row {number}: label must be 0 or 1, got {label}")
            if width is None:
                width = len(values) - 1
                if width < 1:
                    raise DatasetFormatError(f"row {number}: no feature columns")
            elif len(values) - 1 != width:
                raise DatasetFormatError(
                    f"row {number}: expected {width} features, got {len(values) - 1}"
                )
            labels.append(int(label))
            rows.append(values[1:])
    if not rows:
        raise DatasetFormatError("dataset file contains no data rows")
    return Dataset(features=np.array(rows), labels=np.array(labels), split_tag=split_tag)


def synthetic_dataset(
    seed: int,
    n_samples: int,
    n_features: int,
    separation: float,
    condition: float = 1e3,
    split_tag: str = "train",
) -> Dataset:
    """Two Gaussian clusters with anisotropic feature scales.

    Feature j is scaled by condition^(-j/(d-1)), a geometric spectrum from
    1 down to 1/condition, so the logistic objective is ill-conditioned the
    way pixel-style data is; ``separation`` controls the distance between
    the cluster centers in units of the (scaled) noise.  Deterministic per
    seed.
    """
    if n_samples < 1 or n_features < 1:
        raise ValueError("need at least one sample and one feature")
    rng = np.random.default_rng(seed)
    half = n_samples // 2
    labels = np.concatenate([np.zeros(half, dtype=np.int64), np.ones(n_samples - half, dtype=np.int64)])
    scales = condition ** (-np.arange(n_features) / max(n_features - 1, 1))
    direction = np.ones(n_features) / np.sqrt(n_features)
    signs = np.where(labels[:, None] == 1, separation / 2.0, -separation / 2.0)
    features = (rng.standard_normal((n_samples, n_features)) + signs * direction) * scales
    return Dataset(features=features, labels=labels, split_tag=split_tag)


def train_test_split(data: Dataset, ratio: float, seed: int) -> tuple[Dataset, Dataset]:
    """Deterministic shuffle-and-cut: the first floor(ratio * K) examples
    of the permuted dataset form the training split."""
    if not 0.0 < ratio < 1.0:
        raise ValueError("split ratio must lie strictly between 0 and 1")
    order = np.random.default_rng(seed).permutation(data.n_examples)
    cut = int(data.n_examples * ratio)
    train_idx, test_idx = order[:cut], order[cut:]
    return (
        Dataset(data.features[train_idx], data.labels[train_idx], split_tag="train"),
        Dataset(data.features[test_idx], data.labels[test_idx], split_tag="test"),
    )


def scale_features_unit(data: Dataset) -> Dataset:
    """Affinely map each feature column onto [0, 1] (constant columns go
    to 0)."""
    lo = data.features.min(axis=0)
    hi = data.features.max(axis=0)
    span = np.where(hi > lo, hi - lo, 1.0)
    return Dataset((data.features - lo) / span, data.labels, split_tag=data.split_tag)
