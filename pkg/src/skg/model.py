"""The trainable predictor: a linear head over random Fourier features.

Training is sequential least-squares gradient descent. Starting from an
all-zero coefficient vector, each step computes the residual with the
current coefficients and moves them by twice the learning rate times the
residual along the feature vector. Within each epoch the training set is
visited in a fresh seeded shuffle.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import streams
from .errors import ArgumentError, DataError, NumericError
from .graph_data import TrainingSet
from .rff import RandomFeatureBank, feature_map, feature_matrix, sample_bank


@dataclass(frozen=True)
class TrainingTrace:
    """Per-step record of one training run.

    ``order[t]`` is the training-set index processed at step t (0-based
    storage; step times are 1-based in exports), ``predictions[t]`` the
    pre-update prediction and ``errors[t]`` the pre-update residual.
    """

    order: np.ndarray
    predictions: np.ndarray
    errors: np.ndarray

    def __post_init__(self):
        order = np.asarray(self.order, dtype=np.int64)
        predictions = np.asarray(self.predictions, dtype=np.float64)
        errors = np.asarray(self.errors, dtype=np.float64)
        if not (order.shape == predictions.shape == errors.shape) or order.ndim != 1:
            raise ArgumentError("order, predictions and errors must be 1-d and equally long")
        object.__setattr__(self, "order", order)
        object.__setattr__(self, "predictions", predictions)
        object.__setattr__(self, "errors", errors)

    @property
    def duration(self) -> int:
        return self.order.size


@dataclass
class SkgModel:
    """Linear coefficients over a frozen feature bank.

    ``theta`` starts at zero and has length 2*n_features. ``train_step``
    mutates the model in place and returns the pre-update residual;
    training is strictly sequential, but a trained model may be shared
    read-only for batch prediction.
    """

    bank: RandomFeatureBank
    eta: float
    theta: np.ndarray = field(default=None)

    def __post_init__(self):
        if not self.eta > 0:
            raise ArgumentError(f"learning rate must be positive, got {self.eta}")
        if self.theta is None:
            self.theta = np.zeros(2 * self.bank.n_features, dtype=np.float64)
        else:
            self.theta = np.asarray(self.theta, dtype=np.float64)
        if self.theta.shape != (2 * self.bank.n_features,):
            raise ArgumentError(
                f"theta must have length {2 * self.bank.n_features}, got {self.theta.shape}"
            )

    def predict(self, vector) -> float:
        """Predicted nodal value for one adjacency vector."""
        return float(self.theta @ feature_map(self.bank, vector))

    def predict_batch(self, vectors) -> np.ndarray:
        """Predicted nodal values for the rows of ``vectors``."""
        return feature_matrix(self.bank, vectors) @ self.theta

    def train_step(self, vector, value: float) -> float:
        """One gradient step on a single (vector, value) pair.

        Returns the residual computed with the coefficients *before* the
        update.
        """
        z = feature_map(self.bank, vector)
        return self._step_on_features(z, value)

    def _step_on_features(self, z: np.ndarray, value: float) -> float:
        if not np.isfinite(value) or not np.all(np.isfinite(z)):
            raise NumericError("non-finite value or features in training step")
        error = float(value) - float(self.theta @ z)
        self.theta += (2.0 * self.eta * error) * z
        return error

    def train(self, training_set: TrainingSet, epochs: int, seed: int) -> TrainingTrace:
        """Run ``epochs`` passes over the set, reshuffling each epoch.

        Node order is drawn from the ORDER stream of ``seed``, so it is
        unaffected by bank size or the split. Returns the full trace
        (duration = epochs * n).
        """
        if training_set.n < 1:
            raise ArgumentError("training set is empty")
        if epochs < 1:
            raise ArgumentError(f"epochs must be at least 1, got {epochs}")
        if training_set.m != self.bank.input_dim:
            raise ArgumentError(
                f"training vectors have length {training_set.m}, bank expects {self.bank.input_dim}"
            )
        rng = streams.stream(seed, streams.ORDER)
        features = feature_matrix(self.bank, training_set.vectors)
        if not np.all(np.isfinite(features)) or not np.all(np.isfinite(training_set.values)):
            raise NumericError("non-finite features or values in training set")
        order = np.concatenate([rng.permutation(training_set.n) for _ in range(epochs)])
        predictions = np.empty(order.size, dtype=np.float64)
        errors = np.empty(order.size, dtype=np.float64)
        for t, idx in enumerate(order):
            z = features[idx]
            pred = float(self.theta @ z)
            err = training_set.values[idx] - pred
            self.theta += (2.0 * self.eta * err) * z
            predictions[t] = pred
            errors[t] = err
        return TrainingTrace(order=order, predictions=predictions, errors=errors)


def save_model(path, model: SkgModel, referencing=None, value_scale=None) -> None:
    """Serialize a model as JSON (theta in hex floats for exact round trips).

    The bank is stored as (sigma_sq, seed, dims) and regenerated on load,
    which reproduces the frequencies bit-for-bit. ``referencing`` node ids
    and the training ``value_scale`` make a predict-only deployment
    self-contained.
    """
    payload = {
        "format": "skg-model-v1",
        "input_dim": model.bank.input_dim,
        "n_features": model.bank.n_features,
        "sigma_sq": model.bank.sigma_sq.hex(),
        "eta": float(model.eta).hex(),
        "bank_seed": model.bank.seed,
        "theta": [x.hex() for x in model.theta.tolist()],
    }
    if referencing is not None:
        payload["referencing"] = list(referencing)
    if value_scale is not None:
        payload["value_scale"] = float(value_scale).hex()
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(payload, handle)
        handle.write("\n")


def load_model(path):
    """Load a model written by :func:`save_model`.

    Returns ``(model, metadata)`` where metadata carries the optional
    ``referencing`` list and ``value_scale`` (None when absent).
    """
    with open(path, "r", encoding="utf-8") as handle:
        payload = json.load(handle)
    if payload.get("format") != "skg-model-v1":
        raise DataError(f"{path}: not a model file")
    bank = sample_bank(
        sigma_sq=float.fromhex(payload["sigma_sq"]),
        n_features=int(payload["n_features"]),
        input_dim=int(payload["input_dim"]),
        seed=int(payload["bank_seed"]),
    )
    theta = np.array([float.fromhex(x) for x in payload["theta"]], dtype=np.float64)
    model = SkgModel(bank=bank, eta=float.fromhex(payload["eta"]), theta=theta)
    scale = payload.get("value_scale")
    metadata = {
        "referencing": payload.get("referencing"),
        "value_scale": float.fromhex(scale) if scale is not None else None,
    }
    return model, metadata


def write_training_trace_csv(path, trace: TrainingTrace) -> None:
    """Write a trace as ``t,node_index,prediction,error`` rows (t from 1)."""
    with open(path, "w", encoding="utf-8") as handle:
        handle.write("t,node_index,prediction,error\n")
        for t in range(trace.duration):
            handle.write(
                f"{t + 1},{int(trace.order[t])},"
                f"{float(trace.predictions[t])!r},{float(trace.errors[t])!r}\n"
            )
