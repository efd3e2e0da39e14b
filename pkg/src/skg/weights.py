"""Similarity measures and contribution weights of a training run.

The similarity of the nodes seen at times i < j is twice the learning
rate times the inner product of their feature vectors. Contribution
weights express any in-run prediction as a weighted sum of previously
seen nodal values; they follow from the similarities by a backward
recursion:

    F[j-1, j] = B[j-1, j]
    F[i, j]   = B[i, j] - sum_{k=i+1}^{j-1} B[i, k] * F[k, j]

Conformity factors relate the two via F = B * (1 - alpha)^(gap - 1) and
the noise-range estimates bound which weights count as insignificant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError, NumericError, StateError
from .rff import RandomFeatureBank, feature_map

DEFAULT_MAX_STEPS = 5000


@dataclass(frozen=True)
class SimilarityMatrix:
    """Dense pairwise similarities for one processing sequence.

    ``values[p, q]`` is defined for 0 <= p < q < n (0-based step times;
    the diagonal and lower triangle are not part of the contract).
    Memory is O(n^2) by design; construction is capped to keep that
    honest.
    """

    values: np.ndarray
    eta: float

    @property
    def n_steps(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class WeightTrace:
    """Contribution weights toward one target time.

    ``target`` is the 1-based time j; for 1 <= i < j, entry i-1 of
    ``weights`` holds F[i, j] and entry i-1 of ``similarities`` holds
    B[i, j]. ``alpha`` carries the conformity factors (NaN where
    undefined; ``alpha_valid`` flags the usable entries) and ``noise_up``
    is the run's own noise-range estimate, the absolute minimum weight.
    """

    target: int
    weights: np.ndarray
    similarities: np.ndarray
    alpha: np.ndarray
    alpha_valid: np.ndarray
    noise_up: float


def similarity(bank: RandomFeatureBank, a_i, a_j, eta: float) -> float:
    """Similarity of two adjacency vectors under one feature bank."""
    if not eta > 0:
        raise ArgumentError(f"eta must be positive, got {eta}")
    z_i = feature_map(bank, a_i)
    z_j = feature_map(bank, a_j)
    return float(2.0 * eta * (z_i @ z_j))


def similarity_approx(d_sq: float, sigma_sq: float, eta: float) -> float:
    """Large-bank limit of the similarity: 2*eta*exp(-d_sq / (2*sigma_sq))."""
    if d_sq < 0:
        raise ArgumentError(f"d_sq must be nonnegative, got {d_sq}")
    if not sigma_sq > 0:
        raise ArgumentError(f"sigma_sq must be positive, got {sigma_sq}")
    return 2.0 * eta * math.exp(-d_sq / (2.0 * sigma_sq))


def similarity_conditional_variance(d_sq: float, sigma_sq: float, eta: float,
                                    n_features: int) -> float:
    """Variance of the similarity around its large-bank limit at fixed distance.

    Decreasing in d_sq toward (2*eta)^2 / (2*n_features); exactly zero for
    coincident vectors.
    """
    if n_features < 1:
        raise ArgumentError(f"n_features must be at least 1, got {n_features}")
    if d_sq < 0:
        raise ArgumentError(f"d_sq must be nonnegative, got {d_sq}")
    if not sigma_sq > 0:
        raise ArgumentError(f"sigma_sq must be positive, got {sigma_sq}")
    return (2.0 * eta) ** 2 / (2.0 * n_features) * (math.expm1(-d_sq / sigma_sq)) ** 2


def similarity_matrix(features: np.ndarray, eta: float,
                      max_steps: int = DEFAULT_MAX_STEPS) -> SimilarityMatrix:
    """Similarities for a full processing sequence of feature vectors.

    ``features`` holds one row per step, in processing order. Sequences
    longer than ``max_steps`` are refused: the dense matrix is the honest
    O(n^2) cost of the exact recursion.
    """
    z = np.asarray(features, dtype=np.float64)
    if z.ndim != 2:
        raise ArgumentError(f"features must be 2-d, got shape {z.shape}")
    if not eta > 0:
        raise ArgumentError(f"eta must be positive, got {eta}")
    if z.shape[0] > max_steps:
        raise ArgumentError(
            f"sequence of {z.shape[0]} steps exceeds the cap of {max_steps}; "
            "raise max_steps explicitly to accept the O(n^2) memory"
        )
    return SimilarityMatrix(values=2.0 * eta * (z @ z.T), eta=float(eta))


def _backward_recursion(block: np.ndarray, target_column: np.ndarray) -> np.ndarray:
    """Weights toward a target from its similarity column and the earlier block.

    ``block[p, q]`` must hold similarities for 0 <= p < q < t and
    ``target_column[i]`` the similarity of step i to the target; returns
    F over i = 0..t-1.
    """
    t = target_column.size
    weights = np.zeros(t, dtype=np.float64)
    for i in range(t - 1, -1, -1):
        weights[i] = target_column[i] - block[i, i + 1:t] @ weights[i + 1:t]
    return weights


def _alphas(weights: np.ndarray, similarities: np.ndarray):
    """Conformity factors for a weight trace; invalid entries become NaN."""
    t = weights.size
    alpha = np.full(t, np.nan)
    valid = np.zeros(t, dtype=bool)
    for i in range(t):
        gap = t + 1 - (i + 1)  # target j = t+1 (1-based), row i+1
        if gap < 2 or similarities[i] == 0.0:
            continue
        ratio = weights[i] / similarities[i]
        if ratio <= 0.0:
            continue
        alpha[i] = 1.0 - ratio ** (1.0 / (gap - 1))
        valid[i] = True
    return alpha, valid


def contribution_weights(matrix: SimilarityMatrix, target: int) -> WeightTrace:
    """Exact contribution weights toward 1-based time ``target``."""
    n = matrix.n_steps
    if not 2 <= target <= n:
        raise ArgumentError(f"target must lie in [2, {n}], got {target}")
    needed = matrix.values[:target, :target]
    if not np.all(np.isfinite(needed[np.triu_indices(target, k=1)])):
        raise StateError("similarity matrix has missing entries below the target")
    column = matrix.values[: target - 1, target - 1]
    block = matrix.values[: target - 1, : target - 1]
    weights = _backward_recursion(block, column)
    alpha, valid = _alphas(weights, column)
    return WeightTrace(
        target=int(target),
        weights=weights,
        similarities=column.copy(),
        alpha=alpha,
        alpha_valid=valid,
        noise_up=float(abs(weights.min())),
    )


def probe_weight_traces(train_features: np.ndarray, probe_features: np.ndarray,
                        eta: float, max_steps: int = DEFAULT_MAX_STEPS) -> list[WeightTrace]:
    """Weight traces for held-out probes appended after a training sequence.

    ``train_features`` holds the T training steps in processing order;
    each probe row is treated as the node at time T+1. The training block
    is computed once and shared across probes.
    """
    z = np.asarray(train_features, dtype=np.float64)
    p = np.asarray(probe_features, dtype=np.float64)
    if z.ndim != 2 or p.ndim != 2 or z.shape[1] != p.shape[1]:
        raise ArgumentError("train and probe features must be 2-d with equal width")
    if not eta > 0:
        raise ArgumentError(f"eta must be positive, got {eta}")
    if z.shape[0] + 1 > max_steps:
        raise ArgumentError(
            f"sequence of {z.shape[0] + 1} steps exceeds the cap of {max_steps}"
        )
    block = 2.0 * eta * (z @ z.T)
    columns = 2.0 * eta * (z @ p.T)
    traces = []
    for k in range(p.shape[0]):
        column = columns[:, k]
        weights = _backward_recursion(block, column)
        alpha, valid = _alphas(weights, column)
        traces.append(
            WeightTrace(
                target=z.shape[0] + 1,
                weights=weights,
                similarities=column.copy(),
                alpha=alpha,
                alpha_valid=valid,
                noise_up=float(abs(weights.min())),
            )
        )
    return traces


def weighted_prediction_oracle(values, trace: WeightTrace) -> float:
    """Weighted sum of previously seen values under a trace's weights."""
    y = np.asarray(values, dtype=np.float64)
    if y.shape != trace.weights.shape:
        raise ArgumentError(
            f"need {trace.weights.size} values for target {trace.target}, got {y.size}"
        )
    return float(y @ trace.weights)


def expected_weight_sum(b: float, duration: int) -> float:
    """Expected total weight toward the post-training target: 1 - (1-b)^T."""
    if not 0.0 < b < 1.0:
        raise ArgumentError(f"average similarity must lie in (0, 1), got {b}")
    if duration < 1:
        raise ArgumentError(f"duration must be at least 1, got {duration}")
    return 1.0 - (1.0 - b) ** duration


def conformity_alpha(similarity_value: float, weight_value: float, gap: int) -> float:
    """Invert the conformity relation F = B*(1-alpha)^(gap-1) for alpha.

    Raises :class:`NumericError` when the weight/similarity ratio is not
    positive (reported, never silently clamped).
    """
    if gap < 2:
        raise ArgumentError(f"gap must be at least 2, got {gap}")
    if not similarity_value > 0:
        raise ArgumentError(f"similarity must be positive, got {similarity_value}")
    ratio = weight_value / similarity_value
    if ratio <= 0.0:
        raise NumericError(f"weight/similarity ratio must be positive, got {ratio}")
    return 1.0 - ratio ** (1.0 / (gap - 1))


def noise_up_theoretical(eta: float, n_features: int) -> float:
    """Ceiling of the noise range from the worst-case similarity deviation.

    This is the standard deviation of the similarity around zero for far
    apart vectors: 2*eta/sqrt(2*n_features).
    """
    if not eta > 0:
        raise ArgumentError(f"eta must be positive, got {eta}")
    if n_features < 1:
        raise ArgumentError(f"n_features must be at least 1, got {n_features}")
    return 2.0 * eta / math.sqrt(2.0 * n_features)


def noise_up_refined(trace: WeightTrace) -> float:
    """Noise ceiling measured from a trained run: |min weight| of the trace.

    Zero is a degenerate outcome (all weights nonnegative with minimum 0);
    callers should fall back to the theoretical ceiling in that case.
    """
    if trace.weights.size == 0:
        raise StateError("weight trace is empty; train before refining the noise range")
    return float(abs(trace.weights.min()))


def refined_noise_from_traces(traces) -> float:
    """Conservative noise ceiling over several probe traces (max of per-probe values)."""
    traces = list(traces)
    if not traces:
        raise StateError("no probe traces supplied")
    return max(noise_up_refined(trace) for trace in traces)


def write_weight_trace_csv(path, trace: WeightTrace, d_sq=None) -> None:
    """Write a trace as ``i,d_sq,B,F,alpha,flag`` rows (i from 1).

    ``d_sq`` optionally supplies the squared distance of each step's
    vector to the target's; the column is left empty when absent. Rows
    with an undefined conformity factor carry flag 0 and an empty alpha.
    """
    t = trace.weights.size
    dcol = None if d_sq is None else np.asarray(d_sq, dtype=np.float64)
    if dcol is not None and dcol.shape != (t,):
        raise ArgumentError(f"d_sq must have length {t}, got {dcol.shape}")
    with open(path, "w", encoding="utf-8") as handle:
        handle.write("i,d_sq,B,F,alpha,flag\n")
        for i in range(t):
            d = "" if dcol is None else repr(float(dcol[i]))
            a = repr(float(trace.alpha[i])) if trace.alpha_valid[i] else ""
            flag = 1 if trace.alpha_valid[i] else 0
            handle.write(
                f"{i + 1},{d},{float(trace.similarities[i])!r},"
                f"{float(trace.weights[i])!r},{a},{flag}\n"
            )
