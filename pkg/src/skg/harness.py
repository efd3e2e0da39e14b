"""End-to-end evaluation: seeded pipeline runs, variance sweeps, exports.

A run is: split the nodes, build adjacency vectors against the sampled
(referencing) set, normalize values, sample a feature bank, train, and
score the tested nodes with the generalization normalized mean squared
error. Sweeps repeat runs over a variance grid with independent seeds.
"""

from __future__ import annotations

import concurrent.futures
from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError, DataError, DegenerateInputError, StateError
from .graph_data import (Dataset, TrainingSet, apply_normalization,
                         build_adjacency_vectors, split_sample)
from .model import SkgModel, TrainingTrace
from .rff import feature_matrix, sample_bank
from .variance import SelectionReport, select
from .weights import WeightTrace, probe_weight_traces


@dataclass(frozen=True)
class RunConfig:
    """Hyperparameter bundle for one pipeline run."""

    eta: float = 0.1
    n_features: int = 200
    epochs: int = 3
    sample_fraction: float = 0.4
    closeness: float = 0.1
    refine_noise: bool = False
    normalization: str = "max-abs"

    def __post_init__(self):
        if self.eta <= 0 or self.n_features < 1 or self.epochs < 1:
            raise ArgumentError("eta, n_features and epochs must be positive")
        if not (0.0 < self.sample_fraction <= 1.0):
            raise ArgumentError(f"sample_fraction must lie in (0, 1], got {self.sample_fraction}")
        if not (0.0 < self.closeness < 0.5):
            raise ArgumentError(f"closeness must lie in (0, 0.5), got {self.closeness}")


@dataclass(frozen=True)
class SweepGrid:
    """Strictly increasing variance grid plus the run configuration."""

    sigma_sq_values: tuple
    config: RunConfig
    marked_sigma_sq: float | None = None

    def __post_init__(self):
        values = tuple(float(v) for v in self.sigma_sq_values)
        if len(values) == 0:
            raise ArgumentError("grid must contain at least one variance")
        if any(v <= 0 for v in values):
            raise ArgumentError("grid variances must be positive")
        if any(b <= a for a, b in zip(values, values[1:])):
            raise ArgumentError("grid variances must be strictly increasing")
        object.__setattr__(self, "sigma_sq_values", values)


@dataclass(frozen=True)
class GnmseResult:
    """Mean/std of the error metric over the repeats at one variance."""

    sigma_sq: float
    gnmse_mean: float
    gnmse_std: float
    repeats: int
    seeds: tuple


@dataclass(frozen=True)
class RunResult:
    """Artifacts of one pipeline run."""

    gnmse: float
    sampled: tuple
    tested: tuple
    value_scale: float
    predictions: np.ndarray
    test_values: np.ndarray
    model: SkgModel
    training_trace: TrainingTrace
    trace: WeightTrace | None = None
    probe_node: object = None


def gnmse(y_true, y_pred) -> float:
    """Squared residual norm over squared signal norm."""
    t = np.asarray(y_true, dtype=np.float64)
    p = np.asarray(y_pred, dtype=np.float64)
    if t.shape != p.shape or t.ndim != 1:
        raise ArgumentError(f"value vectors must be 1-d and equally long, got {t.shape} vs {p.shape}")
    if t.size == 0:
        raise ArgumentError("value vectors are empty")
    denom = float(t @ t)
    if denom == 0.0:
        raise DegenerateInputError("true values are all zero; the metric is undefined")
    diff = t - p
    return float(diff @ diff) / denom


def resolve_sigma_sq(dataset: Dataset, config: RunConfig, seed: int,
                     first_order_da: bool = False) -> SelectionReport:
    """Run variance selection on the seed's sampled split of ``dataset``."""
    sampled, tested = split_sample(dataset.node_ids, config.sample_fraction, seed)
    vectors = build_adjacency_vectors(dataset.graph, sampled, sampled)
    y_train = dataset.value_array(sampled)
    y_test = dataset.value_array(tested)
    _, yn_train, _ = apply_normalization(config.normalization, y_train, y_test)
    probes = build_adjacency_vectors(dataset.graph, tested, sampled) if tested else None
    return select(
        vectors, config.eta, config.n_features,
        values=yn_train, refine=config.refine_noise, closeness=config.closeness,
        epochs=config.epochs, seed=seed, probe_vectors=probes,
        first_order_da=first_order_da,
    )


def run_once(dataset: Dataset, config: RunConfig, sigma_sq: float, seed: int, *,
             keep_trace: bool = False, probe_node=None, split=None) -> RunResult:
    """One full train-and-score pass, deterministic per seed.

    ``split`` fixes the (sampled, tested) lists instead of drawing them
    from the seed. With ``keep_trace`` the contribution-weight trace of
    ``probe_node`` (default: first tested node) is retained.
    """
    if split is None:
        sampled, tested = split_sample(dataset.node_ids, config.sample_fraction, seed)
    else:
        sampled, tested = list(split[0]), list(split[1])
    if not tested:
        raise DegenerateInputError("no tested nodes; lower the sample fraction")
    vectors = build_adjacency_vectors(dataset.graph, sampled, sampled)
    test_vectors = build_adjacency_vectors(dataset.graph, tested, sampled)
    scale, yn_train, yn_test = apply_normalization(
        config.normalization, dataset.value_array(sampled), dataset.value_array(tested)
    )
    bank = sample_bank(float(sigma_sq), config.n_features, len(sampled), seed)
    skg = SkgModel(bank=bank, eta=config.eta)
    training_trace = skg.train(
        TrainingSet(vectors, yn_train, node_ids=tuple(sampled)), config.epochs, seed
    )
    predictions = skg.predict_batch(test_vectors)
    score = gnmse(yn_test, predictions)

    trace = None
    if keep_trace:
        probe = tested[0] if probe_node is None else probe_node
        if probe not in tested:
            raise DataError(f"probe node {probe!r} is not among the tested nodes")
        ordered = feature_matrix(bank, vectors)[training_trace.order]
        probe_vec = test_vectors[tested.index(probe)][None, :]
        trace = probe_weight_traces(ordered, feature_matrix(bank, probe_vec), config.eta)[0]
        probe_node = probe

    return RunResult(
        gnmse=score, sampled=tuple(sampled), tested=tuple(tested), value_scale=scale,
        predictions=predictions, test_values=yn_test, model=skg,
        training_trace=training_trace, trace=trace, probe_node=probe_node,
    )


def default_grid(report: SelectionReport, config: RunConfig, points: int = 25) -> SweepGrid:
    """Log-spaced grid spanning a tenth of the chaos/extending boundary to
    ten times the disturbing/averaging one, with the selected variance
    inserted and marked."""
    if points < 2:
        raise ArgumentError(f"grid needs at least 2 points, got {points}")
    lo, hi = report.sigma_sq_ce / 10.0, report.sigma_sq_da * 10.0
    values = list(np.geomspace(lo, hi, points))
    ed = report.sigma_sq_ed
    if not any(np.isclose(v, ed, rtol=1e-9, atol=0.0) for v in values):
        values.append(ed)
    values.sort()
    return SweepGrid(sigma_sq_values=tuple(values), config=config, marked_sigma_sq=ed)


def _sweep_cell(args):
    dataset, config, sigma_sq, seed, split = args
    return run_once(dataset, config, sigma_sq, seed, split=split).gnmse


def sweep(dataset: Dataset, grid: SweepGrid, repeats: int = 50, base_seed: int = 0, *,
          seeds=None, jobs: int = 1, fixed_split: bool = False) -> list[GnmseResult]:
    """Repeated seeded runs over the variance grid.

    Each repeat uses a fresh split, bank and order (seed ``base_seed + r``)
    unless ``fixed_split`` pins the split of ``base_seed`` for all runs,
    isolating bank/order randomness. Cells are independent; ``jobs`` > 1
    runs them in processes, and aggregation does not depend on completion
    order.
    """
    if seeds is None:
        if repeats < 1:
            raise ArgumentError(f"repeats must be at least 1, got {repeats}")
        seeds = [base_seed + r for r in range(repeats)]
    seeds = [int(s) for s in seeds]
    if not seeds:
        raise ArgumentError("need at least one seed")
    split = None
    if fixed_split:
        split = split_sample(dataset.node_ids, grid.config.sample_fraction, base_seed)
    cells = [
        (dataset, grid.config, sigma_sq, seed, split)
        for sigma_sq in grid.sigma_sq_values
        for seed in seeds
    ]
    if jobs > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as pool:
            flat = list(pool.map(_sweep_cell, cells, chunksize=max(1, len(cells) // (4 * jobs))))
    else:
        flat = [_sweep_cell(cell) for cell in cells]
    scores = np.array(flat, dtype=np.float64).reshape(len(grid.sigma_sq_values), len(seeds))
    results = []
    for i, sigma_sq in enumerate(grid.sigma_sq_values):
        row = scores[i]
        std = float(row.std(ddof=1)) if row.size > 1 else 0.0
        results.append(
            GnmseResult(
                sigma_sq=float(sigma_sq), gnmse_mean=float(row.mean()), gnmse_std=std,
                repeats=row.size, seeds=tuple(seeds),
            )
        )
    return results


def write_sweep_csv(path, results, marked_sigma_sq=None) -> None:
    """Write sweep results as ``sigma_sq,gnmse_mean,gnmse_std,repeats,is_theoretical_ed``."""
    with open(path, "w", encoding="utf-8") as handle:
        handle.write("sigma_sq,gnmse_mean,gnmse_std,repeats,is_theoretical_ed\n")
        for res in results:
            marked = (
                marked_sigma_sq is not None
                and np.isclose(res.sigma_sq, marked_sigma_sq, rtol=1e-12, atol=0.0)
            )
            handle.write(
                f"{res.sigma_sq!r},{res.gnmse_mean!r},{res.gnmse_std!r},"
                f"{res.repeats},{'true' if marked else 'false'}\n"
            )


def export_scatter(training_set: TrainingSet) -> np.ndarray:
    """Rows (squared distance, |value difference|) over all sampled pairs."""
    if training_set.n < 2:
        raise ArgumentError("scatter export needs at least two sampled nodes")
    rows = []
    vectors, values = training_set.vectors, training_set.values
    for i in range(training_set.n - 1):
        diff = vectors[i + 1:] - vectors[i]
        d_sq = np.einsum("ij,ij->i", diff, diff)
        dy = np.abs(values[i + 1:] - values[i])
        rows.append(np.column_stack([d_sq, dy]))
    return np.concatenate(rows, axis=0)


def write_scatter_csv(path, rows: np.ndarray) -> None:
    """Write scatter rows as ``d_sq,abs_dy``."""
    with open(path, "w", encoding="utf-8") as handle:
        handle.write("d_sq,abs_dy\n")
        for d_sq, dy in rows:
            handle.write(f"{float(d_sq)!r},{float(dy)!r}\n")


def export_bf_trace(result: RunResult) -> list[tuple]:
    """Rows (i, B, F, alpha, alpha_flag) for the retained probe trace."""
    if result.trace is None:
        raise StateError("run was executed without trace retention")
    trace = result.trace
    rows = []
    for i in range(trace.weights.size):
        alpha = float(trace.alpha[i]) if trace.alpha_valid[i] else None
        rows.append(
            (i + 1, float(trace.similarities[i]), float(trace.weights[i]),
             alpha, bool(trace.alpha_valid[i]))
        )
    return rows


def write_bf_trace_csv(path, rows) -> None:
    """Write probe-trace rows as ``i,B,F,alpha,alpha_flag``."""
    with open(path, "w", encoding="utf-8") as handle:
        handle.write("i,B,F,alpha,alpha_flag\n")
        for i, b, f, alpha, valid in rows:
            a = "" if alpha is None else repr(float(alpha))
            handle.write(f"{i},{b!r},{f!r},{a},{1 if valid else 0}\n")
