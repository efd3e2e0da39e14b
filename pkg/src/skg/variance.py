"""Closed-form selection of the Gaussian kernel variance.

The usable range of the variance splits into four regimes (chaos,
extending, disturbing, averaging) separated by three boundaries derived
from the pairwise-distance statistics of the training vectors and the
noise-range ceiling. The extending/disturbing boundary is the variance at
which the similarity of the farthest pair just clears the noise ceiling;
it is the recommended operating point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError, DegenerateInputError, NumericError, StateError
from .graph_data import TrainingSet, pairwise_stats
from .model import SkgModel
from .rff import feature_matrix, sample_bank
from .weights import noise_up_theoretical, probe_weight_traces, refined_noise_from_traces

NOISE_SOURCES = ("theoretical", "refined")


@dataclass(frozen=True)
class SelectionReport:
    """All inputs, intermediates and boundaries of one variance selection.

    Every number carries a provenance tag in :meth:`to_dict` so reports
    are auditable; ``noise_up_source`` says whether the noise ceiling came
    from the closed form or from a refinement training pass.
    """

    d_sq_max: float
    d_sq_min_nonzero: float
    noise_up: float
    noise_up_source: str
    sigma_sq_ed: float
    sigma_sq_ce: float
    sigma_sq_da: float
    closeness: float
    eta: float
    n_features: int
    da_first_order: bool = False

    def to_dict(self) -> dict:
        def entry(value, source):
            return {"value": value, "source": source}

        return {
            "format": "skg-selection-report-v1",
            "d_sq_max": entry(self.d_sq_max, "pairwise-scan"),
            "d_sq_min_nonzero": entry(self.d_sq_min_nonzero, "pairwise-scan"),
            "noise_up": entry(self.noise_up, self.noise_up_source),
            "sigma_sq_ed": entry(self.sigma_sq_ed, "closed-form"),
            "sigma_sq_ce": entry(self.sigma_sq_ce, "closed-form"),
            "sigma_sq_da": entry(
                self.sigma_sq_da, "first-order" if self.da_first_order else "closed-form"
            ),
            "closeness": entry(self.closeness, "parameter"),
            "inputs": {"eta": self.eta, "n_features": self.n_features},
        }


SELECTION_REPORT_SCHEMA = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "title": "skg selection report",
    "type": "object",
    "required": [
        "format", "d_sq_max", "d_sq_min_nonzero", "noise_up",
        "sigma_sq_ed", "sigma_sq_ce", "sigma_sq_da", "closeness", "inputs",
    ],
    "properties": {
        "format": {"const": "skg-selection-report-v1"},
        "d_sq_max": {"$ref": "#/definitions/tagged"},
        "d_sq_min_nonzero": {"$ref": "#/definitions/tagged"},
        "noise_up": {"$ref": "#/definitions/tagged"},
        "sigma_sq_ed": {"$ref": "#/definitions/tagged"},
        "sigma_sq_ce": {"$ref": "#/definitions/tagged"},
        "sigma_sq_da": {"$ref": "#/definitions/tagged"},
        "closeness": {"$ref": "#/definitions/tagged"},
        "inputs": {
            "type": "object",
            "required": ["eta", "n_features"],
            "properties": {
                "eta": {"type": "number", "exclusiveMinimum": 0},
                "n_features": {"type": "integer", "minimum": 1},
            },
        },
    },
    "definitions": {
        "tagged": {
            "type": "object",
            "required": ["value", "source"],
            "properties": {
                "value": {"type": "number"},
                "source": {"type": "string"},
            },
        }
    },
}


def _log_noise_ratio(noise_up: float, eta: float) -> float:
    if not eta > 0:
        raise ArgumentError(f"eta must be positive, got {eta}")
    if not 0.0 < noise_up < 2.0 * eta:
        raise NumericError(
            f"noise ceiling must lie in (0, 2*eta) = (0, {2 * eta}), got {noise_up}"
        )
    return math.log(noise_up / (2.0 * eta))


def sigma_ed(d_sq_max: float, noise_up: float, eta: float) -> float:
    """Extending/disturbing boundary: -d_sq_max / (2*ln(noise_up / (2*eta)))."""
    if not d_sq_max > 0:
        raise ArgumentError(f"d_sq_max must be positive, got {d_sq_max}")
    return -d_sq_max / (2.0 * _log_noise_ratio(noise_up, eta))


def sigma_ce(d_sq_min_nonzero: float, noise_up: float, eta: float) -> float:
    """Chaos/extending boundary from the smallest nonzero pair distance."""
    if d_sq_min_nonzero is None:
        raise StateError("no nonzero pair distance recorded; all vectors coincide")
    if not d_sq_min_nonzero > 0:
        raise ArgumentError(f"d_sq_min_nonzero must be positive, got {d_sq_min_nonzero}")
    return -d_sq_min_nonzero / (2.0 * _log_noise_ratio(noise_up, eta))


def sigma_da(d_sq_max: float, closeness: float, first_order: bool = False) -> float:
    """Disturbing/averaging boundary: -d_sq_max / (2*ln(1 - closeness)).

    ``closeness`` says how near the farthest pair's similarity must get to
    its 2*eta ceiling and has to stay below 0.5 to mean "closer to the
    ceiling than to zero". ``first_order`` replaces ln(1-c) by -c, which
    reproduces the d_sq_max/(2c) rule of thumb.
    """
    if not d_sq_max > 0:
        raise ArgumentError(f"d_sq_max must be positive, got {d_sq_max}")
    if not 0.0 < closeness < 0.5:
        raise ArgumentError(f"closeness must lie in (0, 0.5), got {closeness}")
    if first_order:
        return d_sq_max / (2.0 * closeness)
    return -d_sq_max / (2.0 * math.log1p(-closeness))


def laplacian_diversity(d_l1_max: float, noise_up: float, eta: float) -> float:
    """Diversity for a Laplacian kernel: -d_l1_max / ln(noise_up / (2*eta)).

    Same construction as the extending/disturbing boundary, but the
    Laplacian kernel decays with the l1-norm distance so the selected
    parameter is the kernel's diversity rather than a variance.
    """
    if not d_l1_max > 0:
        raise ArgumentError(f"d_l1_max must be positive, got {d_l1_max}")
    return -d_l1_max / _log_noise_ratio(noise_up, eta)


def pairwise_l1_max(vectors) -> float:
    """Largest l1-norm difference over all unordered pairs of vectors."""
    a = np.asarray(vectors, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] < 2:
        raise ArgumentError("need at least two vectors")
    best = 0.0
    for i in range(a.shape[0] - 1):
        best = max(best, float(np.abs(a[i + 1:] - a[i]).sum(axis=1).max()))
    return best


def select(vectors, eta: float, n_features: int, *, values=None, refine: bool = False,
           closeness: float = 0.1, epochs: int = 3, seed: int = 0, probe_vectors=None,
           first_order_da: bool = False) -> SelectionReport:
    """Select the kernel variance for a training set of adjacency vectors.

    The pipeline scans all pairwise squared distances, fixes the noise
    ceiling (closed form, or refined by one training pass when ``refine``
    is set), and evaluates the three regime boundaries.

    Parameters
    ----------
    vectors : array-like, shape (n, m)
        Adjacency vectors of the sampled nodes.
    eta, n_features : float, int
        Learning rate and bank size the model will be run with.
    values : array-like, optional
        Nodal values of the sampled nodes; required when ``refine`` is set
        (the refinement pass actually trains).
    refine : bool
        Re-estimate the noise ceiling from the contribution weights of a
        run at the closed-form variance, then recompute the boundaries.
    probe_vectors : array-like, optional
        Held-out vectors probed for the refined estimate (the conservative
        maximum over probes is used); defaults to the training vectors.
    """
    vectors = np.asarray(vectors, dtype=np.float64)
    stats = pairwise_stats(vectors)
    if stats.d_sq_max == 0.0:
        raise DegenerateInputError("all adjacency vectors are identical; no nonzero distance")
    noise_theory = noise_up_theoretical(eta, n_features)
    noise, source = noise_theory, "theoretical"
    if refine:
        if values is None:
            raise ArgumentError("refinement needs the nodal values of the sampled nodes")
        sigma0 = sigma_ed(stats.d_sq_max, noise_theory, eta)
        bank = sample_bank(sigma0, n_features, vectors.shape[1], seed)
        skg = SkgModel(bank=bank, eta=eta)
        trace = skg.train(TrainingSet(vectors, values), epochs=epochs, seed=seed)
        ordered = feature_matrix(bank, vectors)[trace.order]
        probes = vectors if probe_vectors is None else np.asarray(probe_vectors, np.float64)
        probe_traces = probe_weight_traces(ordered, feature_matrix(bank, probes), eta)
        refined = refined_noise_from_traces(probe_traces)
        if refined >= 2.0 * eta:
            raise NumericError(
                f"refined noise ceiling {refined} reached 2*eta; run diverged, "
                "check eta and epochs"
            )
        if refined > 0.0:
            noise, source = refined, "refined"
    return SelectionReport(
        d_sq_max=stats.d_sq_max,
        d_sq_min_nonzero=stats.d_sq_min_nonzero,
        noise_up=noise,
        noise_up_source=source,
        sigma_sq_ed=sigma_ed(stats.d_sq_max, noise, eta),
        sigma_sq_ce=sigma_ce(stats.d_sq_min_nonzero, noise, eta),
        sigma_sq_da=sigma_da(stats.d_sq_max, closeness, first_order_da),
        closeness=float(closeness),
        eta=float(eta),
        n_features=int(n_features),
        da_first_order=bool(first_order_da),
    )
