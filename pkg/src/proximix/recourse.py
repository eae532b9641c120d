"""Nearest-instance counterfactuals and the recourse-cost gap between groups."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .classifiers import predict_labels
from .data import EncodedDataset
from .metrics import EmptyGroup
from .mixing import distances_to

RECOURSE_KEYS = ("m_avg", "m_std", "f_avg", "f_std", "delta_avg", "delta_std", "m_count", "f_count")


class NoCounterfactualsFound(RuntimeError):
    pass


@dataclass(frozen=True)
class CounterfactualResult:
    source_index: int
    cf_features: np.ndarray
    cost: float
    found: bool
    pool_index: int = -1


@dataclass
class RecourseReport:
    m_avg: float
    m_std: float
    f_avg: float
    f_std: float
    delta_avg: float
    delta_std: float
    m_count: int
    f_count: int

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in RECOURSE_KEYS}

    @classmethod
    def from_dict(cls, d: dict) -> "RecourseReport":
        return cls(**{k: d[k] for k in RECOURSE_KEYS})


def _nearest_flip(x, pred_x, pool_X, pool_pred):
    flipped = np.flatnonzero(pool_pred != pred_x)
    if len(flipped) == 0:
        return -1, np.inf
    d = distances_to(x, pool_X[flipped])
    k = int(np.argmin(d))
    return int(flipped[k]), float(d[k])


def find_counterfactual(model, x, candidate_pool: EncodedDataset, source_index: int = -1,
                        pool_predictions=None) -> CounterfactualResult:
    """Closest pool row that the model labels differently from ``x``.

    ``pool_predictions`` may carry precomputed hard labels for the pool.
    Ties in distance resolve to the lowest pool index.
    """
    x = np.asarray(x, dtype=float)
    if len(candidate_pool) == 0:
        raise ValueError("candidate pool is empty")
    if pool_predictions is None:
        pool_predictions = predict_labels(model, candidate_pool.features)
    pred_x = predict_labels(model, x[None, :])[0]
    j, cost = _nearest_flip(x, pred_x, candidate_pool.features, np.asarray(pool_predictions))
    if j < 0:
        return CounterfactualResult(source_index, np.full_like(x, np.nan), float("nan"), False)
    return CounterfactualResult(source_index, candidate_pool.features[j].copy(), cost, True, j)


def recourse_report_from_costs(costs, z) -> RecourseReport:
    """Aggregate per-instance costs into group means and population deviations.

    ``costs`` holds NaN for instances without a counterfactual.
    """
    costs = np.asarray(costs, dtype=float)
    z = np.asarray(z).astype(int)
    stats = {}
    for g, tag in ((1, "m"), (0, "f")):
        in_group = z == g
        if not in_group.any():
            raise EmptyGroup(f"no rows with z={g}")
        c = costs[in_group & ~np.isnan(costs)]
        if len(c) == 0:
            raise NoCounterfactualsFound(f"no counterfactual found for any row with z={g}")
        stats[tag] = (float(c.mean()), float(c.std()), int(len(c)))
    (m_avg, m_std, m_n), (f_avg, f_std, f_n) = stats["m"], stats["f"]
    return RecourseReport(m_avg, m_std, f_avg, f_std, abs(m_avg - f_avg), abs(m_std - f_std), m_n, f_n)


def counterfactual_costs(model, test: EncodedDataset, pool: EncodedDataset) -> np.ndarray:
    pool_pred = predict_labels(model, pool.features)
    test_pred = predict_labels(model, test.features)
    out = np.full(len(test), np.nan)
    for i in range(len(test)):
        _, cost = _nearest_flip(test.features[i], test_pred[i], pool.features, pool_pred)
        if np.isfinite(cost):
            out[i] = cost
    return out


def group_recourse_report(model, test: EncodedDataset, pool: EncodedDataset) -> RecourseReport:
    return recourse_report_from_costs(counterfactual_costs(model, test, pool), test.sensitive)
