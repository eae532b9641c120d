"""Prediction and group-fairness metrics.

Group ``z=1`` is privileged (reported with an ``m`` prefix), ``z=0`` is
unprivileged (``f`` prefix). Differences are privileged minus unprivileged
and ratios are unprivileged over privileged, without absolute values or
clamping.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .classifiers import predict_labels

REPORT_KEYS = (
    "acc", "f1", "dp_diff", "dp_ratio", "eodds_diff", "eodds_ratio",
    "m_f1", "m_tpr", "m_fpr", "f_f1", "f_tpr", "f_fpr",
)


class LengthMismatch(ValueError):
    pass


class EmptyInput(ValueError):
    pass


class EmptyGroup(ValueError):
    pass


class UndefinedRatio(ZeroDivisionError):
    pass


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    fn: int
    tn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn

    def __add__(self, other: "ConfusionCounts") -> "ConfusionCounts":
        return ConfusionCounts(self.tp + other.tp, self.fp + other.fp, self.fn + other.fn, self.tn + other.tn)


def _ratio(num, den, flags: Optional[list] = None, name: str = "") -> float:
    if den == 0:
        if flags is not None:
            flags.append(name)
        return 0.0
    return num / den


def _binary(v, what):
    a = np.asarray(v).reshape(-1)
    if a.size and not np.isin(a, (0, 1)).all():
        raise ValueError(f"{what} must be 0/1")
    return a.astype(int)


def confusion(y_true, y_pred) -> ConfusionCounts:
    t = _binary(y_true, "y_true")
    p = _binary(y_pred, "y_pred")
    if t.shape != p.shape:
        raise LengthMismatch(f"{t.size} labels vs {p.size} predictions")
    if t.size == 0:
        raise EmptyInput("no rows to evaluate")
    tp = int(np.sum((t == 1) & (p == 1)))
    fp = int(np.sum((t == 0) & (p == 1)))
    fn = int(np.sum((t == 1) & (p == 0)))
    return ConfusionCounts(tp, fp, fn, t.size - tp - fp - fn)


def precision_recall_f1(c: ConfusionCounts, flags: Optional[list] = None):
    """Precision, recall and F1; any 0/0 evaluates to 0 and is noted in ``flags``."""
    precision = _ratio(c.tp, c.tp + c.fp, flags, "precision")
    recall = _ratio(c.tp, c.tp + c.fn, flags, "recall")
    f1 = _ratio(2 * precision * recall, precision + recall, flags, "f1")
    return precision, recall, f1


def _group_mask(z, group):
    z = np.asarray(z).reshape(-1)
    mask = z == group
    if not mask.any():
        raise EmptyGroup(f"no rows with z={group}")
    return mask


def subgroup_rates(y_true, y_pred, z, group: int, flags: Optional[list] = None):
    """``(tpr, fpr)`` restricted to rows with ``z == group``."""
    mask = _group_mask(z, group)
    c = confusion(np.asarray(y_true)[mask], np.asarray(y_pred)[mask])
    tag = "m" if group == 1 else "f"
    return _ratio(c.tp, c.tp + c.fn, flags, f"{tag}_tpr"), _ratio(c.fp, c.fp + c.tn, flags, f"{tag}_fpr")


def demographic_parity(y_pred, z, group: int) -> float:
    mask = _group_mask(z, group)
    return float(np.mean(_binary(y_pred, "y_pred")[mask]))


def dp_gap(dp0: float, dp1: float):
    """``(dp1 - dp0, dp0 / dp1)``."""
    if dp1 == 0:
        raise UndefinedRatio("privileged positive rate is zero")
    return dp1 - dp0, dp0 / dp1


def eodds_gap(tpr0: float, tpr1: float, fpr0: float, fpr1: float):
    """``(max(tpr1 - tpr0, fpr1 - fpr0), min(tpr0 / tpr1, fpr0 / fpr1))``."""
    diff = max(tpr1 - tpr0, fpr1 - fpr0)
    if tpr1 == 0 or fpr1 == 0:
        raise UndefinedRatio("privileged TPR or FPR is zero")
    return diff, min(tpr0 / tpr1, fpr0 / fpr1)


@dataclass
class FairnessReport:
    acc: float
    f1: float
    precision: float
    recall: float
    dp_diff: float
    dp_ratio: Optional[float]
    eodds_diff: float
    eodds_ratio: Optional[float]
    m_f1: float
    m_tpr: float
    m_fpr: float
    m_dp: float
    f_f1: float
    f_tpr: float
    f_fpr: float
    f_dp: float
    flags: list = field(default_factory=list)

    def to_dict(self) -> dict:
        """Table columns in their canonical order, followed by the extras."""
        out = {k: getattr(self, k) for k in REPORT_KEYS}
        out.update(precision=self.precision, recall=self.recall, m_dp=self.m_dp, f_dp=self.f_dp, flags=list(self.flags))
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "FairnessReport":
        return cls(**{k: d[k] for k in cls.__dataclass_fields__ if k in d})

    def row(self) -> list:
        return [getattr(self, k) for k in REPORT_KEYS]


def evaluate_predictions(y_true, y_pred, z) -> FairnessReport:
    """Fill a :class:`FairnessReport` from hard predictions and group membership."""
    t = _binary(y_true, "y_true")
    p = _binary(y_pred, "y_pred")
    z = np.asarray(z).reshape(-1).astype(int)
    flags: list = []
    c = confusion(t, p)
    precision, recall, f1 = precision_recall_f1(c, flags)
    per = {}
    for g, tag in ((1, "m"), (0, "f")):
        mask = _group_mask(z, g)
        cg = confusion(t[mask], p[mask])
        g_flags: list = []
        _, _, gf1 = precision_recall_f1(cg, g_flags)
        flags.extend(f"{tag}_{name}" for name in g_flags)
        tpr, fpr = subgroup_rates(t, p, z, g, flags)
        per[tag] = dict(f1=gf1, tpr=tpr, fpr=fpr, dp=demographic_parity(p, z, g))
    dp_diff = per["m"]["dp"] - per["f"]["dp"]
    try:
        _, dp_ratio = dp_gap(per["f"]["dp"], per["m"]["dp"])
    except UndefinedRatio:
        dp_ratio = None
        flags.append("dp_ratio")
    eodds_diff = max(per["m"]["tpr"] - per["f"]["tpr"], per["m"]["fpr"] - per["f"]["fpr"])
    try:
        _, eodds_ratio = eodds_gap(per["f"]["tpr"], per["m"]["tpr"], per["f"]["fpr"], per["m"]["fpr"])
    except UndefinedRatio:
        eodds_ratio = None
        flags.append("eodds_ratio")
    return FairnessReport(
        acc=float(np.mean(t == p)),
        f1=f1,
        precision=precision,
        recall=recall,
        dp_diff=dp_diff,
        dp_ratio=dp_ratio,
        eodds_diff=eodds_diff,
        eodds_ratio=eodds_ratio,
        m_f1=per["m"]["f1"],
        m_tpr=per["m"]["tpr"],
        m_fpr=per["m"]["fpr"],
        m_dp=per["m"]["dp"],
        f_f1=per["f"]["f1"],
        f_tpr=per["f"]["tpr"],
        f_fpr=per["f"]["fpr"],
        f_dp=per["f"]["dp"],
        flags=flags,
    )


def full_report(model, test) -> FairnessReport:
    return evaluate_predictions(test.labels >= 0.5, predict_labels(model, test.features), test.sensitive)
