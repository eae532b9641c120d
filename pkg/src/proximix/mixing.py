"""Proximity-aware mixup: pairwise lambda-mixing blended with neighbourhood labels.

A mixed sample takes its features from a convex combination of an anchor
``S0`` and a partner ``S1`` drawn from the opposite sensitive group. Its
label blends the pairwise mixed label ``y_lambda`` with ``y_sim``, the
positive-label share among the anchor and every opposite-group training
row that lies no farther from the anchor than the partner does::

    label = d * y_lambda + (1 - d) * y_sim
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import NamedTuple, Optional

import numpy as np

from .data import EmptySubgroup, EncodedDataset, SubgroupSelector, concat, subgroup_mask


class DimensionMismatch(ValueError):
    pass


class Sample(NamedTuple):
    x: np.ndarray
    y: float
    z: int


def sample_at(ds: EncodedDataset, i: int) -> Sample:
    return Sample(ds.features[i], float(ds.labels[i]), int(ds.sensitive[i]))


@dataclass(frozen=True)
class MixConfig:
    """Parameters of one augmentation run.

    Parameters
    ----------
    d : float
        Balancing degree in [0, 1]; 1 is plain mixup, 0 uses only the
        proximity label.
    alpha : float
        Shape of the symmetric Beta distribution that ``lambda`` is drawn from.
    pool_size_K : int
        Nearest opposite-group rows queued as partners for each anchor.
    min_neighbors : int
        Proximity sets smaller than this are not trusted and the label falls
        back to ``y_lambda``.
    gen_count_M : int
        Number of samples to generate.
    seed : int
    """

    d: float = 0.5
    alpha: float = 1.0
    pool_size_K: int = 25
    min_neighbors: int = 5
    gen_count_M: int = 100
    seed: int = 42

    def __post_init__(self):
        if not 0.0 <= self.d <= 1.0:
            raise ValueError(f"d must lie in [0, 1], got {self.d}")
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        if self.pool_size_K < 1:
            raise ValueError("pool_size_K must be positive")
        if not 0 <= self.min_neighbors <= self.pool_size_K:
            raise ValueError("min_neighbors must lie in [0, pool_size_K]")
        if self.gen_count_M < 1:
            raise ValueError("gen_count_M must be at least 1")


@dataclass(frozen=True)
class SamplingStrategy:
    """Anchor subgroup ``(z, y)`` paired with partners from group ``1 - z``."""

    anchor: SubgroupSelector
    partner_z: int
    name: str = ""

    def __post_init__(self):
        if self.anchor.y is None:
            raise ValueError("strategy anchor needs a label")
        if self.partner_z != 1 - self.anchor.z:
            raise ValueError("partner group must be the opposite sensitive group")

    @classmethod
    def from_anchor(cls, z: int, y: int, name: str = "") -> "SamplingStrategy":
        return cls(SubgroupSelector(z, y), 1 - z, name or f"z{z}y{y}")


# Unprivileged group is z=0. C1/C2 anchor on it, C3/C4 on the privileged group.
STRATEGIES = {
    "C1C1p": SamplingStrategy.from_anchor(0, 0, "C1C1p"),
    "C2C1p": SamplingStrategy.from_anchor(0, 1, "C2C1p"),
    "C3C3p": SamplingStrategy.from_anchor(1, 0, "C3C3p"),
    "C4C3p": SamplingStrategy.from_anchor(1, 1, "C4C3p"),
}


@dataclass(frozen=True)
class MixedSample:
    features: np.ndarray
    label: float
    sensitive: int
    anchor_index: int
    partner_index: int
    lam: float
    y_lambda: float
    y_sim: float
    proxi_set_size: int

    def provenance(self) -> dict:
        return {
            "anchor_index": self.anchor_index,
            "partner_index": self.partner_index,
            "lambda": self.lam,
            "label": self.label,
            "y_lambda": self.y_lambda,
            "y_sim": self.y_sim,
            "proxi_set_size": self.proxi_set_size,
        }


def distances_to(x0, rows) -> np.ndarray:
    """Euclidean distance from ``x0`` to every row of ``rows``.

    Squares are accumulated one feature at a time, left to right, so the
    result does not depend on BLAS or SIMD reduction order and ties at the
    proximity threshold resolve the same way everywhere.
    """
    rows = np.asarray(rows, dtype=float)
    x0 = np.asarray(x0, dtype=float)
    if rows.shape[-1] != x0.shape[-1]:
        raise DimensionMismatch(f"{x0.shape[-1]} vs {rows.shape[-1]} features")
    rows = rows.reshape(-1, x0.shape[-1])
    acc = np.zeros(len(rows))
    for j in range(x0.shape[-1]):
        step = rows[:, j] - x0[j]
        acc += step * step
    return np.sqrt(acc)


def euclidean_distance(x0, x1) -> float:
    x0 = np.asarray(x0, dtype=float)
    x1 = np.asarray(x1, dtype=float)
    if x0.shape != x1.shape:
        raise DimensionMismatch(f"{x0.shape} vs {x1.shape}")
    # Same reduction as distances_to so thresholds compare consistently.
    return float(distances_to(x0, x1.reshape(1, -1))[0])


def proximity_set(s0, pool: EncodedDataset, p_dis: float) -> np.ndarray:
    """Ascending indices of the pool rows within ``p_dis`` of the anchor."""
    x0 = s0.x if isinstance(s0, Sample) else s0
    return np.flatnonzero(distances_to(x0, pool.features) <= p_dis)


def y_sim(s0_label: float, proxi_labels) -> float:
    """Positive-label fraction over the anchor plus its proximity set."""
    proxi_labels = np.asarray(proxi_labels, dtype=float)
    return (float(s0_label) + float(proxi_labels.sum())) / (1 + proxi_labels.size)


def lambda_mix(y0: float, y1: float, lam: float) -> float:
    return lam * y0 + (1 - lam) * y1


def mix_features(x0, x1, lam: float) -> np.ndarray:
    x0 = np.asarray(x0, dtype=float)
    x1 = np.asarray(x1, dtype=float)
    if x0.shape != x1.shape:
        raise DimensionMismatch(f"{x0.shape} vs {x1.shape}")
    mixed = lam * x0 + (1 - lam) * x1
    # Rounding can step one ulp outside the parents' box.
    return np.clip(mixed, np.minimum(x0, x1), np.maximum(x0, x1))


def assign_sensitive(z0: int, z1: int, lam: float) -> int:
    """The mixed sample belongs to the anchor's group only if its share is over half."""
    return z0 if lam > 0.5 else z1


def blend(y_lambda: float, y_similar: float, proxi_size: int, cfg: MixConfig) -> float:
    if proxi_size < cfg.min_neighbors:
        return y_lambda
    return cfg.d * y_lambda + (1 - cfg.d) * y_similar


def _label_from_distances(y0, y1, lam, p_dis, pool_dists, pool_labels, cfg):
    members = pool_dists <= p_dis
    size = int(members.sum())
    ys = y_sim(y0, pool_labels[members])
    yl = lambda_mix(y0, y1, lam)
    return blend(yl, ys, size, cfg), yl, ys, size


def proximix_label(s0: Sample, s1: Sample, pool: EncodedDataset, cfg: MixConfig, lam: float):
    """Mixed label for the pair ``(s0, s1)``.

    Returns
    -------
    tuple
        ``(label, y_lambda, y_sim, proxi_size)``. The proximity set is taken
        over all of ``pool`` (the anchor's opposite sensitive group).
    """
    p_dis = euclidean_distance(s0.x, s1.x)
    dists = distances_to(s0.x, pool.features)
    return _label_from_distances(s0.y, s1.y, lam, p_dis, dists, pool.labels, cfg)


def knn_pool(s0, pool: EncodedDataset, K: int) -> np.ndarray:
    """Indices of the ``K`` nearest pool rows, nearest first, ties by index."""
    x0 = s0.x if isinstance(s0, Sample) else s0
    if len(pool) == 0:
        raise EmptySubgroup("empty partner pool")
    dists = distances_to(x0, pool.features)
    return np.argsort(dists, kind="stable")[: min(K, len(pool))]


@dataclass
class GenerationLog:
    anchors_drawn: int = 0


def generate(
    train: EncodedDataset,
    strategy: SamplingStrategy,
    cfg: MixConfig,
    log: Optional[GenerationLog] = None,
) -> list[MixedSample]:
    """Generate ``cfg.gen_count_M`` mixed samples from ``train``.

    Each round draws a random anchor from the strategy's subgroup, queues its
    ``K`` nearest opposite-group rows and mixes the anchor with them furthest
    first. Rounds repeat with fresh anchors until enough samples exist.
    Indices in the returned provenance refer to rows of ``train``.
    """
    anchors = np.flatnonzero(subgroup_mask(train, strategy.anchor))
    partners = np.flatnonzero(train.sensitive == strategy.partner_z)
    if len(anchors) == 0:
        raise EmptySubgroup(f"no anchors for strategy {strategy.name or strategy.anchor}")
    if len(partners) == 0:
        raise EmptySubgroup(f"no partners with z={strategy.partner_z}")
    P = train.features[partners]
    P_labels = train.labels[partners]

    rng = np.random.default_rng(cfg.seed)
    out: list[MixedSample] = []
    log = log if log is not None else GenerationLog()
    while len(out) < cfg.gen_count_M:
        a = int(anchors[rng.integers(len(anchors))])
        log.anchors_drawn += 1
        x0, y0, z0 = train.features[a], float(train.labels[a]), int(train.sensitive[a])
        dists = distances_to(x0, P)
        queue = np.argsort(dists, kind="stable")[: min(cfg.pool_size_K, len(partners))]
        for j in queue[::-1]:
            lam = float(rng.beta(cfg.alpha, cfg.alpha))
            x1, y1 = P[j], float(P_labels[j])
            label, yl, ys, size = _label_from_distances(y0, y1, lam, dists[j], dists, P_labels, cfg)
            out.append(
                MixedSample(
                    features=mix_features(x0, x1, lam),
                    label=label,
                    sensitive=assign_sensitive(z0, strategy.partner_z, lam),
                    anchor_index=a,
                    partner_index=int(partners[j]),
                    lam=lam,
                    y_lambda=yl,
                    y_sim=ys,
                    proxi_set_size=size,
                )
            )
            if len(out) == cfg.gen_count_M:
                break
    return out


def to_dataset(samples: list[MixedSample], template: EncodedDataset) -> EncodedDataset:
    """Pack mixed samples into a dataset sharing ``template``'s feature layout."""
    D = template.n_features
    X = np.array([s.features for s in samples], dtype=float).reshape(len(samples), D)
    return replace(
        template,
        features=X,
        labels=np.array([s.label for s in samples], dtype=float),
        sensitive=np.array([s.sensitive for s in samples], dtype=int),
        metadata={**template.metadata, "augmented": True},
    )


def augment(train: EncodedDataset, strategy: SamplingStrategy, cfg: MixConfig) -> tuple[EncodedDataset, list[MixedSample]]:
    """``train`` with ``cfg.gen_count_M`` mixed samples appended."""
    samples = generate(train, strategy, cfg)
    return concat(train, to_dataset(samples, train)), samples
