"""Small from-scratch binary classifiers: logistic regression, CART tree and MLP.

Logistic regression and the MLP minimise binary cross-entropy against the
(possibly fractional) training labels. The tree thresholds labels at 0.5 and
grows Gini splits.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .data import EncodedDataset

LOGREG = "logreg"
TREE = "tree"
MLP = "mlp"
FAMILIES = (LOGREG, TREE, MLP)

_EPS = 1e-12


class SingleClassTraining(UserWarning):
    """All thresholded training labels are identical."""


class DimensionMismatch(ValueError):
    pass


@dataclass(frozen=True)
class TrainSpec:
    family: str = LOGREG
    max_depth: int = 7
    hidden_layers: tuple = (128, 128, 128)
    max_iterations: int | None = None
    learning_rate: float | None = None
    batch_size: int = 64
    tol: float = 1e-6
    n_iter_no_change: int = 10
    seed: int = 42

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown model family {self.family!r}")
        object.__setattr__(self, "hidden_layers", tuple(int(h) for h in self.hidden_layers))

    @property
    def iterations(self) -> int:
        if self.max_iterations is not None:
            return self.max_iterations
        # plain gradient descent at lr 0.1 needs ~10^4 steps on [0, 1]-scaled features
        return 20000 if self.family == LOGREG else 1500

    @property
    def lr(self) -> float:
        if self.learning_rate is not None:
            return self.learning_rate
        return 0.1 if self.family == LOGREG else 1e-3


@dataclass
class TrainedModel:
    family: str
    parameters: dict
    feature_dim: int
    single_class: bool = False
    info: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "feature_dim": self.feature_dim,
            "single_class": self.single_class,
            "info": self.info,
            "parameters": {k: _to_jsonable(v) for k, v in self.parameters.items()},
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TrainedModel":
        params = {k: _from_jsonable(v) for k, v in d["parameters"].items()}
        return cls(d["family"], params, int(d["feature_dim"]), bool(d["single_class"]), dict(d.get("info", {})))

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict()))

    @classmethod
    def load(cls, path) -> "TrainedModel":
        return cls.from_dict(json.loads(Path(path).read_text()))


def _to_jsonable(v):
    if isinstance(v, np.ndarray):
        return {"__ndarray__": v.tolist(), "dtype": str(v.dtype), "shape": list(v.shape)}
    if isinstance(v, list):
        return [_to_jsonable(x) for x in v]
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    return v


def _from_jsonable(v):
    if isinstance(v, dict) and "__ndarray__" in v:
        return np.array(v["__ndarray__"], dtype=v["dtype"]).reshape(v["shape"])
    if isinstance(v, list):
        return [_from_jsonable(x) for x in v]
    return v


def sigmoid(t):
    t = np.asarray(t, dtype=float)
    out = np.empty_like(t)
    pos = t >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-t[pos]))
    e = np.exp(t[~pos])
    out[~pos] = e / (1.0 + e)
    return out


def bce(p, y) -> float:
    p = np.clip(p, _EPS, 1 - _EPS)
    return float(-np.mean(y * np.log(p) + (1 - y) * np.log(1 - p)))


def bce_from_logits(t, y) -> float:
    # log(1 + e^t) - y t, stable for large |t|
    return float(np.mean(np.logaddexp(0.0, t) - y * t))


# ----------------------------------------------------------------------------
# logistic regression
# ----------------------------------------------------------------------------

def logreg_loss_grad(w, b, X, y):
    """Mean cross-entropy of ``sigmoid(X w + b)`` against ``y`` and its gradient."""
    t = X @ w + b
    r = sigmoid(t) - y
    n = len(y)
    return bce_from_logits(t, y), X.T @ r / n, float(r.sum() / n)


def _train_logreg(X, y, spec):
    w = np.zeros(X.shape[1])
    b = 0.0
    lr = spec.lr
    prev = np.inf
    it = 0
    for it in range(1, spec.iterations + 1):
        loss, gw, gb = logreg_loss_grad(w, b, X, y)
        if prev - loss < spec.tol:
            break
        prev = loss
        w -= lr * gw
        b -= lr * gb
    return {"w": w, "b": b}, {"iterations": it, "loss": loss}


# ----------------------------------------------------------------------------
# multilayer perceptron
# ----------------------------------------------------------------------------

def mlp_init(sizes, rng):
    """He-uniform hidden weights, Glorot-uniform output layer, zero biases."""
    Ws, bs = [], []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        bound = np.sqrt(6.0 / max(fan_in, 1)) if fan_out != 1 else np.sqrt(6.0 / (fan_in + fan_out))
        Ws.append(rng.uniform(-bound, bound, size=(fan_in, fan_out)))
        bs.append(np.zeros(fan_out))
    return Ws, bs


def mlp_forward(Ws, bs, X):
    acts = [X]
    h = X
    for W, b in zip(Ws[:-1], bs[:-1]):
        h = np.maximum(h @ W + b, 0.0)
        acts.append(h)
    logits = (h @ Ws[-1] + bs[-1])[:, 0]
    return logits, acts


def mlp_loss_grad(Ws, bs, X, y):
    """Cross-entropy loss of the ReLU network and its gradients by backpropagation."""
    logits, acts = mlp_forward(Ws, bs, X)
    n = len(y)
    loss = bce_from_logits(logits, y)
    delta = ((sigmoid(logits) - y) / n)[:, None]
    gWs, gbs = [None] * len(Ws), [None] * len(bs)
    for k in range(len(Ws) - 1, -1, -1):
        gWs[k] = acts[k].T @ delta
        gbs[k] = delta.sum(axis=0)
        if k > 0:
            delta = (delta @ Ws[k].T) * (acts[k] > 0)
    return loss, gWs, gbs


class _Adam:
    def __init__(self, params, lr, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr, self.b1, self.b2, self.eps = lr, beta1, beta2, eps
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]
        self.t = 0

    def step(self, params, grads):
        self.t += 1
        c1 = 1 - self.b1 ** self.t
        c2 = 1 - self.b2 ** self.t
        for p, g, m, v in zip(params, grads, self.m, self.v):
            m *= self.b1
            m += (1 - self.b1) * g
            v *= self.b2
            v += (1 - self.b2) * g * g
            p -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)


def _train_mlp(X, y, spec):
    rng = np.random.default_rng(spec.seed)
    sizes = [X.shape[1], *spec.hidden_layers, 1]
    Ws, bs = mlp_init(sizes, rng)
    params = Ws + bs
    opt = _Adam(params, spec.lr)
    n = len(y)
    bsz = min(spec.batch_size, n)
    best = np.inf
    stall = 0
    epoch = 0
    for epoch in range(1, spec.iterations + 1):
        order = rng.permutation(n)
        total = 0.0
        for start in range(0, n, bsz):
            idx = order[start:start + bsz]
            loss, gWs, gbs = mlp_loss_grad(Ws, bs, X[idx], y[idx])
            opt.step(params, gWs + gbs)
            total += loss * len(idx)
        epoch_loss = total / n
        if epoch_loss > best - spec.tol:
            stall += 1
            if stall >= spec.n_iter_no_change:
                break
        else:
            stall = 0
        best = min(best, epoch_loss)
    return {"W": Ws, "b": bs}, {"iterations": epoch, "loss": float(epoch_loss)}


# ----------------------------------------------------------------------------
# CART decision tree
# ----------------------------------------------------------------------------

def gini(counts_pos, counts_total):
    p = np.divide(counts_pos, counts_total, out=np.zeros_like(counts_pos, dtype=float), where=counts_total > 0)
    return 2.0 * p * (1.0 - p)


def best_split(X, y):
    """Exhaustive Gini split search over midpoints of sorted unique values.

    Returns ``(feature, threshold, weighted_child_impurity)`` or ``None`` when
    no feature has two distinct values. Ties go to the lowest feature index,
    then the lowest threshold. Rows with ``x <= threshold`` go left.
    """
    n = len(y)
    best = None
    for f in range(X.shape[1]):
        order = np.argsort(X[:, f], kind="stable")
        xs = X[order, f]
        ys = y[order]
        cut = np.flatnonzero(xs[1:] > xs[:-1])
        if len(cut) == 0:
            continue
        pos_left = np.cumsum(ys)[cut]
        n_left = (cut + 1).astype(float)
        n_right = n - n_left
        pos_right = ys.sum() - pos_left
        score = (n_left * gini(pos_left, n_left) + n_right * gini(pos_right, n_right)) / n
        k = int(np.argmin(score))
        if best is None or score[k] < best[2] - 1e-15:
            thr = 0.5 * (xs[cut[k]] + xs[cut[k] + 1])
            best = (f, float(thr), float(score[k]))
    return best


def _grow_tree(X, y, max_depth):
    feature, threshold, left, right, value, count = [], [], [], [], [], []

    def add(idx, depth):
        node = len(feature)
        ys = y[idx]
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        value.append(float(ys.mean()))
        count.append(len(idx))
        pure = ys.min() == ys.max()
        if depth >= max_depth or len(idx) < 2 or pure:
            return node
        split = best_split(X[idx], ys)
        if split is None:
            return node
        f, thr, _ = split
        go_left = X[idx, f] <= thr
        feature[node], threshold[node] = f, thr
        left[node] = add(idx[go_left], depth + 1)
        right[node] = add(idx[~go_left], depth + 1)
        return node

    add(np.arange(len(y)), 0)
    return {
        "feature": np.array(feature, dtype=int),
        "threshold": np.array(threshold, dtype=float),
        "left": np.array(left, dtype=int),
        "right": np.array(right, dtype=int),
        "value": np.array(value, dtype=float),
        "count": np.array(count, dtype=int),
    }


def tree_apply(params, X) -> np.ndarray:
    """Leaf node index reached by every row."""
    node = np.zeros(len(X), dtype=int)
    feat, thr, left, right = params["feature"], params["threshold"], params["left"], params["right"]
    active = feat[node] >= 0
    while active.any():
        i = np.flatnonzero(active)
        n = node[i]
        go_left = X[i, feat[n]] <= thr[n]
        node[i] = np.where(go_left, left[n], right[n])
        active = feat[node] >= 0
    return node


def tree_depth(params, node=0) -> int:
    if params["feature"][node] < 0:
        return 0
    return 1 + max(tree_depth(params, params["left"][node]), tree_depth(params, params["right"][node]))


# ----------------------------------------------------------------------------
# public API
# ----------------------------------------------------------------------------

def train(data, spec: TrainSpec = TrainSpec()) -> TrainedModel:
    """Fit a classifier of ``spec.family``. Deterministic given ``spec.seed``.

    ``data`` is an :class:`EncodedDataset` or an ``(X, y)`` pair.
    """
    if isinstance(data, EncodedDataset):
        X, y = data.features, data.labels
    else:
        X, y = data
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=float)
    if len(y) == 0:
        raise ValueError("cannot train on an empty dataset")
    if y.min() < 0 or y.max() > 1:
        raise ValueError("labels must lie in [0, 1]")
    hard = (y >= 0.5).astype(float)
    single = bool(hard.min() == hard.max())
    D = X.shape[1]
    if single:
        warnings.warn("training labels fall into a single class", SingleClassTraining)
        if spec.family == TREE or np.all((y == 0) | (y == 1)):
            return TrainedModel(spec.family, {"constant": float(hard[0])}, D, single_class=True)

    if spec.family == LOGREG:
        params, info = _train_logreg(X, y, spec)
    elif spec.family == MLP:
        params, info = _train_mlp(X, y, spec)
    else:
        params = _grow_tree(X, hard, spec.max_depth)
        info = {"depth": tree_depth(params), "nodes": len(params["feature"])}
    return TrainedModel(spec.family, params, D, single_class=single, info=info)


def predict_scores(model: TrainedModel, X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X.reshape(1, -1) if X.size else np.zeros((0, model.feature_dim))
    if X.shape[1] != model.feature_dim:
        raise DimensionMismatch(f"expected {model.feature_dim} features, got {X.shape[1]}")
    p = model.parameters
    if "constant" in p:
        return np.full(len(X), p["constant"], dtype=float)
    if model.family == LOGREG:
        return sigmoid(X @ p["w"] + p["b"])
    if model.family == MLP:
        return sigmoid(mlp_forward(p["W"], p["b"], X)[0])
    return p["value"][tree_apply(p, X)]


def predict_score(model: TrainedModel, x) -> float:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise DimensionMismatch("predict_score takes a single feature vector")
    return float(predict_scores(model, x[None, :])[0])


def predict_labels(model: TrainedModel, X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.size == 0:
        return np.zeros(0, dtype=int)
    return (predict_scores(model, X) >= 0.5).astype(int)
