import numpy as np
import pytest

from proximix.classifiers import (
    LOGREG,
    MLP,
    TREE,
    DimensionMismatch,
    SingleClassTraining,
    TrainedModel,
    TrainSpec,
    logreg_loss_grad,
    mlp_init,
    mlp_loss_grad,
    predict_labels,
    predict_score,
    predict_scores,
    tree_apply,
    tree_depth,
    train,
)


def blobs(n=200, seed=0):
    rng = np.random.default_rng(seed)
    X = np.vstack([rng.normal(-2, 0.5, (n // 2, 2)), rng.normal(2, 0.5, (n // 2, 2))])
    y = np.r_[np.zeros(n // 2), np.ones(n // 2)]
    return X, y


def xor(n=200, seed=0):
    rng = np.random.default_rng(seed)
    corners = np.tile(np.array([[0, 0], [0, 1], [1, 0], [1, 1]]), (n // 4, 1))
    X = corners + rng.normal(0, 0.1, (n, 2))
    y = (corners[:, 0] ^ corners[:, 1]).astype(float)
    return X, y


def rel_err(a, b):
    return np.max(np.abs(a - b) / np.maximum(np.abs(a) + np.abs(b), 1e-8))


def test_defaults():
    spec = TrainSpec(MLP)
    assert spec.hidden_layers == (128, 128, 128) and spec.iterations == 1500 and spec.seed == 42
    assert TrainSpec(TREE).max_depth == 7
    assert TrainSpec(LOGREG).lr == 0.1
    with pytest.raises(ValueError):
        TrainSpec("svm")


def test_logreg_separable():
    X, y = blobs()
    m = train((X, y), TrainSpec(LOGREG))
    assert np.mean(predict_labels(m, X) == y) >= 0.99


def test_constant_labels():
    X, _ = blobs(40)
    for fam in (LOGREG, TREE, MLP):
        with pytest.warns(SingleClassTraining):
            m = train((X, np.ones(40)), TrainSpec(fam))
        assert m.single_class
        assert np.all(predict_scores(m, X) == 1.0)


def test_xor():
    X, y = xor()
    tree = train((X, y), TrainSpec(TREE, max_depth=7))
    assert np.mean(predict_labels(tree, X) == y) == 1.0
    lr = train((X, y), TrainSpec(LOGREG))
    # a linear model cannot beat chance here; its scores hover at 0.5
    assert np.mean(predict_labels(lr, X) == y) <= 0.6
    assert np.all(np.abs(predict_scores(lr, X) - 0.5) < 0.01)


def test_zero_weight_logreg_is_half():
    m = TrainedModel(LOGREG, {"w": np.zeros(3), "b": 0.0}, 3)
    assert predict_score(m, np.array([4.0, -2.0, 1.0])) == 0.5


def test_pure_leaf_score():
    X = np.array([[0.0], [0.1], [1.0], [1.1]])
    m = train((X, np.array([0, 0, 1, 1.0])), TrainSpec(TREE))
    assert predict_score(m, np.array([1.05])) == 1.0


def test_dimension_mismatch():
    m = TrainedModel(LOGREG, {"w": np.zeros(3), "b": 0.0}, 3)
    with pytest.raises(DimensionMismatch):
        predict_scores(m, np.zeros((2, 4)))


def test_threshold_boundary():
    # logits chosen so the scores straddle 0.5
    logit = np.log(np.array([0.49, 0.5, 0.51]) / (1 - np.array([0.49, 0.5, 0.51])))
    m = TrainedModel(LOGREG, {"w": np.array([1.0]), "b": 0.0}, 1)
    assert predict_labels(m, logit[:, None]).tolist() == [0, 1, 1]


def test_empty_prediction():
    m = TrainedModel(LOGREG, {"w": np.zeros(2), "b": 0.0}, 2)
    assert predict_labels(m, np.zeros((0, 2))).shape == (0,)


@pytest.mark.parametrize("family", [LOGREG, TREE])
def test_labels_are_thresholded_scores(family):
    rng = np.random.default_rng(1)
    X = rng.random((150, 4))
    y = (X[:, 0] + 0.3 * rng.random(150) > 0.6).astype(float)
    m = train((X, y), TrainSpec(family))
    Xt = rng.random((80, 4))
    np.testing.assert_array_equal(predict_labels(m, Xt), (predict_scores(m, Xt) >= 0.5).astype(int))


def _fd_logreg(w, b, X, y, h=1e-6):
    gw = np.zeros_like(w)
    for i in range(len(w)):
        e = np.zeros_like(w)
        e[i] = h
        gw[i] = (logreg_loss_grad(w + e, b, X, y)[0] - logreg_loss_grad(w - e, b, X, y)[0]) / (2 * h)
    gb = (logreg_loss_grad(w, b + h, X, y)[0] - logreg_loss_grad(w, b - h, X, y)[0]) / (2 * h)
    return gw, gb


def test_logreg_gradient_check():
    rng = np.random.default_rng(0)
    for _ in range(5):
        X = rng.random((32, 6))
        y = rng.random(32)  # soft targets
        w, b = rng.normal(size=6), float(rng.normal())
        _, gw, gb = logreg_loss_grad(w, b, X, y)
        fw, fb = _fd_logreg(w, b, X, y)
        assert rel_err(gw, fw) < 1e-5
        assert rel_err(np.array([gb]), np.array([fb])) < 1e-5


def test_mlp_gradient_check():
    rng = np.random.default_rng(1)
    X = rng.random((16, 5))
    y = rng.random(16)
    Ws, bs = mlp_init([5, 7, 6, 1], rng)
    for b in bs:
        b += rng.normal(scale=0.1, size=b.shape)
    _, gWs, gbs = mlp_loss_grad(Ws, bs, X, y)
    h = 1e-6
    for params, grads in ((Ws, gWs), (bs, gbs)):
        for P, G in zip(params, grads):
            fd = np.zeros_like(P)
            for idx in np.ndindex(P.shape):
                old = P[idx]
                P[idx] = old + h
                up = mlp_loss_grad(Ws, bs, X, y)[0]
                P[idx] = old - h
                down = mlp_loss_grad(Ws, bs, X, y)[0]
                P[idx] = old
                fd[idx] = (up - down) / (2 * h)
            assert rel_err(G, fd) < 1e-5


def test_tree_depth_and_leaf_fractions():
    rng = np.random.default_rng(2)
    X = rng.random((300, 3))
    y = (rng.random(300) < X[:, 0]).astype(float)
    for depth in (1, 3, 7):
        m = train((X, y), TrainSpec(TREE, max_depth=depth))
        assert tree_depth(m.parameters) <= depth
        leaves = tree_apply(m.parameters, X)
        for leaf in np.unique(leaves):
            assert m.parameters["value"][leaf] == pytest.approx(y[leaves == leaf].mean(), abs=1e-12)


def test_tree_uses_hard_labels():
    X = np.array([[0.0], [1.0], [2.0], [3.0]])
    m = train((X, np.array([0.2, 0.4, 0.6, 0.9])), TrainSpec(TREE))
    assert predict_scores(m, X).tolist() == [0.0, 0.0, 1.0, 1.0]


def test_tree_tie_break_lowest_feature():
    X = np.array([[0, 0], [0, 1], [1, 0], [1, 1]], dtype=float)
    m = train((X, np.array([0, 1, 1, 0.0])), TrainSpec(TREE))
    assert m.parameters["feature"][0] == 0 and m.parameters["threshold"][0] == 0.5


@pytest.mark.parametrize("family", [LOGREG, TREE, MLP])
def test_deterministic(family):
    X, y = blobs(80, seed=3)
    spec = TrainSpec(family, hidden_layers=(8, 8), max_iterations=50)
    a, b = train((X, y), spec), train((X, y), spec)
    np.testing.assert_array_equal(predict_scores(a, X), predict_scores(b, X))
    assert a.to_dict() == b.to_dict()


def test_soft_target_bias_only():
    X = np.zeros((50, 0))
    with pytest.warns(SingleClassTraining):
        m = train((X, np.full(50, 0.7)), TrainSpec(LOGREG))
    assert "constant" not in m.parameters
    assert predict_scores(m, X)[0] == pytest.approx(0.7, abs=0.01)


def test_mlp_fits_xor():
    X, y = xor(120, seed=4)
    m = train((X, y), TrainSpec(MLP, hidden_layers=(16, 16), max_iterations=400, learning_rate=0.01))
    assert np.mean(predict_labels(m, X) == y) >= 0.95


@pytest.mark.parametrize("family", [LOGREG, TREE, MLP])
def test_serialization_round_trip(tmp_path, family):
    X, y = xor(60, seed=5)
    m = train((X, y), TrainSpec(family, hidden_layers=(4,), max_iterations=20))
    path = tmp_path / "model.json"
    m.save(path)
    back = TrainedModel.load(path)
    np.testing.assert_array_equal(predict_scores(back, X), predict_scores(m, X))
    assert back.family == family and back.feature_dim == 2


def test_rejects_bad_labels():
    with pytest.raises(ValueError):
        train((np.zeros((3, 1)), np.array([0, 1, 2.0])))
    with pytest.raises(ValueError):
        train((np.zeros((0, 1)), np.zeros(0)))
