import math

import numpy as np
import pytest

from labelloop.classifier import (
    LinearHead,
    TrainConfig,
    evaluate,
    gradient_descent,
    loss_and_grad,
    metrics_from_confusion,
    predict_logits,
    softmax,
    train_head,
)
from labelloop.corpus import Document


def zero_head(k: int, d: int, labels=None) -> LinearHead:
    labels = labels or [f"c{i}" for i in range(k)]
    return LinearHead(weights=np.zeros((k, d)), bias=np.zeros(k), label_order=labels)


def finite_difference_grads(head, x, y, l2, h=1e-5):
    """Central-difference gradient oracle, independent of the analytic path."""

    def loss_at(weights, bias):
        probe = LinearHead(weights=weights, bias=bias, label_order=head.label_order)
        return loss_and_grad(probe, x, y, l2)[0]

    grad_w = np.zeros_like(head.weights)
    for i in range(head.weights.shape[0]):
        for j in range(head.weights.shape[1]):
            up = head.weights.copy()
            down = head.weights.copy()
            up[i, j] += h
            down[i, j] -= h
            grad_w[i, j] = (loss_at(up, head.bias) - loss_at(down, head.bias)) / (2 * h)
    grad_b = np.zeros_like(head.bias)
    for i in range(head.bias.shape[0]):
        up = head.bias.copy()
        down = head.bias.copy()
        up[i] += h
        down[i] -= h
        grad_b[i] = (loss_at(head.weights, up) - loss_at(head.weights, down)) / (2 * h)
    return grad_w, grad_b


# --- softmax ------------------------------------------------------------------


def test_softmax_uniform_on_equal_logits():
    assert np.allclose(softmax(np.zeros(3)), np.full(3, 1 / 3), atol=1e-15)


def test_softmax_shift_invariance():
    logits = np.array([0.3, -1.2, 2.5, 0.0])
    assert np.allclose(softmax(logits), softmax(logits + 7.0), atol=1e-12)


def test_softmax_extreme_logits_no_overflow():
    probs = softmax(np.array([1000.0, 0.0]))
    assert np.all(np.isfinite(probs))
    assert probs[0] == pytest.approx(1.0)
    assert probs[1] == pytest.approx(0.0, abs=1e-300)


def test_softmax_sums_to_one_and_positive():
    rng = np.random.default_rng(0)
    for _ in range(50):
        probs = softmax(rng.normal(scale=5.0, size=rng.integers(2, 10)))
        assert abs(probs.sum() - 1.0) <= 1e-12
        assert np.all(probs > 0.0)


def test_softmax_rejects_nonfinite():
    with pytest.raises(ValueError):
        softmax(np.array([np.nan, 0.0]))


# --- loss and gradients ---------------------------------------------------------


def test_zero_head_loss_is_log_k():
    x = np.random.default_rng(1).normal(size=(7, 4))
    y = np.array([0, 1, 2, 0, 1, 2, 0])
    loss, _, _ = loss_and_grad(zero_head(3, 4), x, y, l2_lambda=0.0)
    assert loss == pytest.approx(math.log(3), abs=1e-12)


def test_regularizer_contributes_zero_at_zero_weights():
    x = np.random.default_rng(2).normal(size=(5, 3))
    y = np.array([0, 1, 0, 1, 0])
    loss_plain, _, _ = loss_and_grad(zero_head(2, 3), x, y, l2_lambda=0.0)
    loss_l2, _, _ = loss_and_grad(zero_head(2, 3), x, y, l2_lambda=10.0)
    assert loss_plain == loss_l2


def test_gradients_match_finite_differences():
    rng = np.random.default_rng(3)
    for trial in range(20):
        n, d, k = int(rng.integers(2, 8)), int(rng.integers(2, 6)), int(rng.integers(2, 5))
        head = LinearHead(
            weights=rng.normal(scale=0.5, size=(k, d)),
            bias=rng.normal(scale=0.5, size=k),
            label_order=[f"c{i}" for i in range(k)],
        )
        x = rng.normal(size=(n, d))
        y = rng.integers(0, k, size=n)
        l2 = float(rng.choice([0.0, 1e-3, 0.1]))
        _, grad_w, grad_b = loss_and_grad(head, x, y, l2)
        fd_w, fd_b = finite_difference_grads(head, x, y, l2)
        denom_w = max(np.abs(fd_w).max(), 1e-8)
        denom_b = max(np.abs(fd_b).max(), 1e-8)
        assert np.abs(grad_w - fd_w).max() / denom_w <= 1e-6, f"trial {trial}"
        assert np.abs(grad_b - fd_b).max() / denom_b <= 1e-6, f"trial {trial}"


def test_loss_and_grad_rejects_dimension_mismatch():
    head = zero_head(3, 4)
    with pytest.raises(ValueError):
        loss_and_grad(head, np.zeros((2, 5)), np.array([0, 1]), 0.0)
    with pytest.raises(ValueError):
        loss_and_grad(head, np.zeros((2, 4)), np.array([0, 3]), 0.0)


# --- training -------------------------------------------------------------------


def test_training_fits_separable_toy():
    x = np.array([[1.0, 0.0], [2.0, 0.0], [-1.0, 0.0], [-2.0, 0.0]])
    y = np.array([0, 0, 1, 1])
    head = train_head(x, y, ["pos", "neg"], TrainConfig(), dim=2)
    preds = np.argmax(predict_logits(head, x), axis=1)
    assert np.array_equal(preds, y)


def test_training_is_deterministic():
    rng = np.random.default_rng(4)
    x = rng.normal(size=(30, 5))
    y = rng.integers(0, 3, size=30)
    first = train_head(x, y, ["a", "b", "c"], TrainConfig(), dim=5)
    second = train_head(x, y, ["a", "b", "c"], TrainConfig(), dim=5)
    assert np.array_equal(first.weights, second.weights)
    assert np.array_equal(first.bias, second.bias)


def test_training_loss_log_non_increasing_and_bounded():
    rng = np.random.default_rng(5)
    x = rng.normal(size=(40, 6))
    y = rng.integers(0, 4, size=40)
    trace = gradient_descent(x, y, ["a", "b", "c", "d"], TrainConfig(), dim=6)
    losses = np.array(trace.losses)
    assert losses[0] == pytest.approx(math.log(4), abs=1e-12)
    assert np.all(np.diff(losses) <= 0.0)
    assert losses[-1] <= math.log(4)


def test_training_survives_aggressive_learning_rate():
    # Step halving must keep the loss monotone even with an absurd base rate.
    rng = np.random.default_rng(6)
    x = rng.normal(scale=3.0, size=(25, 4))
    y = rng.integers(0, 3, size=25)
    config = TrainConfig(learning_rate=1e6, max_epochs=50)
    trace = gradient_descent(x, y, ["a", "b", "c"], config, dim=4)
    losses = np.array(trace.losses)
    assert np.all(np.diff(losses) <= 0.0)
    assert np.all(np.isfinite(losses))


def test_training_rejects_empty_set():
    with pytest.raises(ValueError):
        train_head(np.zeros((0, 3)), np.zeros(0, dtype=int), ["a", "b"], TrainConfig(), dim=3)


def test_train_config_validation():
    with pytest.raises(ValueError):
        TrainConfig(learning_rate=0.0)
    with pytest.raises(ValueError):
        TrainConfig(max_epochs=0)
    with pytest.raises(ValueError):
        TrainConfig(loss_tolerance=0.0)
    with pytest.raises(ValueError):
        TrainConfig(l2_lambda=-1.0)


# --- prediction -----------------------------------------------------------------


def test_predict_zero_head_gives_zero_logits():
    logits = predict_logits(zero_head(3, 4), np.ones((5, 4)))
    assert logits.shape == (5, 3)
    assert np.array_equal(logits, np.zeros((5, 3)))


def test_predict_identity_head_returns_input():
    head = LinearHead(weights=np.eye(3), bias=np.zeros(3), label_order=["a", "b", "c"])
    e2 = np.zeros((1, 3))
    e2[0, 1] = 1.0
    assert np.array_equal(predict_logits(head, e2), e2)


def test_predict_empty_matrix_ok():
    logits = predict_logits(zero_head(3, 4), np.zeros((0, 4)))
    assert logits.shape == (0, 3)


def test_argmax_prediction_shift_invariant():
    rng = np.random.default_rng(7)
    head = LinearHead(
        weights=rng.normal(size=(3, 4)), bias=rng.normal(size=3), label_order=["a", "b", "c"]
    )
    x = rng.normal(size=(20, 4))
    logits = predict_logits(head, x)
    assert np.array_equal(np.argmax(logits, axis=1), np.argmax(logits + 123.0, axis=1))


# --- evaluation -----------------------------------------------------------------


def doc(i, label, vec):
    return Document(id=f"d{i}", text="", embedding=np.asarray(vec, dtype=float), gold_label=label)


def test_evaluate_perfect_predictions():
    head = LinearHead(weights=np.eye(2), bias=np.zeros(2), label_order=["A", "B"])
    docs = [doc(0, "A", [1, 0]), doc(1, "B", [0, 1])]
    metrics = evaluate(head, docs)
    assert metrics.macro_f1 == 1.0
    assert metrics.accuracy == 1.0


def test_evaluate_hand_computed_f1():
    # gold [A,A,B,B], predicted [A,B,B,B]: F1(A)=2/3, F1(B)=4/5, macro=11/15.
    head = LinearHead(weights=np.eye(2) * 10, bias=np.zeros(2), label_order=["A", "B"])
    docs = [
        doc(0, "A", [1, 0]),  # predicted A
        doc(1, "A", [0, 1]),  # predicted B
        doc(2, "B", [0, 1]),  # predicted B
        doc(3, "B", [0, 1]),  # predicted B
    ]
    metrics = evaluate(head, docs)
    assert metrics.per_class["A"].f1 == pytest.approx(2 / 3)
    assert metrics.per_class["B"].f1 == pytest.approx(4 / 5)
    assert metrics.macro_f1 == pytest.approx(11 / 15)
    assert metrics.confusion.tolist() == [[1, 1], [0, 2]]


def test_evaluate_absent_class_scores_zero_but_is_averaged():
    head = LinearHead(weights=np.eye(3) * 10, bias=np.zeros(3), label_order=["A", "B", "C"])
    docs = [doc(0, "A", [1, 0, 0]), doc(1, "B", [0, 1, 0])]
    metrics = evaluate(head, docs)
    assert metrics.per_class["C"].f1 == 0.0
    assert metrics.macro_f1 == pytest.approx((1.0 + 1.0 + 0.0) / 3)


def test_evaluate_tie_breaks_to_lowest_label_index():
    head = zero_head(3, 2, labels=["first", "second", "third"])  # all logits equal
    metrics = evaluate(head, [doc(0, "first", [1, 1])])
    assert metrics.per_class["first"].recall == 1.0  # predicted index 0


def test_evaluate_requires_gold_and_embedding():
    head = zero_head(2, 2, labels=["A", "B"])
    with pytest.raises(ValueError):
        evaluate(head, [])
    with pytest.raises(ValueError):
        evaluate(head, [Document(id="x", text="", embedding=np.zeros(2))])
    with pytest.raises(ValueError):
        evaluate(head, [Document(id="x", text="", gold_label="A")])


def test_macro_f1_equals_mean_of_confusion_recomputation():
    rng = np.random.default_rng(8)
    labels = ["a", "b", "c"]
    gold = rng.integers(0, 3, size=60)
    preds = rng.integers(0, 3, size=60)
    confusion = np.zeros((3, 3), dtype=np.int64)
    for g, p in zip(gold, preds):
        confusion[g, p] += 1
    metrics = metrics_from_confusion(confusion, labels)
    assert metrics.macro_f1 == pytest.approx(
        np.mean([metrics.per_class[lb].f1 for lb in labels]), abs=0
    )
    assert int(metrics.confusion.sum()) == 60
