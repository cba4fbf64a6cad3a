"""Multiclass linear head over document embeddings.

The classifier is softmax regression: logits = W x + b with W of shape
(K, D). Training minimizes mean cross-entropy plus an L2 penalty on the
weights (bias unregularized):

    J(W, b) = -(1/N) sum_n log p(y_n | x_n) + (l2/2) * ||W||_F^2

by full-batch gradient descent from zero initialization. A step that would
increase the loss is retried with a halved learning rate (up to 30
halvings); the learning rate resets at the start of every epoch. The
accepted-loss sequence is therefore non-increasing, and with l2 > 0 the
objective is strictly convex, so training is fully deterministic.
"""

from dataclasses import dataclass, field

import numpy as np

MAX_STEP_HALVINGS = 30


@dataclass
class TrainConfig:
    """Hyperparameters for head training."""

    learning_rate: float = 0.5
    max_epochs: int = 500
    loss_tolerance: float = 1e-7
    l2_lambda: float = 1e-3

    def __post_init__(self) -> None:
        if self.learning_rate <= 0:
            raise ValueError(f"learning_rate must be positive, got {self.learning_rate}")
        if self.max_epochs < 1:
            raise ValueError(f"max_epochs must be positive, got {self.max_epochs}")
        if self.loss_tolerance <= 0:
            raise ValueError(f"loss_tolerance must be positive, got {self.loss_tolerance}")
        if self.l2_lambda < 0:
            raise ValueError(f"l2_lambda must be non-negative, got {self.l2_lambda}")


@dataclass(eq=False)
class LinearHead:
    """Trained weights (K, D), bias (K,), and the label order of the rows."""

    weights: np.ndarray
    bias: np.ndarray
    label_order: list[str]

    def __post_init__(self) -> None:
        self.weights = np.asarray(self.weights, dtype=np.float64)
        self.bias = np.asarray(self.bias, dtype=np.float64)
        k = len(self.label_order)
        if k < 2:
            raise ValueError(f"need at least 2 classes, got {k}")
        if self.weights.ndim != 2 or self.weights.shape[0] != k:
            raise ValueError(f"weights shape {self.weights.shape} does not match {k} labels")
        if self.bias.shape != (k,):
            raise ValueError(f"bias shape {self.bias.shape} does not match {k} labels")
        if not (np.all(np.isfinite(self.weights)) and np.all(np.isfinite(self.bias))):
            raise ValueError("head parameters must be finite")

    @property
    def n_classes(self) -> int:
        return len(self.label_order)

    @property
    def dim(self) -> int:
        return int(self.weights.shape[1])


@dataclass
class ClassScores:
    precision: float
    recall: float
    f1: float


@dataclass(eq=False)
class Metrics:
    """Evaluation result; confusion[i, j] counts gold class i predicted as j."""

    macro_f1: float
    accuracy: float
    per_class: dict[str, ClassScores]
    confusion: np.ndarray


@dataclass(eq=False)
class TrainTrace:
    """A trained head plus the accepted loss recorded at each epoch."""

    head: LinearHead
    losses: list[float] = field(default_factory=list)


def softmax(logits: np.ndarray) -> np.ndarray:
    """Shift-stable softmax of a logit vector; output sums to 1."""
    z = np.asarray(logits, dtype=np.float64)
    if not np.all(np.isfinite(z)):
        raise ValueError("logits must be finite")
    z = z - z.max()
    e = np.exp(z)
    return e / e.sum()


def _row_log_softmax(z: np.ndarray) -> np.ndarray:
    shifted = z - z.max(axis=1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))


def loss_and_grad(
    head: LinearHead, x: np.ndarray, y: np.ndarray, l2_lambda: float
) -> tuple[float, np.ndarray, np.ndarray]:
    """Regularized cross-entropy and its exact analytic gradients.

    x is (N, D), y holds label indices in [0, K). Returns (loss, grad_w,
    grad_b) where loss = mean cross-entropy + (l2/2) * ||W||_F^2.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    n = x.shape[0]
    if n < 1:
        raise ValueError("need at least one example")
    if x.ndim != 2 or x.shape[1] != head.dim:
        raise ValueError(f"feature matrix shape {x.shape} does not match head dim {head.dim}")
    if y.shape != (n,) or y.min() < 0 or y.max() >= head.n_classes:
        raise ValueError("labels must be indices in [0, K) with one entry per row of x")

    logits = x @ head.weights.T + head.bias
    log_probs = _row_log_softmax(logits)
    loss = -float(log_probs[np.arange(n), y].mean())
    loss += 0.5 * l2_lambda * float((head.weights * head.weights).sum())

    grad_logits = np.exp(log_probs)
    grad_logits[np.arange(n), y] -= 1.0
    grad_logits /= n
    grad_w = grad_logits.T @ x + l2_lambda * head.weights
    grad_b = grad_logits.sum(axis=0)
    return loss, grad_w, grad_b


def gradient_descent(
    x: np.ndarray,
    y: np.ndarray,
    label_order: list[str],
    config: TrainConfig,
    dim: int,
) -> TrainTrace:
    """Full-batch gradient descent from zero init; returns head and loss log.

    losses[0] is the zero-init loss; each later entry is the accepted loss
    of one epoch, so the sequence is non-increasing by construction. Stops
    at max_epochs, when the relative loss decrease falls below
    loss_tolerance, or when no step up to 30 halvings can avoid increasing
    the loss.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if x.shape[0] < 1:
        raise ValueError("empty training set")
    if x.ndim != 2 or x.shape[1] != dim:
        raise ValueError(f"feature matrix shape {x.shape} does not match dim {dim}")

    head = LinearHead(
        weights=np.zeros((len(label_order), dim)),
        bias=np.zeros(len(label_order)),
        label_order=list(label_order),
    )
    loss, grad_w, grad_b = loss_and_grad(head, x, y, config.l2_lambda)
    losses = [loss]

    for _ in range(config.max_epochs):
        lr = config.learning_rate
        accepted = False
        for _attempt in range(MAX_STEP_HALVINGS + 1):
            cand = LinearHead(
                weights=head.weights - lr * grad_w,
                bias=head.bias - lr * grad_b,
                label_order=head.label_order,
            )
            new_loss, new_gw, new_gb = loss_and_grad(cand, x, y, config.l2_lambda)
            if np.isfinite(new_loss) and new_loss <= loss:
                accepted = True
                break
            lr *= 0.5
        if not accepted:
            break
        rel_decrease = (loss - new_loss) / max(abs(loss), 1e-300)
        head, loss, grad_w, grad_b = cand, new_loss, new_gw, new_gb
        losses.append(loss)
        if rel_decrease < config.loss_tolerance:
            break

    if not np.isfinite(loss):
        raise ArithmeticError("training diverged to a non-finite loss")
    return TrainTrace(head=head, losses=losses)


def train_head(
    x: np.ndarray,
    y: np.ndarray,
    label_order: list[str],
    config: TrainConfig,
    dim: int,
) -> LinearHead:
    """Train the linear head; see gradient_descent for the protocol."""
    return gradient_descent(x, y, label_order, config, dim).head


def predict_logits(head: LinearHead, x: np.ndarray) -> np.ndarray:
    """Logit matrix (N, K) for a feature matrix (N, D); N may be zero."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or (x.shape[0] > 0 and x.shape[1] != head.dim):
        raise ValueError(f"feature matrix shape {x.shape} does not match head dim {head.dim}")
    if x.shape[0] == 0:
        return np.zeros((0, head.n_classes))
    return x @ head.weights.T + head.bias


def evaluate(head: LinearHead, docs: list) -> Metrics:
    """Evaluate the head on documents that carry gold labels and embeddings.

    Prediction is the argmax logit with ties broken by the lowest label
    index. Per-class precision/recall/F1 use the 0-for-0/0 convention, and
    macro F1 is their unweighted mean over head.label_order.
    """
    if not docs:
        raise ValueError("empty test set")
    index = {label: i for i, label in enumerate(head.label_order)}
    x_rows = []
    gold = []
    for doc in docs:
        if doc.embedding is None:
            raise ValueError(f"document {doc.id} has no embedding")
        if doc.gold_label is None:
            raise ValueError(f"document {doc.id} has no gold label")
        if doc.gold_label not in index:
            raise ValueError(f"gold label {doc.gold_label!r} is not in the head's label order")
        x_rows.append(doc.embedding)
        gold.append(index[doc.gold_label])

    logits = predict_logits(head, np.stack(x_rows))
    preds = np.argmax(logits, axis=1)  # first max = lowest label index
    return metrics_from_predictions(np.asarray(gold), preds, head.label_order)


def metrics_from_predictions(
    gold: np.ndarray, preds: np.ndarray, label_order: list[str]
) -> Metrics:
    """Build Metrics from gold/predicted index arrays."""
    k = len(label_order)
    confusion = np.zeros((k, k), dtype=np.int64)
    for g, p in zip(gold, preds):
        confusion[g, p] += 1
    return metrics_from_confusion(confusion, label_order)


def metrics_from_confusion(confusion: np.ndarray, label_order: list[str]) -> Metrics:
    """Derive accuracy, per-class scores and macro F1 from a confusion matrix."""
    confusion = np.asarray(confusion, dtype=np.int64)
    total = int(confusion.sum())
    if total < 1:
        raise ValueError("confusion matrix is empty")
    per_class: dict[str, ClassScores] = {}
    f1s = []
    for i, label in enumerate(label_order):
        tp = int(confusion[i, i])
        fp = int(confusion[:, i].sum()) - tp
        fn = int(confusion[i, :].sum()) - tp
        precision = tp / (tp + fp) if tp + fp > 0 else 0.0
        recall = tp / (tp + fn) if tp + fn > 0 else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
        per_class[label] = ClassScores(precision=precision, recall=recall, f1=f1)
        f1s.append(f1)
    return Metrics(
        macro_f1=float(np.mean(f1s)),
        accuracy=float(np.trace(confusion)) / total,
        per_class=per_class,
        confusion=confusion,
    )
