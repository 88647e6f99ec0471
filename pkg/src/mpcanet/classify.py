"""Deterministic classifiers for pooled feature vectors.

Ridge one-vs-rest is the default: closed-form regularized least squares on
+/-1 targets with an unpenalized intercept (handled by centering), solved on
the Gram side whenever there are fewer samples than features. A 1-nearest
neighbor model exists for sanity checks, and regularized Fisher LDA backs
the feature-sweep baseline.
"""

from dataclasses import dataclass

import numpy as np

from .eigen import jacobi_eigh


@dataclass
class LinearModel:
    class_labels: list
    weights: np.ndarray  # (classes, features)
    bias: np.ndarray  # (classes,)


@dataclass
class NearestNeighborModel:
    class_labels: list
    features: np.ndarray  # (samples, features)
    labels: np.ndarray  # (samples,) class indices


@dataclass
class LdaModel:
    class_labels: list
    projection: np.ndarray  # (features, directions)
    class_means: np.ndarray  # (classes, directions)


def _check_features(features, labels):
    x = np.asarray(features, dtype=np.float64)
    y = np.asarray(labels, dtype=np.int64)
    if x.ndim != 2:
        raise ValueError("features must be a (samples, dim) matrix")
    if y.shape != (x.shape[0],):
        raise ValueError("one label per sample required")
    if y.min() < 0:
        raise ValueError("labels must be nonnegative class indices")
    return x, y


def _resolve_labels(class_labels, y):
    if class_labels is None:
        return [int(c) for c in range(int(y.max()) + 1)]
    if int(y.max()) >= len(class_labels):
        raise ValueError("label index exceeds class label list")
    return list(class_labels)


def fit_ridge_ovr(features, labels, ridge_lambda: float, class_labels=None) -> LinearModel:
    """One-vs-rest ridge regression on +/-1 targets, closed form.

    The intercept is left unregularized by centering features and targets;
    the normal equations are solved on the Gram side when samples < features.
    """
    if ridge_lambda <= 0:
        raise ValueError("ridge lambda must be > 0")
    x, y = _check_features(features, labels)
    class_labels = _resolve_labels(class_labels, y)
    n, d = x.shape
    c = len(class_labels)

    targets = -np.ones((n, c))
    targets[np.arange(n), y] = 1.0

    x_mean = x.mean(axis=0)
    t_mean = targets.mean(axis=0)
    xc = x - x_mean
    tc = targets - t_mean

    if n < d:
        gram = xc @ xc.T
        alpha = np.linalg.solve(gram + ridge_lambda * np.eye(n), tc)
        w = xc.T @ alpha
    else:
        gram = xc.T @ xc
        w = np.linalg.solve(gram + ridge_lambda * np.eye(d), xc.T @ tc)
    bias = t_mean - x_mean @ w
    return LinearModel(class_labels=class_labels, weights=w.T, bias=bias)


def fit_nearest_neighbor(features, labels, class_labels=None) -> NearestNeighborModel:
    x, y = _check_features(features, labels)
    return NearestNeighborModel(
        class_labels=_resolve_labels(class_labels, y), features=x.copy(), labels=y.copy()
    )


def fit_lda(features, labels, directions: int, class_labels=None) -> LdaModel:
    """Regularized Fisher discriminant with nearest-class-mean classification.

    The within-class scatter gets +eps*I with eps = 1e-6 * trace/dim before
    the generalized eigenproblem is reduced by Cholesky and solved with the
    Jacobi routine. Every class needs at least two samples.
    """
    x, y = _check_features(features, labels)
    class_labels = _resolve_labels(class_labels, y)
    n, d = x.shape
    c = len(class_labels)
    if not 1 <= directions <= min(c - 1, d):
        raise ValueError(
            f"directions must be in [1, min(classes-1, dim)] = [1, {min(c - 1, d)}]"
        )

    counts = np.bincount(y, minlength=c)
    if counts.min() < 2:
        bad = class_labels[int(np.argmin(counts))]
        raise ValueError(f"class {bad!r} has fewer than 2 samples")

    global_mean = x.mean(axis=0)
    within = np.zeros((d, d))
    between = np.zeros((d, d))
    means = np.zeros((c, d))
    for k in range(c):
        block = x[y == k]
        means[k] = block.mean(axis=0)
        dev = block - means[k]
        within += dev.T @ dev
        gap = (means[k] - global_mean)[:, None]
        between += counts[k] * (gap @ gap.T)

    eps = 1e-6 * np.trace(within) / d
    if eps <= 0.0:
        eps = 1e-12
    within += eps * np.eye(d)

    chol = np.linalg.cholesky(within)
    half = np.linalg.solve(chol, between)
    reduced = np.linalg.solve(chol, half.T).T
    _, vectors = jacobi_eigh((reduced + reduced.T) / 2.0)
    projection = np.linalg.solve(chol.T, vectors[:, :directions])
    return LdaModel(
        class_labels=class_labels,
        projection=projection,
        class_means=means @ projection,
    )


def predict(model, features) -> np.ndarray:
    """Class indices for a (samples, dim) matrix; ties break by class order."""
    x = np.asarray(features, dtype=np.float64)
    single = x.ndim == 1
    if single:
        x = x[None, :]
    if isinstance(model, LinearModel):
        scores = x @ model.weights.T + model.bias
        out = np.argmax(scores, axis=1)
    elif isinstance(model, NearestNeighborModel):
        d2 = (
            np.sum(x * x, axis=1)[:, None]
            - 2.0 * (x @ model.features.T)
            + np.sum(model.features * model.features, axis=1)[None, :]
        )
        out = model.labels[np.argmin(d2, axis=1)]
    elif isinstance(model, LdaModel):
        proj = x @ model.projection
        d2 = np.sum(
            (proj[:, None, :] - model.class_means[None, :, :]) ** 2, axis=2
        )
        out = np.argmin(d2, axis=1)
    else:
        raise TypeError(f"unsupported model type {type(model).__name__}")
    out = out.astype(np.int64)
    return int(out[0]) if single else out


def evaluate(predictions, labels, num_classes: int | None = None):
    """Accuracy plus a confusion matrix with rows true, columns predicted."""
    pred = np.asarray(predictions, dtype=np.int64)
    true = np.asarray(labels, dtype=np.int64)
    if pred.shape != true.shape or pred.ndim != 1:
        raise ValueError("predictions and labels must be equal-length vectors")
    if pred.size == 0:
        raise ValueError("nothing to evaluate")
    if num_classes is None:
        num_classes = int(max(pred.max(), true.max())) + 1
    confusion = np.zeros((num_classes, num_classes), dtype=np.int64)
    np.add.at(confusion, (true, pred), 1)
    accuracy = float(np.trace(confusion)) / float(pred.size)
    return accuracy, confusion
