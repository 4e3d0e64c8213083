"""Supervised screening classifiers.

Two deterministic linear models over title+abstract text:

* tfidf_logreg — tf-idf features, full-batch gradient-descent logistic
  regression (zero init, fixed step, gradient stopping rule).
* hash_linear — word uni+bigrams hashed into buckets, bucket embeddings
  averaged into a document vector, logistic output layer, epoch-ordered
  SGD with a linearly decaying learning rate and a fixed seed.

Everything here is pure math over the inputs; persistence and training-set
assembly live elsewhere. Identical inputs always produce bitwise-identical
weights.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from datetime import datetime

import numpy as np

from litscreen.catalog import utcnow
from litscreen.errors import NumericError, ValidationError

MIN_EXAMPLES_PER_CLASS = 3

_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)

FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3
FNV_MASK = 0xFFFFFFFFFFFFFFFF


def tokenize(text: str) -> list[str]:
    """Lowercase, split on non-alphanumeric runs, drop tokens shorter than 2."""
    return [t for t in _TOKEN_RE.findall(text.lower()) if len(t) >= 2]


@dataclass(frozen=True)
class TrainingProvenance:
    included_count: int
    excluded_count: int
    trained_at: datetime = field(default_factory=utcnow)

    def __post_init__(self):
        if self.included_count < MIN_EXAMPLES_PER_CLASS or self.excluded_count < MIN_EXAMPLES_PER_CLASS:
            raise ValidationError(
                "classifiers require at least three examples of each class",
                {"included": self.included_count, "excluded": self.excluded_count},
            )


@dataclass(frozen=True)
class TrainedClassifier:
    kind: str  # "tfidf_logreg" | "hash_linear"
    config: dict
    weights: np.ndarray
    bias: float
    trained_on: TrainingProvenance
    version: int = 0  # assigned by the store on save

    def __post_init__(self):
        expected = _dimensionality(self.kind, self.config)
        if self.weights.shape != (expected,):
            raise ValidationError(
                f"weights length {self.weights.shape} does not match config dimensionality {expected}"
            )


def _dimensionality(kind: str, config: dict) -> int:
    if kind == "tfidf_logreg":
        return len(config["vocabulary"])
    if kind == "hash_linear":
        return config["buckets"] * config["dim"] + config["dim"]
    raise ValidationError(f"unknown classifier kind {kind!r}")


# -- tf-idf ------------------------------------------------------------


class TfidfVectorizer:
    """Raw term counts scaled by smoothed idf, rows L2-normalized.

    idf(t) = ln((1 + N) / (1 + df(t))) + 1. Out-of-vocabulary tokens are
    ignored at transform time; documents with no known tokens come out as
    zero vectors.
    """

    def __init__(self, vocabulary: dict[str, int] | None = None, idf: np.ndarray | None = None):
        self.vocabulary = vocabulary
        self.idf = idf

    def fit_transform(self, corpus: list[str]) -> np.ndarray:
        if not corpus:
            raise ValidationError("cannot fit a vectorizer on an empty corpus")
        docs = [tokenize(text) for text in corpus]
        df: dict[str, int] = {}
        for tokens in docs:
            for token in set(tokens):
                df[token] = df.get(token, 0) + 1
        self.vocabulary = {token: i for i, token in enumerate(sorted(df))}
        n_docs = len(corpus)
        self.idf = np.array(
            [np.log((1 + n_docs) / (1 + df[t])) + 1.0 for t in sorted(df)], dtype=np.float64
        )
        return self._matrix(docs)

    def transform(self, corpus: list[str]) -> np.ndarray:
        if self.vocabulary is None or self.idf is None:
            raise ValidationError("vectorizer is not fitted")
        return self._matrix([tokenize(text) for text in corpus])

    def _matrix(self, docs: list[list[str]]) -> np.ndarray:
        X = np.zeros((len(docs), len(self.vocabulary)), dtype=np.float64)
        for row, tokens in enumerate(docs):
            for token in tokens:
                col = self.vocabulary.get(token)
                if col is not None:
                    X[row, col] += 1.0
        X *= self.idf
        norms = np.linalg.norm(X, axis=1)
        nonzero = norms > 0
        X[nonzero] /= norms[nonzero, None]
        return X


# -- logistic regression -------------------------------------------------


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def logreg_loss_grad(
    w: np.ndarray, b: float, X: np.ndarray, y: np.ndarray, l2: float
) -> tuple[float, np.ndarray, float]:
    """Mean logistic loss + (l2/2)·||w||^2 and its exact gradient."""
    z = X @ w + b
    loss = float(np.mean(np.logaddexp(0.0, z) - y * z) + 0.5 * l2 * (w @ w))
    residual = _sigmoid(z) - y
    grad_w = X.T @ residual / len(y) + l2 * w
    grad_b = float(residual.mean())
    return loss, grad_w, grad_b


def fit_logreg(
    X: np.ndarray,
    y: np.ndarray,
    *,
    l2: float = 1e-4,
    lr: float = 2.0,
    max_epochs: int = 1000,
    tol: float = 1e-6,
) -> tuple[np.ndarray, float]:
    """Deterministic full-batch gradient descent from zero init.

    Stops when the gradient infinity-norm drops below `tol` or after
    `max_epochs` updates.
    """
    if not np.isfinite(X).all():
        raise NumericError("feature matrix contains non-finite values")
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    w = np.zeros(X.shape[1], dtype=np.float64)
    b = 0.0
    for _ in range(max_epochs):
        _, grad_w, grad_b = logreg_loss_grad(w, b, X, y, l2)
        if max(np.abs(grad_w).max(initial=0.0), abs(grad_b)) < tol:
            break
        w -= lr * grad_w
        b -= lr * grad_b
    return w, b


def train_tfidf_logreg(
    texts: list[str],
    labels: list[int],
    *,
    l2: float = 1e-4,
    lr: float = 2.0,
    max_epochs: int = 1000,
    tol: float = 1e-6,
    trained_at: datetime | None = None,
) -> TrainedClassifier:
    vec = TfidfVectorizer()
    X = vec.fit_transform(texts)
    y = np.asarray(labels, dtype=np.float64)
    w, b = fit_logreg(X, y, l2=l2, lr=lr, max_epochs=max_epochs, tol=tol)
    return TrainedClassifier(
        kind="tfidf_logreg",
        config={
            "vocabulary": vec.vocabulary,
            "idf": vec.idf.tolist(),
            "ngram_orders": [1],
            "l2": l2,
        },
        weights=w,
        bias=b,
        trained_on=TrainingProvenance(
            included_count=int(y.sum()),
            excluded_count=int(len(y) - y.sum()),
            trained_at=trained_at or utcnow(),
        ),
    )


# -- hashed n-gram linear model -------------------------------------------


def fnv1a64(text: str) -> int:
    h = FNV_OFFSET
    for byte in text.encode("utf-8"):
        h = ((h ^ byte) * FNV_PRIME) & FNV_MASK
    return h


def doc_buckets(text: str, buckets: int) -> list[int]:
    """Bucket sequence for a document: word unigrams then bigrams, in order."""
    tokens = tokenize(text)
    grams = tokens + [f"{a} {b}" for a, b in zip(tokens, tokens[1:])]
    return [fnv1a64(g) % buckets for g in grams]


def _doc_vector(bucket_list: list[int], emb: np.ndarray, dim: int) -> np.ndarray:
    if not bucket_list:
        return np.zeros(dim, dtype=np.float64)
    return emb[bucket_list].mean(axis=0)


def hash_loss_grad(
    params: np.ndarray,
    docs: list[list[int]],
    y: np.ndarray,
    buckets: int,
    dim: int,
) -> tuple[float, np.ndarray]:
    """Mean logistic loss of the hashed model over a flat parameter vector.

    Layout: embedding matrix (buckets x dim) row-major, then the output
    vector (dim), then the bias as the final element.
    """
    emb = params[: buckets * dim].reshape(buckets, dim)
    v = params[buckets * dim : buckets * dim + dim]
    b = params[-1]
    grad = np.zeros_like(params)
    grad_emb = grad[: buckets * dim].reshape(buckets, dim)
    grad_v = grad[buckets * dim : buckets * dim + dim]
    n = len(docs)
    loss = 0.0
    for doc, label in zip(docs, y):
        h = _doc_vector(doc, emb, dim)
        z = float(v @ h + b)
        loss += float(np.logaddexp(0.0, z) - label * z)
        residual = _sigmoid(np.array([z]))[0] - label
        grad_v += residual * h / n
        grad[-1] += residual / n
        if doc:
            contribution = residual * v / (len(doc) * n)
            for bucket in doc:
                grad_emb[bucket] += contribution
    return loss / n, grad


def train_hash_linear(
    texts: list[str],
    labels: list[int],
    *,
    buckets: int = 2**18,
    dim: int = 16,
    lr: float = 0.1,
    epochs: int = 25,
    seed: int = 13,
    trained_at: datetime | None = None,
) -> TrainedClassifier:
    """Epoch-ordered SGD, linearly decaying learning rate, fixed seed."""
    y = np.asarray(labels, dtype=np.float64)
    if not np.isfinite(y).all():
        raise NumericError("labels contain non-finite values")
    docs = [doc_buckets(t, buckets) for t in texts]
    rng = np.random.default_rng(seed)
    emb = rng.uniform(-1.0 / dim, 1.0 / dim, size=(buckets, dim))
    v = np.zeros(dim, dtype=np.float64)
    b = 0.0
    total_steps = epochs * len(docs)
    step = 0
    for _ in range(epochs):
        for doc, label in zip(docs, y):
            lr_t = lr * (1.0 - step / total_steps)
            step += 1
            h = _doc_vector(doc, emb, dim)
            z = float(v @ h + b)
            residual = _sigmoid(np.array([z]))[0] - label
            grad_v = residual * h
            grad_b = residual
            if doc:
                grad_h = residual * v / len(doc)
                for bucket in doc:
                    emb[bucket] -= lr_t * grad_h
            v -= lr_t * grad_v
            b -= lr_t * grad_b
    params = np.concatenate([emb.ravel(), v])
    return TrainedClassifier(
        kind="hash_linear",
        config={
            "buckets": buckets,
            "dim": dim,
            "ngram_orders": [1, 2],
            "lr": lr,
            "epochs": epochs,
            "seed": seed,
        },
        weights=params,
        bias=b,
        trained_on=TrainingProvenance(
            included_count=int(y.sum()),
            excluded_count=int(len(y) - y.sum()),
            trained_at=trained_at or utcnow(),
        ),
    )


# -- prediction -------------------------------------------------------------


def predict_proba(model: TrainedClassifier, texts: list[str]) -> np.ndarray:
    """Deterministic inclusion probabilities; zero-feature docs get sigmoid(bias)."""
    if model.kind == "tfidf_logreg":
        vec = TfidfVectorizer(
            vocabulary=model.config["vocabulary"],
            idf=np.asarray(model.config["idf"], dtype=np.float64),
        )
        X = vec.transform(texts)
        return _sigmoid(X @ model.weights + model.bias)
    if model.kind == "hash_linear":
        buckets, dim = model.config["buckets"], model.config["dim"]
        emb = model.weights[: buckets * dim].reshape(buckets, dim)
        v = model.weights[buckets * dim :]
        z = np.array(
            [v @ _doc_vector(doc_buckets(t, buckets), emb, dim) + model.bias for t in texts],
            dtype=np.float64,
        )
        return _sigmoid(z)
    raise ValidationError(f"unknown classifier kind {model.kind!r}")
