"""Linear least-squares readout and the rotating k-fold protocol.

The classifier is a single weight matrix trained on time-averaged reservoir
rates against K-scaled one-hot targets via ridge-stabilized normal equations,
then hard-clipped to +/- w_lim. Classification is argmax of the class scores
with deterministic lowest-index tie-breaking.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import seeding

__all__ = [
    "ReadoutConfig",
    "ReadoutWeights",
    "FoldResult",
    "SingularSystemError",
    "assemble_responses",
    "one_hot_targets",
    "train_readout",
    "classify",
    "kfold_evaluate",
]


class SingularSystemError(np.linalg.LinAlgError):
    """Normal equations are rank-deficient and no ridge was requested."""


@dataclass(frozen=True)
class ReadoutConfig:
    k_scale: float = 1000.0
    w_lim: float = 8.0
    # Ridge is scaled by the mean diagonal of R R^T at solve time. The default
    # matters: with hard weight clipping, an effectively unregularized solve
    # rails every weight at +/- w_lim with noise-dominated signs.
    ridge: float = 0.25
    n_classes: int = 10

    def __post_init__(self):
        if self.k_scale <= 0:
            raise ValueError("K must be positive")
        if self.w_lim <= 0:
            raise ValueError("w_lim must be positive")
        if self.ridge < 0:
            raise ValueError("ridge must be non-negative")

    def to_dict(self) -> dict:
        return {
            "k_scale": self.k_scale,
            "w_lim": self.w_lim,
            "ridge": self.ridge,
            "n_classes": self.n_classes,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ReadoutConfig":
        unknown = set(d) - {"k_scale", "w_lim", "ridge", "n_classes"}
        if unknown:
            raise ValueError(f"unknown readout keys: {sorted(unknown)}")
        return cls(**d)


@dataclass(frozen=True)
class ReadoutWeights:
    matrix: np.ndarray  # (n_classes, n_neurons), every entry in [-w_lim, w_lim]
    config: ReadoutConfig

    def __post_init__(self):
        self.matrix.setflags(write=False)


@dataclass(frozen=True)
class FoldResult:
    accuracies: np.ndarray  # per fold
    folds: tuple[np.ndarray, ...]  # test indices per fold
    confusion: np.ndarray  # (n_classes, n_classes), rows = true class

    @property
    def mean_accuracy(self) -> float:
        return float(np.mean(self.accuracies))

    @property
    def std_accuracy(self) -> float:
        return float(np.std(self.accuracies))

    @property
    def error(self) -> float:
        return 1.0 - self.mean_accuracy


def assemble_responses(records) -> np.ndarray:
    """Stack per-sample rate vectors into the (n_neurons, n_samples) response matrix."""
    records = list(records)
    if not records:
        raise ValueError("need at least one record")
    return np.column_stack([r.rates for r in records])


def one_hot_targets(labels, n_classes: int) -> np.ndarray:
    labels = np.asarray(labels, dtype=np.int64)
    if labels.min() < 0 or labels.max() >= n_classes:
        raise ValueError("label outside [0, n_classes)")
    y = np.zeros((n_classes, len(labels)))
    y[labels, np.arange(len(labels))] = 1.0
    return y


def train_readout(responses: np.ndarray, labels, config: ReadoutConfig) -> ReadoutWeights:
    """Solve W = K y_T R^T (R R^T + ridge I)^-1, then clip to +/- w_lim.

    The ridge is scaled by the mean diagonal of R R^T so quiescent-neuron rows
    cannot make the system singular regardless of the rate units in use.
    """
    r = np.asarray(responses, dtype=np.float64)
    y = one_hot_targets(labels, config.n_classes)
    gram = r @ r.T
    trace = np.trace(gram)
    ridge_eff = config.ridge * (trace / len(gram)) if trace > 0 else config.ridge
    if config.ridge == 0 and np.linalg.matrix_rank(gram) < len(gram):
        raise SingularSystemError(
            "R R^T is rank-deficient; set a positive ridge or drop quiescent neurons")
    lhs = gram + ridge_eff * np.eye(len(gram))
    w = config.k_scale * np.linalg.solve(lhs, r @ y.T).T
    return ReadoutWeights(matrix=np.clip(w, -config.w_lim, config.w_lim), config=config)


def classify(weights: ReadoutWeights, response_vector: np.ndarray) -> int:
    """Argmax class score; ties resolve to the lowest class index."""
    scores = weights.matrix @ np.asarray(response_vector, dtype=np.float64)
    return int(np.argmax(scores))


def stratified_folds(labels, n_folds: int, seed: int) -> tuple[np.ndarray, ...]:
    """Contiguous blocks of a seeded class-stratified shuffle.

    Per-class index lists are shuffled, interleaved round-robin (so any
    contiguous block is close to class-balanced) and split into n_folds
    blocks whose sizes differ by at most one.
    """
    labels = np.asarray(labels, dtype=np.int64)
    if n_folds > len(labels):
        raise ValueError("more folds than samples")
    if n_folds < 2:
        raise ValueError("need at least 2 folds")
    gen = seeding.rng(seed, "folds")
    per_class = []
    for c in np.unique(labels):
        idx = np.nonzero(labels == c)[0]
        per_class.append(gen.permutation(idx))
    order = []
    depth = max(len(x) for x in per_class)
    for i in range(depth):
        for cls_list in per_class:
            if i < len(cls_list):
                order.append(cls_list[i])
    return tuple(np.asarray(b, dtype=np.int64) for b in np.array_split(np.array(order), n_folds))


def kfold_evaluate(responses_or_records, labels, config: ReadoutConfig,
                   n_folds: int = 5, seed: int = 0) -> FoldResult:
    """Rotating train/test evaluation; each fold serves once as the test set."""
    if isinstance(responses_or_records, np.ndarray):
        r = responses_or_records
    else:
        # record rates are stored per ms; train in Hz so the published
        # K and w_lim magnitudes are dimensionally meaningful
        r = assemble_responses(responses_or_records) * 1000.0
    labels = np.asarray(labels, dtype=np.int64)
    folds = stratified_folds(labels, n_folds, seed)
    accuracies = np.empty(n_folds)
    confusion = np.zeros((config.n_classes, config.n_classes), dtype=np.int64)
    all_idx = np.arange(r.shape[1])
    for f, test_idx in enumerate(folds):
        train_mask = np.ones(len(all_idx), dtype=bool)
        train_mask[test_idx] = False
        weights = train_readout(r[:, train_mask], labels[train_mask], config)
        pred = np.array([classify(weights, r[:, j]) for j in test_idx])
        truth = labels[test_idx]
        accuracies[f] = float(np.mean(pred == truth))
        np.add.at(confusion, (truth, pred), 1)
    return FoldResult(accuracies=accuracies, folds=folds, confusion=confusion)
