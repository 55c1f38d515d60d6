"""Linear SVM training by dual coordinate descent, with inspectable weights.

The trainer solves the L2-regularized SVM dual for boolean sparse vectors,
one coordinate at a time, over a bias-augmented representation (a constant
feature appended to every vector, so the bias is regularized like any other
weight). Hinge (L1) and squared-hinge (L2) losses are supported; with U the
upper box bound and D the diagonal shift, hinge uses U=C, D=0 and squared
hinge uses U=inf, D=1/(2C).

Multiclass is one-vs-rest over the canonical class order. Binary mode drops
the None class from training and learns a single Against-vs-Favor separator
whose margin sign picks the class.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .corpus import CANONICAL_LABELS, StanceLabel
from .features import FeatureSetSelector, FeatureSpace, SparseBooleanVector
from .features import read_feature_space, write_feature_space

LOSSES = ("hinge", "squared_hinge")


@dataclass(frozen=True)
class TrainConfig:
    C: float = 1.0
    tol: float = 1e-4
    max_iter: int = 1000
    seed: int = 0
    loss: str = "hinge"

    def __post_init__(self) -> None:
        if self.C <= 0:
            raise ValueError("C must be positive")
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if self.loss not in LOSSES:
            raise ValueError(f"loss must be one of {LOSSES}")


def _as_rows(vectors: Sequence[SparseBooleanVector]) -> tuple[list[np.ndarray], int]:
    if not vectors:
        raise ValueError("no training vectors")
    dim = vectors[0].dimension
    rows = []
    for vec in vectors:
        if vec.dimension != dim:
            raise ValueError(
                f"dimension mismatch: {vec.dimension} != {dim}"
            )
        rows.append(vec.indices)
    return rows, dim


def dual_coordinate_descent(
    rows: Sequence[np.ndarray],
    y: np.ndarray,
    dim: int,
    config: TrainConfig,
) -> tuple[np.ndarray, np.ndarray, int]:
    """Core solver. Returns (augmented weights, dual coefficients, epochs).

    The augmented weight vector has length dim+1; its last slot is the bias.
    Terminates when the largest projected-gradient violation in an epoch
    falls below config.tol, or after config.max_iter epochs. Deterministic
    for a given config.seed (the per-epoch permutation stream).
    """
    n = len(rows)
    if config.loss == "hinge":
        upper, diag = config.C, 0.0
    else:
        upper, diag = np.inf, 1.0 / (2.0 * config.C)
    # ||x_i||^2 is the active count plus 1 for the bias feature.
    qii = np.array([len(r) + 1 + diag for r in rows], dtype=np.float64)
    w = np.zeros(dim + 1, dtype=np.float64)
    alpha = np.zeros(n, dtype=np.float64)
    rng = np.random.default_rng(config.seed)
    epochs = 0
    for _ in range(config.max_iter):
        epochs += 1
        violation = 0.0
        for i in rng.permutation(n):
            idx = rows[i]
            yi = y[i]
            g = yi * (w[idx].sum() + w[dim]) - 1.0 + diag * alpha[i]
            if alpha[i] <= 0.0:
                pg = min(g, 0.0)
            elif alpha[i] >= upper:
                pg = max(g, 0.0)
            else:
                pg = g
            if pg != 0.0:
                violation = max(violation, abs(pg))
                new_alpha = min(max(alpha[i] - g / qii[i], 0.0), upper)
                delta = (new_alpha - alpha[i]) * yi
                if delta != 0.0:
                    w[idx] += delta
                    w[dim] += delta
                alpha[i] = new_alpha
        if violation < config.tol:
            break
    return w, alpha, epochs


def train_binary(
    vectors: Sequence[SparseBooleanVector],
    labels: Sequence[int],
    config: TrainConfig,
) -> tuple[np.ndarray, float]:
    """Fit one +1/-1 separator; returns (weight vector, bias)."""
    rows, dim = _as_rows(vectors)
    y = np.asarray(labels, dtype=np.float64)
    if y.shape[0] != len(rows):
        raise ValueError("labels and vectors differ in length")
    if not set(np.unique(y)) <= {-1.0, 1.0}:
        raise ValueError("binary labels must be -1 or +1")
    if len(np.unique(y)) < 2:
        raise ValueError("degenerate training set: a single class present")
    w, _, _ = dual_coordinate_descent(rows, y, dim, config)
    return w[:dim].copy(), float(w[dim])


@dataclass(frozen=True)
class LinearModel:
    """Per-class weights over a frozen feature space."""

    classes: tuple[StanceLabel, ...]
    weights: np.ndarray  # shape (len(classes), space.size)
    biases: np.ndarray  # shape (len(classes),)
    mode: str  # "ternary" | "binary"
    space: FeatureSpace
    selector: FeatureSetSelector
    config: TrainConfig


def train_ovr(
    vectors: Sequence[SparseBooleanVector],
    labels: Sequence[StanceLabel],
    mode: str,
    config: TrainConfig,
    space: FeatureSpace,
    topic: str = "",
) -> LinearModel:
    """One-vs-rest ternary model, or a single polarized binary separator.

    Binary mode removes None-labeled training instances before fitting and
    never predicts None.
    """
    if mode not in ("ternary", "binary"):
        raise ValueError(f"unknown mode {mode!r}")
    if len(vectors) != len(labels):
        raise ValueError("labels and vectors differ in length")
    where = f" for topic {topic!r}" if topic else ""
    if mode == "binary":
        pairs = [
            (v, lab)
            for v, lab in zip(vectors, labels)
            if lab is not StanceLabel.NONE
        ]
        classes = (StanceLabel.AGAINST, StanceLabel.FAVOR)
        for cls in classes:
            if not any(lab is cls for _, lab in pairs):
                raise ValueError(f"no {cls.value} examples{where}")
        y = [1 if lab is StanceLabel.FAVOR else -1 for _, lab in pairs]
        w, b = train_binary([v for v, _ in pairs], y, config)
        weights = np.vstack([-w, w])
        biases = np.array([-b, b], dtype=np.float64)
    else:
        classes = CANONICAL_LABELS
        rows_w = []
        rows_b = []
        for cls in classes:
            if not any(lab is cls for lab in labels):
                raise ValueError(f"no {cls.value} examples{where}")
            y = [1 if lab is cls else -1 for lab in labels]
            w, b = train_binary(vectors, y, config)
            rows_w.append(w)
            rows_b.append(b)
        weights = np.vstack(rows_w)
        biases = np.array(rows_b, dtype=np.float64)
    return LinearModel(
        classes=classes,
        weights=weights,
        biases=biases,
        mode=mode,
        space=space,
        selector=space.selector,
        config=config,
    )


def decision_values(model: LinearModel, x: SparseBooleanVector) -> np.ndarray:
    """Per-class scores <w_c, x> + b_c, aligned with model.classes."""
    if x.dimension != model.space.size:
        raise ValueError(
            f"dimension mismatch: vector has {x.dimension}, "
            f"space has {model.space.size}"
        )
    return model.weights[:, x.indices].sum(axis=1) + model.biases


def predict(model: LinearModel, x: SparseBooleanVector) -> StanceLabel:
    """Argmax class; exact ties resolve to the earliest canonical class."""
    scores = decision_values(model, x)
    return model.classes[int(np.argmax(scores))]


def class_weights(model: LinearModel, cls: StanceLabel) -> dict[str, float]:
    """Feature-string -> weight map for one class."""
    if cls not in model.classes:
        raise ValueError(f"class {cls.value} not in model classes")
    row = model.weights[model.classes.index(cls)]
    return {name: float(row[idx]) for name, idx in model.space.index_of.items()}


# ---------------------------------------------------------------------------
# Model bundle: a directory that round-trips predictions bitwise.

_METADATA = "metadata.json"
_SPACE = "space.tsv"


def _weights_file(cls: StanceLabel) -> str:
    return f"weights_{cls.value}.tsv"


def save_bundle(model: LinearModel, path: str | Path, topic: str = "") -> None:
    """Write metadata, feature space, and per-class weight files."""
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    meta = {
        "mode": model.mode,
        "selector": str(model.selector),
        "topic": topic,
        "classes": [cls.value for cls in model.classes],
        "config": {
            "C": model.config.C,
            "tol": model.config.tol,
            "max_iter": model.config.max_iter,
            "seed": model.config.seed,
            "loss": model.config.loss,
        },
        "dimension": model.space.size,
    }
    (path / _METADATA).write_text(
        json.dumps(meta, indent=2) + "\n", encoding="utf-8"
    )
    write_feature_space(path / _SPACE, model.space)
    for ci, cls in enumerate(model.classes):
        with (path / _weights_file(cls)).open("w", encoding="utf-8") as fh:
            row = model.weights[ci]
            for idx in np.nonzero(row)[0]:
                fh.write(f"{int(idx)}\t{float(row[idx])!r}\n")
            fh.write(f"bias\t{float(model.biases[ci])!r}\n")


def load_bundle(path: str | Path) -> tuple[LinearModel, dict]:
    """Load a bundle directory; returns the model and its metadata."""
    path = Path(path)
    meta = json.loads((path / _METADATA).read_text(encoding="utf-8"))
    selector = FeatureSetSelector.parse(meta["selector"])
    space = read_feature_space(path / _SPACE, selector)
    if space.size != meta["dimension"]:
        raise ValueError(
            f"bundle {path.name}: space has {space.size} features, "
            f"metadata says {meta['dimension']}"
        )
    classes = tuple(StanceLabel(value) for value in meta["classes"])
    config = TrainConfig(**meta["config"])
    weights = np.zeros((len(classes), space.size), dtype=np.float64)
    biases = np.zeros(len(classes), dtype=np.float64)
    for ci, cls in enumerate(classes):
        with (path / _weights_file(cls)).open(encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                key, _, value = line.partition("\t")
                if key == "bias":
                    biases[ci] = float(value)
                else:
                    weights[ci, int(key)] = float(value)
    mode = meta["mode"]
    model = LinearModel(
        classes=classes,
        weights=weights,
        biases=biases,
        mode=mode,
        space=space,
        selector=selector,
        config=config,
    )
    return model, meta
