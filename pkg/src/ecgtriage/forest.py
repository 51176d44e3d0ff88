"""Random forest of CART-style trees, trained with Gini-impurity splits.

Every source of randomness is a seeded generator, candidate thresholds
are midpoints between consecutive distinct sorted values, and gain ties
break toward the lowest feature index and then the lowest threshold, so
training is bit-deterministic given (config, seed, input order). Trees
may be grown in any order or in parallel: tree t always uses the
generator seeded by (seed, t).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np

from .errors import ModelFormatError
from .features import FEATURE_NAMES, feature_fingerprint
from .kernels import gini_best_split

MODEL_FORMAT = "ecgtriage-forest-v1"
_LEAF = -1


@dataclass
class ForestConfig:
    n_trees: int = 100
    max_depth: int = 12
    min_leaf: int = 5
    features_per_split: int = 6  # ceil(sqrt(28))


@dataclass
class Tree:
    """Flat node arrays; node 0 is the root, children in DFS order.

    ``feature[i] == -1`` marks a leaf. ``value[i]`` is the positive
    fraction of the training rows that reached node i (the prediction,
    for leaves).
    """

    feature: list[int] = field(default_factory=list)
    threshold: list[float] = field(default_factory=list)
    left: list[int] = field(default_factory=list)
    right: list[int] = field(default_factory=list)
    value: list[float] = field(default_factory=list)

    def add_node(self, value: float) -> int:
        self.feature.append(_LEAF)
        self.threshold.append(0.0)
        self.left.append(_LEAF)
        self.right.append(_LEAF)
        self.value.append(value)
        return len(self.value) - 1


@dataclass
class ForestModel:
    trees: list[Tree]
    config: ForestConfig
    seed: int
    fingerprint: str
    age_default: float
    feature_names: tuple[str, ...] = FEATURE_NAMES


def _grow(tree: Tree, x: np.ndarray, labels: np.ndarray, rows: np.ndarray,
          depth: int, config: ForestConfig, rng: np.random.Generator) -> int:
    pos = float(labels[rows].sum())
    node = tree.add_node(pos / rows.size)
    if (depth >= config.max_depth or rows.size < 2 * config.min_leaf
            or pos == 0.0 or pos == rows.size):
        return node

    n_features = x.shape[1]
    k = min(config.features_per_split, n_features)
    candidates = np.sort(rng.choice(n_features, size=k, replace=False))

    best_score = math.inf
    best_feature = _LEAF
    best_threshold = 0.0
    for feat in candidates:
        order = np.argsort(x[rows, feat], kind="stable")
        values = np.ascontiguousarray(x[rows[order], feat])
        node_labels = np.ascontiguousarray(labels[rows[order]])
        score, threshold, ok = gini_best_split(values, node_labels,
                                               config.min_leaf)
        # Strict < keeps the first (lowest-index) feature on ties.
        if ok and score < best_score:
            best_score, best_feature, best_threshold = score, int(feat), threshold
    if best_feature == _LEAF:
        return node

    mask = x[rows, best_feature] <= best_threshold
    tree.feature[node] = best_feature
    tree.threshold[node] = best_threshold
    tree.left[node] = _grow(tree, x, labels, rows[mask], depth + 1, config, rng)
    tree.right[node] = _grow(tree, x, labels, rows[~mask], depth + 1, config, rng)
    return node


def train(features, labels, config: ForestConfig | None = None, seed: int = 0, *,
          age_default: float,
          feature_names: tuple[str, ...] = FEATURE_NAMES) -> ForestModel:
    """Fit a forest on (n_samples, n_features) data with boolean labels.

    Each tree grows on its own seeded bootstrap sample; the age
    imputation constant and the feature layout are recorded so inference
    reproduces training's feature extraction.
    """
    config = config or ForestConfig()
    x = np.asarray(features, dtype=np.float64)
    y = np.asarray(labels, dtype=np.float64)
    if x.ndim != 2:
        raise ValueError(f"features must be 2-D, got {x.ndim}-D")
    if x.shape[1] != len(feature_names):
        raise ValueError(f"{x.shape[1]} feature columns but "
                         f"{len(feature_names)} feature names")
    if y.shape != (x.shape[0],):
        raise ValueError(f"{x.shape[0]} feature rows but {y.shape} labels")
    if x.shape[0] < 2:
        raise ValueError(f"need at least 2 training samples, got {x.shape[0]}")
    if not np.all(np.isfinite(x)):
        raise ValueError("features contain non-finite values")
    n_pos = int(y.sum())
    if n_pos == 0 or n_pos == y.size:
        raise ValueError(
            f"training needs both classes, got {n_pos} positives of {y.size}")
    if config.n_trees < 1 or config.max_depth < 1 or config.min_leaf < 1:
        raise ValueError(f"bad hyperparameters: {config}")

    trees = []
    for t in range(config.n_trees):
        rng = np.random.default_rng([seed, t])
        rows = rng.integers(0, x.shape[0], size=x.shape[0])
        tree = Tree()
        _grow(tree, x, y, np.asarray(rows), 0, config, rng)
        trees.append(tree)
    return ForestModel(trees=trees, config=config, seed=seed,
                       fingerprint=feature_fingerprint(feature_names),
                       age_default=float(age_default),
                       feature_names=tuple(feature_names))


def _apply_tree(tree: Tree, x: np.ndarray) -> np.ndarray:
    out = np.empty(x.shape[0], dtype=np.float64)
    # Masked descent: split the row set at each node instead of walking
    # rows one at a time.
    stack = [(0, np.arange(x.shape[0]))]
    while stack:
        node, rows = stack.pop()
        if rows.size == 0:
            continue
        feat = tree.feature[node]
        if feat == _LEAF:
            out[rows] = tree.value[node]
            continue
        mask = x[rows, feat] <= tree.threshold[node]
        stack.append((tree.left[node], rows[mask]))
        stack.append((tree.right[node], rows[~mask]))
    return out


def predict_proba(model: ForestModel, features, *,
                  fingerprint: str | None = None) -> np.ndarray:
    """Mean leaf value across trees for each row; shape (n_samples,).

    Accepts a single feature vector or a 2-D batch. Pass the extractor's
    ``fingerprint`` to refuse applying the model to a feature layout it
    was not trained on.
    """
    if fingerprint is not None and fingerprint != model.fingerprint:
        raise ModelFormatError(
            f"feature layout fingerprint {fingerprint} does not match the "
            f"model's {model.fingerprint} "
            f"({len(model.feature_names)} features expected)")
    x = np.asarray(features, dtype=np.float64)
    single = x.ndim == 1
    if single:
        x = x[None, :]
    if x.shape[1] != len(model.feature_names):
        raise ModelFormatError(
            f"model expects {len(model.feature_names)} features, got {x.shape[1]}")
    total = np.zeros(x.shape[0], dtype=np.float64)
    for tree in model.trees:
        total += _apply_tree(tree, x)
    proba = total / len(model.trees)
    return proba[0] if single else proba


def predict_binary(model: ForestModel, features, *,
                   fingerprint: str | None = None) -> np.ndarray:
    """Thresholded decision: probability >= 0.5."""
    return predict_proba(model, features, fingerprint=fingerprint) >= 0.5


def save_model(model: ForestModel, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = {
        "format": MODEL_FORMAT,
        "config": asdict(model.config),
        "seed": model.seed,
        "fingerprint": model.fingerprint,
        "age_default": model.age_default,
        "feature_names": list(model.feature_names),
        "trees": [asdict(tree) for tree in model.trees],
    }
    path.write_text(json.dumps(payload, sort_keys=True, indent=1) + "\n",
                    encoding="ascii", newline="\n")
    return path


def load_model(path) -> ForestModel:
    path = Path(path)
    if not path.exists():
        raise ModelFormatError(f"model file not found: {path}")
    try:
        payload = json.loads(path.read_text(encoding="ascii"))
    except (ValueError, UnicodeDecodeError) as exc:
        raise ModelFormatError(f"{path}: not a valid model file: {exc}") from exc
    if not isinstance(payload, dict) or payload.get("format") != MODEL_FORMAT:
        raise ModelFormatError(
            f"{path}: expected format {MODEL_FORMAT!r}, "
            f"got {payload.get('format')!r}" if isinstance(payload, dict)
            else f"{path}: not a model object")
    try:
        model = ForestModel(
            trees=[Tree(**tree) for tree in payload["trees"]],
            config=ForestConfig(**payload["config"]),
            seed=payload["seed"],
            fingerprint=payload["fingerprint"],
            age_default=payload["age_default"],
            feature_names=tuple(payload["feature_names"]),
        )
    except (KeyError, TypeError) as exc:
        raise ModelFormatError(f"{path}: missing or malformed field: {exc}") from exc
    if model.fingerprint != feature_fingerprint(tuple(model.feature_names)):
        raise ModelFormatError(
            f"{path}: fingerprint {model.fingerprint} does not match the "
            "stored feature names; refusing to predict with it")
    return model
