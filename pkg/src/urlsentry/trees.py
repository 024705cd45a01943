"""CART trees and the three ensembles built on them.

Shared conventions, fixed so models serialize and replay bit-exactly:
  - candidate thresholds are midpoints of consecutive distinct sorted values;
  - routing is x[feature] < threshold -> left, ties go right;
  - split ties break on (lower feature index, then lower threshold);
  - splits whose gain is not strictly positive are rejected.

Random forest trees draw a bootstrap sample and per-node feature subsets
from a per-tree generator seeded seed + tree_index, so the ensemble is
independent of training order. Boosting uses no sampling at all.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, EmptyNode, SingleClassTrainingSet, TooFewRows
from .neural import sigmoid
from .pipeline import Dataset

LEAF_DENOM_FLOOR = 1e-12  # guards Newton leaf values when hessians vanish


@dataclass
class TreeNode:
    value: float | None = None
    feature_index: int | None = None
    threshold: float | None = None
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None

    @property
    def is_leaf(self) -> bool:
        return self.left is None


@dataclass(frozen=True)
class SplitDecision:
    feature_index: int
    threshold: float
    gain: float


@dataclass(frozen=True)
class TreeParams:
    max_depth: int
    min_samples_leaf: int = 1
    criterion: str = "gini"  # gini | second_order


@dataclass
class GradientTargets:
    """Per-row statistics driving a boosted regression tree.

    grad/hess feed the split gain; leaf values are the Newton step
    -sum(grad) / (sum(leaf_hess) + lam) over leaf members.
    """

    grad: np.ndarray
    hess: np.ndarray
    leaf_hess: np.ndarray
    lam: float = 0.0
    gamma: float = 0.0


def gini(class_counts: tuple[int, int]) -> float:
    """Binary Gini impurity 1 - p0^2 - p1^2."""
    c0, c1 = class_counts
    total = c0 + c1
    if total == 0:
        raise EmptyNode("Gini impurity of zero samples is undefined")
    p0 = c0 / total
    p1 = c1 / total
    return 1.0 - p0 * p0 - p1 * p1


def second_order_gain(
    g_left: float, h_left: float, g_right: float, h_right: float,
    lam: float, gamma: float,
) -> float:
    """Regularized gain of a candidate split from first/second-order sums."""
    g_total = g_left + g_right
    h_total = h_left + h_right
    return 0.5 * (
        g_left * g_left / (h_left + lam)
        + g_right * g_right / (h_right + lam)
        - g_total * g_total / (h_total + lam)
    ) - gamma


def best_split(
    features: np.ndarray,
    targets: np.ndarray,
    candidate_features,
    criterion: str = "gini",
    *,
    hessians: np.ndarray | None = None,
    lam: float = 0.0,
    gamma: float = 0.0,
    min_samples_leaf: int = 1,
) -> SplitDecision | None:
    """Best (feature, midpoint) split over the candidates, or None.

    For "gini", targets are binary labels. For "second_order", targets are
    per-row gradients and hessians must be given. Returns None when no
    candidate achieves strictly positive gain.
    """
    n = features.shape[0]
    if n < 2:
        raise TooFewRows(f"cannot split {n} row(s)")

    best: SplitDecision | None = None
    for f in sorted(int(f) for f in candidate_features):
        col = features[:, f]
        order = np.argsort(col, kind="stable")
        sorted_col = col[order]

        left_n = np.arange(1, n, dtype=np.float64)
        right_n = n - left_n
        valid = sorted_col[:-1] != sorted_col[1:]
        valid &= (left_n >= min_samples_leaf) & (right_n >= min_samples_leaf)
        if not valid.any():
            continue

        if criterion == "gini":
            ys = targets[order].astype(np.int64)
            pos_prefix = np.cumsum(ys)
            total_pos = int(pos_prefix[-1])
            parent = gini((n - total_pos, total_pos))
            left_pos = pos_prefix[:-1].astype(np.float64)
            p1l = left_pos / left_n
            p0l = (left_n - left_pos) / left_n
            gl = 1.0 - p0l * p0l - p1l * p1l
            right_pos = total_pos - left_pos
            p1r = right_pos / right_n
            p0r = (right_n - right_pos) / right_n
            gr = 1.0 - p0r * p0r - p1r * p1r
            gains = parent - (left_n / n) * gl - (right_n / n) * gr
        elif criterion == "second_order":
            if hessians is None:
                raise ValueError("second_order criterion requires hessians")
            g_prefix = np.cumsum(targets[order])
            h_prefix = np.cumsum(hessians[order])
            g_total = g_prefix[-1]
            h_total = h_prefix[-1]
            gl_s, hl_s = g_prefix[:-1], h_prefix[:-1]
            gr_s, hr_s = g_total - gl_s, h_total - hl_s
            gains = 0.5 * (
                gl_s * gl_s / (hl_s + lam)
                + gr_s * gr_s / (hr_s + lam)
                - g_total * g_total / (h_total + lam)
            ) - gamma
        else:
            raise ValueError(f"unknown criterion {criterion!r}")

        gains = np.where(valid, gains, -np.inf)
        pos = int(np.argmax(gains))
        gain = float(gains[pos])
        if gain <= 0.0:
            continue
        if best is None or gain > best.gain:
            threshold = float((sorted_col[pos] + sorted_col[pos + 1]) / 2.0)
            best = SplitDecision(feature_index=f, threshold=threshold, gain=gain)
    return best


def _leaf_value(targets, idx: np.ndarray) -> float:
    if isinstance(targets, GradientTargets):
        g = float(np.sum(targets.grad[idx]))
        denom = float(np.sum(targets.leaf_hess[idx])) + targets.lam
        return -g / max(denom, LEAF_DENOM_FLOOR)
    return float(np.sum(targets[idx])) / len(idx)


def grow_tree(
    features: np.ndarray,
    targets,
    params: TreeParams,
    feature_sampler=None,
) -> TreeNode:
    """Recursively grow a tree until pure, depth-limited, or gain-starved.

    targets: binary labels (criterion "gini") or GradientTargets
    ("second_order"). feature_sampler, when given, returns the candidate
    feature indices for one node; None considers every feature.
    """
    d = features.shape[1]

    def candidates() -> np.ndarray:
        if feature_sampler is None:
            return np.arange(d)
        return feature_sampler()

    def build(idx: np.ndarray, depth: int) -> TreeNode:
        leaf = TreeNode(value=_leaf_value(targets, idx))
        if depth >= params.max_depth or len(idx) < 2:
            return leaf
        if not isinstance(targets, GradientTargets):
            labels = targets[idx]
            if labels.min() == labels.max():
                return leaf

        if isinstance(targets, GradientTargets):
            split = best_split(
                features[idx], targets.grad[idx], candidates(), "second_order",
                hessians=targets.hess[idx], lam=targets.lam, gamma=targets.gamma,
                min_samples_leaf=params.min_samples_leaf,
            )
        else:
            split = best_split(
                features[idx], targets[idx], candidates(), "gini",
                min_samples_leaf=params.min_samples_leaf,
            )
        if split is None:
            return leaf

        go_left = features[idx, split.feature_index] < split.threshold
        return TreeNode(
            feature_index=split.feature_index,
            threshold=split.threshold,
            left=build(idx[go_left], depth + 1),
            right=build(idx[~go_left], depth + 1),
        )

    return build(np.arange(features.shape[0]), 0)


def predict_tree(tree: TreeNode, x: np.ndarray) -> float:
    """Route one input to its leaf; boundary values (x == threshold) go right."""
    node = tree
    while not node.is_leaf:
        if node.feature_index >= len(x):
            raise DimensionMismatch(
                f"tree expects feature {node.feature_index}, input has {len(x)}"
            )
        node = node.left if x[node.feature_index] < node.threshold else node.right
    return node.value


def predict_tree_batch(tree: TreeNode, X: np.ndarray) -> np.ndarray:
    X = np.atleast_2d(X)
    out = np.empty(X.shape[0], dtype=np.float64)

    def route(node: TreeNode, idx: np.ndarray) -> None:
        if node.is_leaf:
            out[idx] = node.value
            return
        if node.feature_index >= X.shape[1]:
            raise DimensionMismatch(
                f"tree expects feature {node.feature_index}, input has {X.shape[1]}"
            )
        go_left = X[idx, node.feature_index] < node.threshold
        route(node.left, idx[go_left])
        route(node.right, idx[~go_left])

    route(tree, np.arange(X.shape[0]))
    return out


# ---------------------------------------------------------------------------
# Random forest
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ForestParams:
    n_trees: int = 100
    max_depth: int = 12
    m_features: int | None = None  # None -> ceil(sqrt(d))
    bootstrap: bool = True
    min_samples_leaf: int = 1
    seed: int = 0


@dataclass
class ForestModel:
    trees: list[TreeNode]
    n_trees: int
    m_features: int
    bootstrap: bool
    seed: int


def train_random_forest(train: Dataset, params: ForestParams | None = None) -> ForestModel:
    """Bagged CART ensemble; tree t draws everything from seed + t."""
    if params is None:
        params = ForestParams()
    X = np.asarray(train.features, dtype=np.float64)
    y = np.asarray(train.labels, dtype=np.int64)
    n, d = X.shape
    m = params.m_features if params.m_features is not None else math.ceil(math.sqrt(d))
    m = min(m, d)
    tree_params = TreeParams(
        max_depth=params.max_depth,
        min_samples_leaf=params.min_samples_leaf,
        criterion="gini",
    )

    trees = []
    for t in range(params.n_trees):
        rng = np.random.default_rng(params.seed + t)
        if params.bootstrap:
            rows = rng.integers(0, n, size=n)
        else:
            rows = np.arange(n)
        sampler = None
        if m < d:
            sampler = lambda rng=rng: np.sort(rng.choice(d, size=m, replace=False))
        trees.append(grow_tree(X[rows], y[rows], tree_params, sampler))
    return ForestModel(
        trees=trees, n_trees=params.n_trees, m_features=m,
        bootstrap=params.bootstrap, seed=params.seed,
    )


def forest_confidence(model: ForestModel, x: np.ndarray) -> float:
    return float(np.mean([predict_tree(t, x) for t in model.trees]))


def predict_forest(model: ForestModel, x: np.ndarray) -> tuple[int, float]:
    """Mean leaf fraction across trees; label 1 iff confidence >= 0.5."""
    confidence = forest_confidence(model, x)
    return (1 if confidence >= 0.5 else 0), confidence


def predict_forest_batch(model: ForestModel, X: np.ndarray) -> np.ndarray:
    X = np.atleast_2d(X)
    acc = np.zeros(X.shape[0], dtype=np.float64)
    for tree in model.trees:
        acc += predict_tree_batch(tree, X)
    return acc / len(model.trees)


# ---------------------------------------------------------------------------
# Boosting (shared prediction pipeline: sigmoid(init + lr * sum of trees))
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BoostParams:
    n_rounds: int = 100
    learning_rate: float = 0.1
    max_depth: int = 3
    min_samples_leaf: int = 1


@dataclass(frozen=True)
class XgbParams:
    n_rounds: int = 100
    eta: float = 0.3
    max_depth: int = 6
    lam: float = 1.0
    gamma: float = 0.0
    min_samples_leaf: int = 1


@dataclass
class BoostedModel:
    variant: str  # gradient_boosting | xgboost_style
    init_score: float
    trees: list[TreeNode]
    learning_rate: float
    lam: float = 0.0
    gamma: float = 0.0


def _base_rate_log_odds(y: np.ndarray) -> float:
    p = float(np.mean(y))
    if p <= 0.0 or p >= 1.0:
        raise SingleClassTrainingSet("boosting needs both classes present")
    return math.log(p / (1.0 - p))


def train_gradient_boosting(train: Dataset, params: BoostParams | None = None) -> BoostedModel:
    """First-order boosting: least-squares trees on log-loss residuals.

    Leaf values take the single Newton step sum(residual) / sum(p(1-p))
    over leaf members; no row or feature sampling, so training is a pure
    function of (data, params).
    """
    if params is None:
        params = BoostParams()
    X = np.asarray(train.features, dtype=np.float64)
    y = np.asarray(train.labels, dtype=np.float64)
    init_score = _base_rate_log_odds(y)
    n = X.shape[0]
    tree_params = TreeParams(
        max_depth=params.max_depth,
        min_samples_leaf=params.min_samples_leaf,
        criterion="second_order",
    )
    ones = np.ones(n, dtype=np.float64)

    scores = np.full(n, init_score, dtype=np.float64)
    trees = []
    for _ in range(params.n_rounds):
        p = sigmoid(scores)
        targets = GradientTargets(grad=p - y, hess=ones, leaf_hess=p * (1.0 - p))
        tree = grow_tree(X, targets, tree_params)
        trees.append(tree)
        scores += params.learning_rate * predict_tree_batch(tree, X)
    return BoostedModel(
        variant="gradient_boosting", init_score=init_score,
        trees=trees, learning_rate=params.learning_rate,
    )


def train_xgb(train: Dataset, params: XgbParams | None = None) -> BoostedModel:
    """Second-order boosting with L2 leaf regularization and gain penalty."""
    if params is None:
        params = XgbParams()
    X = np.asarray(train.features, dtype=np.float64)
    y = np.asarray(train.labels, dtype=np.float64)
    init_score = _base_rate_log_odds(y)
    n = X.shape[0]
    tree_params = TreeParams(
        max_depth=params.max_depth,
        min_samples_leaf=params.min_samples_leaf,
        criterion="second_order",
    )

    scores = np.full(n, init_score, dtype=np.float64)
    trees = []
    for _ in range(params.n_rounds):
        p = sigmoid(scores)
        h = p * (1.0 - p)
        targets = GradientTargets(
            grad=p - y, hess=h, leaf_hess=h, lam=params.lam, gamma=params.gamma
        )
        tree = grow_tree(X, targets, tree_params)
        trees.append(tree)
        scores += params.eta * predict_tree_batch(tree, X)
    return BoostedModel(
        variant="xgboost_style", init_score=init_score, trees=trees,
        learning_rate=params.eta, lam=params.lam, gamma=params.gamma,
    )


def boosted_score(model: BoostedModel, x: np.ndarray) -> float:
    return model.init_score + model.learning_rate * sum(
        predict_tree(t, x) for t in model.trees
    )


def predict_boosted(model: BoostedModel, x: np.ndarray) -> tuple[int, float]:
    """sigmoid(init + lr * sum of tree outputs); label 1 iff >= 0.5."""
    confidence = float(sigmoid(np.asarray(boosted_score(model, x))))
    return (1 if confidence >= 0.5 else 0), confidence


def predict_boosted_batch(model: BoostedModel, X: np.ndarray) -> np.ndarray:
    X = np.atleast_2d(X)
    scores = np.full(X.shape[0], model.init_score, dtype=np.float64)
    for tree in model.trees:
        scores += model.learning_rate * predict_tree_batch(tree, X)
    return sigmoid(scores)
