"""Gini decision trees and a bootstrap random forest for LOS/NLOS labels."""
import logging
import math
from collections import namedtuple
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

from hmiwlan.decorators import timed
from hmiwlan.errors import ContractViolation, FeatureError, SingleClassDataset
from hmiwlan.events import Rng, derive_seed
from hmiwlan.models import FEATURE_NAMES, CirDataset, FeatureSubset, FeatureVector, Label
from hmiwlan.nlos.features import feature_matrix

logger = logging.getLogger(__name__)

Split = namedtuple("Split", ["feature", "threshold", "left", "right"])

ACCURACY_COLUMNS = ["subset", "los_acc", "nlos_acc", "overall"]


def _gini(ones, total):
    p = ones / total
    return 1.0 - p ** 2 - (1.0 - p) ** 2


def _majority(y):
    nlos = int(np.count_nonzero(y))
    return int(Label.NLOS) if nlos * 2 > y.size else int(Label.LOS)


class DecisionTree(object):
    """Axis-aligned threshold tree. Leaves hold a label; internal nodes are
    Split(feature, threshold, left, right) with `x[feature] <= threshold`
    going left."""

    def __init__(self, max_depth=8, min_leaf=2, max_features=None, rng=None):
        if max_depth < 0 or min_leaf < 1:
            raise ContractViolation("max_depth must be >= 0 and min_leaf >= 1")
        self.max_depth = max_depth
        self.min_leaf = min_leaf
        self.max_features = max_features
        self.rng = rng
        self.root = None

    def fit(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=np.int64).reshape(-1)
        self.n_features = x.shape[1]
        self.root = self._grow(x, y, 0)
        return self

    def _candidates(self):
        features = np.arange(self.n_features)
        count = self.max_features or self.n_features
        if count < self.n_features:
            if self.rng is None:
                raise ContractViolation("feature subsampling needs a random stream")
            features = self.rng.permutation(features)[:count]
        return features

    def _best_split(self, x, y):
        n = y.size
        ones = int(y.sum())
        parent = _gini(ones, n)
        best = None
        nl = np.arange(1, n)
        nr = n - nl
        usable = (nl >= self.min_leaf) & (nr >= self.min_leaf)
        for feature in self._candidates():
            order = np.argsort(x[:, feature], kind="mergesort")
            values = x[order, feature]
            left_ones = np.cumsum(y[order])[:-1]
            weighted = (nl * _gini(left_ones, nl) + nr * _gini(ones - left_ones, nr)) / n
            valid = usable & (values[:-1] != values[1:])
            if not valid.any():
                continue
            k = int(np.argmin(np.where(valid, weighted, np.inf)))
            if best is None or weighted[k] < best[0]:
                best = (weighted[k], int(feature), (values[k] + values[k + 1]) / 2.0)
        if best is None or best[0] >= parent:
            return None
        return best[1], best[2]

    def _grow(self, x, y, depth):
        label = _majority(y)
        ones = int(y.sum())
        if depth >= self.max_depth or ones in (0, y.size) or y.size < 2 * self.min_leaf:
            return label
        split = self._best_split(x, y)
        if split is None:
            return label
        feature, threshold = split
        go_left = x[:, feature] <= threshold
        return Split(feature, threshold,
                     self._grow(x[go_left], y[go_left], depth + 1),
                     self._grow(x[~go_left], y[~go_left], depth + 1))

    def predict(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        out = np.empty(x.shape[0], dtype=np.int64)
        self._predict(self.root, x, np.arange(x.shape[0]), out)
        return out

    def _predict(self, node, x, rows, out):
        if not isinstance(node, Split):
            out[rows] = node
            return
        go_left = x[rows, node.feature] <= node.threshold
        self._predict(node.left, x, rows[go_left], out)
        self._predict(node.right, x, rows[~go_left], out)

    @property
    def depth(self):
        def _depth(node):
            return 0 if not isinstance(node, Split) else 1 + max(_depth(node.left), _depth(node.right))
        return _depth(self.root)

    def __repr__(self):
        return "<DecisionTree: depth {}>".format(self.depth)


@dataclass(frozen=True)
class ForestParams:
    n_trees: int = 100
    max_depth: int = 8
    min_leaf: int = 2
    bootstrap: bool = True
    max_features: Optional[int] = None

    def __post_init__(self):
        if self.n_trees < 1:
            raise ContractViolation("a forest needs at least one tree")

    def features_per_split(self, subset):
        return self.max_features or int(math.ceil(math.sqrt(len(subset.value))))


@dataclass
class Forest:
    subset: FeatureSubset
    params: ForestParams
    seed: int
    trees: List[DecisionTree] = field(default_factory=list)

    @property
    def n_trees(self):
        return len(self.trees)

    def votes(self, x):
        """NLOS votes per row of the full feature matrix."""
        x = np.atleast_2d(x)[:, self.subset.columns]
        return np.sum([tree.predict(x) for tree in self.trees], axis=0)

    def predict(self, x):
        return np.where(self.votes(x) * 2 > self.n_trees, int(Label.NLOS), int(Label.LOS))

    def __repr__(self):
        return "<Forest: {} trees on {}>".format(self.n_trees, self.subset.name)


def _features_labels(dataset):
    if isinstance(dataset, CirDataset):
        x, _ = feature_matrix(dataset.taps)
        y = dataset.labels
    else:
        x, y = dataset
    x = np.asarray(x, dtype=float)
    y = np.asarray(y).reshape(-1)
    if x.ndim != 2 or x.shape[1] != len(FEATURE_NAMES):
        raise FeatureError("expected a ({}, {}) feature matrix, got {}".format(y.size, len(FEATURE_NAMES), x.shape))
    known = y != Label.UNKNOWN
    return x[known], y[known].astype(np.int64)


def _grow_tree(x, y, params, features_per_split, rng):
    rows = rng.integers(0, y.size, size=y.size) if params.bootstrap else np.arange(y.size)
    tree = DecisionTree(params.max_depth, params.min_leaf, features_per_split, rng)
    return tree.fit(x[rows], y[rows])


@timed("forest")
def train_forest(dataset, subset, params=ForestParams(), seed=1, threads=1):
    """Each tree draws its bootstrap rows and split features from its own
    stream, so the forest does not depend on `threads`."""
    x, y = _features_labels(dataset)
    if np.unique(y).size < 2:
        raise SingleClassDataset("training data holds a single class")
    x = x[:, subset.columns]
    master = Rng(seed)
    per_split = params.features_per_split(subset)

    def one(t):
        return _grow_tree(x, y, params, per_split, master.child("tree", t))

    trees = Parallel(n_jobs=threads, backend="threading")(delayed(one)(t) for t in range(params.n_trees))
    return Forest(subset, params, seed, trees)


def classify(forest, features):
    """Label for one feature vector, or an array of labels for a matrix.

    Ties go to LOS.
    """
    if isinstance(features, FeatureVector):
        features = features.as_array()
    x = np.asarray(features, dtype=float)
    if x.shape[-1] != len(FEATURE_NAMES):
        raise FeatureError("feature vectors carry {} values, got {}".format(len(FEATURE_NAMES), x.shape[-1]))
    labels = forest.predict(x)
    if x.ndim == 1:
        return Label(int(labels[0]))
    return labels


def stratified_split(labels, split_ratio, rng):
    """Row indices (train, test), the same fraction of every class in train."""
    if not 0.0 < split_ratio < 1.0:
        raise ContractViolation("split ratio must lie in (0, 1)")
    train, test = [], []
    for label in (Label.LOS, Label.NLOS):
        rows = rng.permutation(np.flatnonzero(labels == label))
        k = int(round(rows.size * split_ratio))
        train.append(rows[:k])
        test.append(rows[k:])
    return np.sort(np.concatenate(train)), np.sort(np.concatenate(test))


def _accuracy(predicted, truth, label=None):
    if label is not None:
        mask = truth == label
        predicted, truth = predicted[mask], truth[mask]
    return float(np.mean(predicted == truth)) if truth.size else float("nan")


@timed("nlos")
def evaluate_subsets(dataset, split_ratio=0.7, params=ForestParams(), seed=1, subsets=tuple(FeatureSubset),
                     threads=1):
    x, y = _features_labels(dataset)
    train, test = stratified_split(y, split_ratio, Rng(seed).child("split"))
    rows = []
    for subset in subsets:
        forest = train_forest((x[train], y[train]), subset, params, derive_seed(seed, "forest", subset.name),
                              threads)
        predicted = forest.predict(x[test])
        truth = y[test]
        rows.append([subset.name.lower(), _accuracy(predicted, truth, Label.LOS),
                     _accuracy(predicted, truth, Label.NLOS), _accuracy(predicted, truth)])
        logger.info("subset %s: overall accuracy %.3f", subset.name, rows[-1][3])
    return pd.DataFrame(rows, columns=ACCURACY_COLUMNS)
