import os
import shutil
import tempfile
import unittest

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from hmiwlan.errors import ConfigError, ContractViolation, FeatureError, SingleClassDataset
from hmiwlan.models import CirDataset, FeatureSubset, FeatureVector, Label
from hmiwlan.nlos import (DecisionTree, Forest, ForestParams, SyntheticCirParams, classify, evaluate_subsets,
                          extract_features, feature_matrix, feature_summary, feature_table, generate_dataset,
                          read_cirs, rician_k_estimate, train_forest, write_cirs)


class FixedTree(object):

    def __init__(self, label):
        self.label = int(label)

    def predict(self, x):
        return np.full(np.atleast_2d(x).shape[0], self.label)


def separable(n=200, seed=4):
    """Feature rows where sigma alone tells the classes apart."""
    rng = np.random.default_rng(seed)
    x = rng.uniform(0.0, 1.0, size=(2 * n, 4))
    x[:n, 1] = rng.uniform(0.0, 0.25, size=n)
    x[n:, 1] = rng.uniform(0.35, 1.0, size=n)
    y = np.concatenate([np.zeros(n, dtype=int), np.ones(n, dtype=int)])
    return x, y


class FeatureTestCase(unittest.TestCase):
    """Test case for CIR amplitude moments."""

    def test_constant_amplitude(self):
        """Test a flat CIR is flagged degenerate with zero higher moments."""
        features = extract_features(np.ones(4))
        self.assertEqual(features, FeatureVector(1.0, 0.0, 0.0, 0.0, True))

    def test_two_taps(self):
        """Test amplitudes [0, 2] give mean 1, spread 1, no skew and kurtosis 1."""
        features = extract_features(np.array([0.0, 2.0j]))
        self.assertAlmostEqual(features.mu, 1.0)
        self.assertAlmostEqual(features.sigma, 1.0)
        self.assertAlmostEqual(features.s, 0.0)
        self.assertAlmostEqual(features.kappa, 1.0)
        self.assertFalse(features.degenerate)

    def test_against_scipy(self):
        """Test the moments match population statistics from scipy."""
        taps = generate_dataset(SyntheticCirParams(n_per_class=100, seed=2)).taps
        values, degenerate = feature_matrix(taps)
        a = np.abs(taps)
        self.assertFalse(degenerate.any())
        self.assertLess(np.max(np.abs(values[:, 0] - a.mean(axis=1))), 1e-12)
        self.assertLess(np.max(np.abs(values[:, 1] - a.std(axis=1))), 1e-12)
        self.assertLess(np.max(np.abs(values[:, 2] - stats.skew(a, axis=1))), 1e-9)
        self.assertLess(np.max(np.abs(values[:, 3] - stats.kurtosis(a, axis=1, fisher=False))), 1e-9)

    @settings(max_examples=60, deadline=None)
    @given(st.lists(st.floats(min_value=0.01, max_value=100.0), min_size=2, max_size=32),
           st.floats(min_value=0.1, max_value=10.0))
    def test_scale_invariance(self, amplitudes, factor):
        """Test scaling the taps scales mean and spread and keeps the shape."""
        base = extract_features(np.array(amplitudes))
        scaled = extract_features(factor * np.array(amplitudes))
        if base.sigma <= 1e-3 * base.mu:
            return
        self.assertAlmostEqual(scaled.mu / base.mu, factor, delta=1e-9 * factor)
        self.assertAlmostEqual(scaled.sigma / base.sigma, factor, delta=1e-6 * factor)
        self.assertAlmostEqual(scaled.s, base.s, delta=1e-6 * max(1.0, abs(base.s)))
        self.assertAlmostEqual(scaled.kappa, base.kappa, delta=1e-6 * base.kappa)

    def test_too_few_taps(self):
        """Test a single tap carries no distribution."""
        with self.assertRaises(FeatureError):
            feature_matrix(np.ones((3, 1)))

    def test_table_and_summary(self):
        """Test the feature table has one row per CIR and the summary lists LOS first."""
        dataset = generate_dataset(SyntheticCirParams(n_per_class=100))
        table = feature_table(dataset)
        self.assertEqual(list(table.columns), ["label", "mu", "sigma", "s", "kappa", "degenerate"])
        self.assertEqual(len(table), 200)
        summary = feature_summary(table)
        self.assertEqual(list(summary["label"]), ["LOS", "NLOS"])


class SyntheticDatasetTestCase(unittest.TestCase):
    """Test case for the synthetic CIR generator."""

    def test_size_and_order(self):
        """Test n per class gives twice n CIRs, LOS first."""
        dataset = generate_dataset(SyntheticCirParams(n_per_class=500))
        self.assertEqual(len(dataset), 1000)
        self.assertEqual(dataset.tap_count, 16)
        self.assertEqual(dataset.count(Label.LOS), 500)
        self.assertEqual(int(dataset.labels[0]), Label.LOS)
        self.assertEqual(int(dataset.labels[-1]), Label.NLOS)

    def test_deterministic(self):
        """Test the same seed generates the same CIRs."""
        a = generate_dataset(SyntheticCirParams(n_per_class=100, seed=9))
        b = generate_dataset(SyntheticCirParams(n_per_class=100, seed=9))
        self.assertTrue(np.array_equal(a.taps, b.taps))
        c = generate_dataset(SyntheticCirParams(n_per_class=100, seed=10))
        self.assertFalse(np.array_equal(a.taps, c.taps))

    def test_rician_k(self):
        """Test the LOS first tap carries the configured K-factor within 1 dB."""
        params = SyntheticCirParams(n_per_class=4000, los_k_db=6.0)
        dataset = generate_dataset(params)
        k = rician_k_estimate(dataset.taps[:params.n_per_class, 0])
        self.assertAlmostEqual(10.0 * np.log10(k), 6.0, delta=1.0)

    def test_validation(self):
        """Test undersized sets and short CIRs are refused."""
        with self.assertRaises(ContractViolation):
            SyntheticCirParams(n_per_class=50)
        with self.assertRaises(ContractViolation):
            SyntheticCirParams(tap_count=4)


class ForestTestCase(unittest.TestCase):
    """Test case for decision trees and the random forest."""

    def test_separable_training_accuracy(self):
        """Test a set separable in sigma is learnt perfectly."""
        x, y = separable()
        forest = train_forest((x, y), FeatureSubset.S1, ForestParams(n_trees=5, bootstrap=False))
        self.assertTrue(np.array_equal(forest.predict(x), y))

    def test_single_tree_forest_is_a_tree(self):
        """Test one tree without bootstrap or feature sampling equals a plain tree."""
        dataset = generate_dataset(SyntheticCirParams(n_per_class=150, seed=3))
        x, _ = feature_matrix(dataset.taps)
        params = ForestParams(n_trees=1, bootstrap=False, max_features=4)
        forest = train_forest(dataset, FeatureSubset.S4, params)
        oracle = DecisionTree(max_depth=8, min_leaf=2).fit(x, dataset.labels)
        self.assertEqual(forest.trees[0].root, oracle.root)
        self.assertTrue(np.array_equal(forest.predict(x), oracle.predict(x)))

    def test_deterministic_structure(self):
        """Test the same seed grows the same trees, whatever the thread count."""
        x, y = separable(seed=8)
        y = y.copy()
        y[::7] = 1 - y[::7]
        params = ForestParams(n_trees=8)
        a = train_forest((x, y), FeatureSubset.S4, params, seed=5)
        b = train_forest((x, y), FeatureSubset.S4, params, seed=5, threads=3)
        self.assertEqual([t.root for t in a.trees], [t.root for t in b.trees])

    def test_shape_forest_ignores_scale(self):
        """Test scaling every test CIR leaves the skewness and kurtosis forest's labels unchanged."""
        train = generate_dataset(SyntheticCirParams(n_per_class=200, seed=11))
        test = generate_dataset(SyntheticCirParams(n_per_class=100, seed=12))
        forest = train_forest(train, FeatureSubset.S2, ForestParams(n_trees=15), seed=3)
        x, _ = feature_matrix(test.taps)
        expected = classify(forest, x)
        for factor in (7.5, 0.25):
            scaled, _ = feature_matrix(test.taps * factor)
            self.assertTrue(np.array_equal(classify(forest, scaled), expected), factor)
            self.assertFalse(np.allclose(scaled[:, 0], x[:, 0]))

    def test_tree_depth_limit(self):
        """Test a depth-zero tree is a single majority leaf."""
        x, y = separable()
        tree = DecisionTree(max_depth=0).fit(x, y)
        self.assertEqual(tree.depth, 0)
        self.assertEqual(tree.root, int(Label.LOS))

    def test_single_class(self):
        """Test training data with one class is refused."""
        x, _ = separable()
        with self.assertRaises(SingleClassDataset):
            train_forest((x, np.ones(x.shape[0], dtype=int)), FeatureSubset.S4)

    def test_unknown_labels_ignored(self):
        """Test UNKNOWN rows do not take part in training."""
        x, y = separable(n=100)
        labels = y.copy()
        labels[:10] = Label.UNKNOWN
        forest = train_forest((x, labels), FeatureSubset.S1, ForestParams(n_trees=3, bootstrap=False))
        self.assertTrue(np.array_equal(forest.predict(x[10:]), y[10:]))


class ClassifyTestCase(unittest.TestCase):
    """Test case for the forest vote."""

    def forest(self, *labels):
        return Forest(FeatureSubset.S4, ForestParams(n_trees=len(labels)), 0,
                      [FixedTree(label) for label in labels])

    def test_majority(self):
        """Test two LOS votes beat one NLOS vote."""
        self.assertEqual(classify(self.forest(Label.LOS, Label.LOS, Label.NLOS), np.zeros(4)), Label.LOS)
        self.assertEqual(classify(self.forest(Label.NLOS, Label.LOS, Label.NLOS), np.zeros(4)), Label.NLOS)

    def test_tie_goes_to_los(self):
        """Test an even split is LOS."""
        self.assertEqual(classify(self.forest(Label.LOS, Label.NLOS), np.zeros(4)), Label.LOS)

    def test_single_tree(self):
        """Test a one-tree forest returns that tree's label."""
        features = FeatureVector(1.0, 0.5, 0.1, 2.0)
        self.assertEqual(classify(self.forest(Label.NLOS), features), Label.NLOS)

    def test_matrix_input(self):
        """Test a feature matrix gives one label per row."""
        labels = classify(self.forest(Label.NLOS), np.zeros((3, 4)))
        self.assertEqual(list(labels), [1, 1, 1])

    def test_wrong_width(self):
        """Test feature vectors of the wrong length are refused."""
        with self.assertRaises(FeatureError):
            classify(self.forest(Label.LOS), np.zeros(3))


class EvaluationTestCase(unittest.TestCase):
    """Test case for per-subset accuracy."""

    def test_columns_and_determinism(self):
        """Test one row per subset and identical accuracies on repeat."""
        dataset = generate_dataset(SyntheticCirParams(n_per_class=150))
        params = ForestParams(n_trees=10)
        a = evaluate_subsets(dataset, params=params, seed=3)
        b = evaluate_subsets(dataset, params=params, seed=3, threads=2)
        self.assertEqual(list(a.columns), ["subset", "los_acc", "nlos_acc", "overall"])
        self.assertEqual(list(a["subset"]), ["s1", "s2", "s3", "s4"])
        self.assertTrue(((a[["los_acc", "nlos_acc", "overall"]] >= 0) & (a[["los_acc", "nlos_acc", "overall"]] <= 1))
                        .all().all())
        self.assertEqual(a.to_csv(index=False), b.to_csv(index=False))

    def test_separable_sigma(self):
        """Test sigma alone classifies a set without class overlap."""
        acc = evaluate_subsets(separable(), params=ForestParams(n_trees=15), subsets=(FeatureSubset.S1,))
        self.assertGreater(acc["overall"][0], 0.97)

    def test_subset_names(self):
        """Test subsets parse from their names."""
        self.assertIs(FeatureSubset.parse(" s3 "), FeatureSubset.S3)
        with self.assertRaises(ConfigError):
            FeatureSubset.parse("s5")


class CirFileTestCase(unittest.TestCase):
    """Test case for binary CIR files."""

    def setUp(self):
        self.tmp = tempfile.mkdtemp()
        self.path = os.path.join(self.tmp, "cirs.bin")
        self.dataset = generate_dataset(SyntheticCirParams(n_per_class=100, tap_count=8))

    def tearDown(self):
        shutil.rmtree(self.tmp)

    def test_round_trip(self):
        """Test a written dataset reads back with its size."""
        write_cirs(self.path, self.dataset)
        self.assertEqual(os.path.getsize(self.path), 8 + 200 * (16 * 8 + 1))
        loaded = read_cirs(self.path)
        self.assertTrue(np.array_equal(loaded.taps, self.dataset.taps))
        self.assertTrue(np.array_equal(loaded.labels, self.dataset.labels))

    def test_truncated(self):
        """Test a file shorter than its header announces is refused."""
        write_cirs(self.path, self.dataset)
        with open(self.path, "rb") as f:
            raw = f.read()
        with open(self.path, "wb") as f:
            f.write(raw[:-1])
        with self.assertRaises(ConfigError):
            read_cirs(self.path)

    def test_bad_label(self):
        """Test labels above UNKNOWN are refused."""
        write_cirs(self.path, CirDataset(self.dataset.taps[:2], [0, 1]))
        with open(self.path, "r+b") as f:
            f.seek(-1, os.SEEK_END)
            f.write(b"\x03")
        with self.assertRaises(ConfigError):
            read_cirs(self.path)


if __name__ == "__main__":
    unittest.main()
