#!/usr/bin/env python3

import unittest

import numpy as np

from lrea.core.metrics import UndefinedMetricError, auc, gauc


def pairwise_auc(scores, labels):
    wins, pairs = 0.0, 0
    for score_pos, label_pos in zip(scores, labels):
        if label_pos != 1:
            continue
        for score_neg, label_neg in zip(scores, labels):
            if label_neg != 0:
                continue
            pairs += 1
            if score_pos > score_neg:
                wins += 1.0
            elif score_pos == score_neg:
                wins += 0.5
    return wins / pairs


def pairwise_gauc(scores, labels, groups):
    total, weights = 0.0, 0
    for group in sorted(set(groups)):
        members = [i for i, g in enumerate(groups) if g == group]
        group_labels = [labels[i] for i in members]
        if len(set(group_labels)) < 2:
            continue
        total += len(members) * pairwise_auc([scores[i] for i in members], group_labels)
        weights += len(members)
    return total / weights


class TestMetrics(unittest.TestCase):

    def test_auc_example(self):
        self.assertEqual(auc([0.9, 0.8, 0.3, 0.2], [1, 0, 1, 0]), 0.75)
        self.assertEqual(auc([0.1, 0.9], [0, 1]), 1.0)
        self.assertEqual(auc([0.5, 0.5, 0.5], [0, 1, 1]), 0.5)

    def test_auc_oracle(self):
        rng = np.random.default_rng(0)
        for trial in range(200):
            size = int(rng.integers(2, 300))
            # rounding produces many ties
            scores = np.round(rng.random(size), int(rng.integers(1, 4)))
            labels = rng.integers(0, 2, size=size)
            if labels.min() == labels.max():
                labels[0] = 1 - labels[0]
            self.assertLessEqual(abs(auc(scores, labels) - pairwise_auc(scores, labels)), 1e-9)

    def test_gauc_oracle(self):
        rng = np.random.default_rng(1)
        for trial in range(100):
            size = int(rng.integers(4, 200))
            scores = np.round(rng.random(size), 2)
            labels = rng.integers(0, 2, size=size)
            groups = [f"u{g}" for g in rng.integers(0, 6, size=size)]
            try:
                expected = pairwise_gauc(scores, labels, groups)
            except ZeroDivisionError:
                continue
            self.assertLessEqual(abs(gauc(scores, labels, groups) - expected), 1e-9)

    def test_gauc_weights_groups_by_size(self):
        scores = [0.9, 0.1, 0.2, 0.8, 0.7, 0.5]
        labels = [1, 0, 1, 0, 0, 1]
        groups = ['a', 'a', 'b', 'b', 'b', 'c']
        # a: 1.0 (2 examples), b: 0.0 (3 examples), c is single-class
        self.assertAlmostEqual(gauc(scores, labels, groups), 2.0 / 5.0)

    def test_auc_ignores_increasing_transforms(self):
        rng = np.random.default_rng(2)
        scores = np.round(rng.random(150), 2)
        labels = rng.integers(0, 2, size=150)
        expected = auc(scores, labels)
        for transform in (lambda x: 3 * x + 1, np.exp, lambda x: x ** 3):
            self.assertAlmostEqual(auc(transform(scores), labels), expected, delta=1e-12)

    def test_gauc_unchanged_by_duplicates(self):
        rng = np.random.default_rng(3)
        scores = np.round(rng.random(120), 2)
        labels = rng.integers(0, 2, size=120)
        groups = [f"u{g}" for g in rng.integers(0, 5, size=120)]
        doubled = gauc(np.concatenate([scores, scores]), np.concatenate([labels, labels]), groups + groups)
        self.assertAlmostEqual(doubled, gauc(scores, labels, groups), delta=1e-12)

    def test_undefined(self):
        with self.assertRaises(UndefinedMetricError):
            auc([0.1, 0.2], [1, 1])
        with self.assertRaises(UndefinedMetricError):
            gauc([0.1, 0.2], [1, 0], ['a', 'b'])
        with self.assertRaises(ValueError):
            auc([0.1, 0.2], [1])
        with self.assertRaises(ValueError):
            gauc([0.1, 0.2], [1, 0], ['a'])


if __name__ == "__main__":
    unittest.main()
