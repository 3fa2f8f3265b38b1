#!/usr/bin/env python3

import unittest

import numpy as np

from lrea.core.metrics import auc
from lrea.core.synthetic import SyntheticSpec, generate

SMALL = SyntheticSpec(n_users=50, n_items=80, seq_len=20, short_len=4, n_examples=500)


class TestSynthetic(unittest.TestCase):

    def test_deterministic(self):
        first, second = generate(SMALL), generate(SMALL)
        self.assertEqual(list(first.dataset), list(second.dataset))
        np.testing.assert_array_equal(first.truth.item_vectors, second.truth.item_vectors)
        other = generate(SMALL.replace(seed=8))
        self.assertNotEqual(list(first.dataset), list(other.dataset))

    def test_structure(self):
        data = generate(SMALL)
        dataset = data.dataset
        self.assertEqual(len(dataset), 500)
        self.assertEqual(dataset.meta['generated_from'], SMALL.as_dict())
        for example in dataset:
            self.assertTrue(example.user_id.startswith('u'))
            self.assertTrue(1 <= example.target_id <= SMALL.n_items)
            self.assertEqual(len(example.side_ids), SMALL.n_side)
            self.assertTrue(all(1 <= s < SMALL.side_vocab_size for s in example.side_ids))
            sequence = example.sequence
            self.assertEqual(sequence.seq_len, 20)
            self.assertTrue(10 <= sequence.long_length <= 20)
            self.assertEqual(sequence.recent_short(), sequence.recent_long()[-4:])
            self.assertTrue(max(sequence.recent_long()) <= SMALL.n_items)
        np.testing.assert_array_equal(data.truth.item_vectors[0], 0)

    def test_noise_makes_labels_random(self):
        spec = SyntheticSpec(n_users=100, n_items=50, seq_len=5, short_len=2, n_examples=10000, noise=1e6)
        labels = generate(spec).dataset.labels
        self.assertLessEqual(abs(labels.mean() - 0.5), 0.02)

    def test_bayes_oracle(self):
        spec = SyntheticSpec(n_users=200, n_items=300, seq_len=50, short_len=5, n_examples=4000)
        data = generate(spec)
        _, test = data.dataset.split(0.25, spec.seed)
        scores = [data.truth.score(example) for example in test]
        self.assertGreaterEqual(auc(scores, test.labels), 0.95)
        self.assertLessEqual(abs(data.dataset.labels.mean() - 0.5), 0.08)

    def test_half_of_the_targets_match_interests(self):
        spec = SyntheticSpec(n_users=100, n_items=120, seq_len=30, short_len=5, n_examples=4000)
        data = generate(spec)
        truth, dataset = data.truth, data.dataset
        matches = [truth.categories[e.target_id] in truth.interests[int(e.user_id[1:])][0] for e in dataset]
        self.assertLessEqual(abs(np.mean(matches) - 0.5), 0.05)
        counts = np.bincount(truth.categories[1:], minlength=spec.latent_dim)
        self.assertEqual(counts.tolist(), [30] * spec.latent_dim)

    def test_affinity(self):
        truth = generate(SMALL).truth
        self.assertEqual(truth.affinity(3, []), 0.0)
        self.assertEqual(float(truth.logits(truth.center)), 0.0)
        self.assertEqual(truth.affinity(3, [0, 0]), 0.0)
        # item vectors have unit length
        self.assertAlmostEqual(truth.affinity(3, [3]), 1.0)

    def test_invalid_spec(self):
        for changes in ({'n_users': 0}, {'n_interests': 9}, {'behavior_noise': 2.0},
                        {'temperature': 0.0}, {'noise': -1.0}):
            with self.assertRaises(ValueError):
                SMALL.replace(**changes)
        with self.assertRaises(TypeError):
            SyntheticSpec.from_dict({'users': 3})
        self.assertEqual(SyntheticSpec.from_params({'noise': 1}).noise, 1.0)


if __name__ == "__main__":
    unittest.main()
