#!/usr/bin/env python3

import time
import unittest

import numpy as np

from lrea.block.util.gradcheck import check_total_loss
from lrea.core.config import ModelConfig
from lrea.core.gradcheck import EvaluationError, grad_check
from lrea.core.matrix import Matrix, hadamard, leaky_relu, matmul, record, sum_all

TINY = ModelConfig(kind='lrea', vocab_size=12, side_vocab_size=5, seq_len=8, short_len=3,
                   rank=3, dim=4, hidden=5, head_sizes=(6, 4))


def _wrong_square(a):
    """Squares `a` but reports a gradient of 3a instead of 2a."""
    out = Matrix.wrap(a.data * a.data)
    return record(out, (a,), lambda g: (3.0 * a.data * g,))


class TestGradCheck(unittest.TestCase):

    def test_correct_gradient_passes(self):
        rng = np.random.default_rng(1)
        a, b = Matrix(rng.normal(size=(3, 4))), Matrix(rng.normal(size=(4, 2)))
        report = grad_check(lambda p: sum_all(leaky_relu(matmul(p[0], p[1]))), [a, b], names=['a', 'b'])
        self.assertTrue(report.passed)
        self.assertEqual(report.names, ['a', 'b'])
        self.assertEqual(report.failures, [])
        self.assertEqual(set(report.as_dict()['max_errors']), {'a', 'b'})

    def test_wrong_gradient_fails(self):
        x = Matrix([[1.0, -2.0, 0.5]])
        report = grad_check(lambda p: sum_all(_wrong_square(p[0])), [x])
        self.assertFalse(report.passed)
        self.assertEqual([name for name, _ in report.failures], ['param0'])
        self.assertGreater(report.max_errors[0], 0.3)

    def test_non_finite_value(self):
        x = Matrix([[1.0]])
        with self.assertRaises(EvaluationError):
            grad_check(lambda p: sum_all(hadamard(p[0], Matrix([[np.nan]]))), [x])

    def test_total_loss_lrea(self):
        start = time.perf_counter()
        report = check_total_loss(TINY)
        self.assertLess(time.perf_counter() - start, 10.0)
        self.assertTrue(report.passed, report.failures)
        self.assertIn('w_decomp', report.names)
        self.assertIn('w_comp', report.names)

    def test_total_loss_relu(self):
        self.assertTrue(check_total_loss(TINY.replace(activation='relu'), seed=3).passed)

    def test_total_loss_din(self):
        report = check_total_loss(TINY.replace(kind='din'))
        self.assertTrue(report.passed, report.failures)
        self.assertNotIn('w_comp', report.names)

    def test_total_loss_short_only(self):
        self.assertTrue(check_total_loss(TINY.replace(kind='din_short')).passed)


if __name__ == "__main__":
    unittest.main()
