#!/usr/bin/env python3

import unittest

import numpy as np

from lrea.core.adagrad import AdagradState, adagrad_step
from lrea.core.config import ModelConfig
from lrea.core.matrix import Matrix, DimensionError
from lrea.core.model import LreaParams

CONFIG = ModelConfig(vocab_size=6, side_vocab_size=3, seq_len=4, short_len=2, rank=2, dim=3,
                     hidden=2, head_sizes=(2,))


class TestAdagrad(unittest.TestCase):

    def test_two_steps(self):
        params = LreaParams.initialize(CONFIG, 1)
        state = AdagradState(params, epsilon=0.0)
        start = params['w_comp'].data.copy()
        grad = np.full(start.shape, 2.0)
        adagrad_step(params, {'w_comp': grad}, state, lr=0.1)
        # acc = 4, step = 0.1 * 2 / 2
        np.testing.assert_allclose(params['w_comp'].data, start - 0.1)
        adagrad_step(params, {'w_comp': grad}, state, lr=0.1)
        np.testing.assert_allclose(params['w_comp'].data, start - 0.1 - 0.2 / np.sqrt(8.0))
        self.assertEqual(state.steps, 2)

    def test_only_given_tensors_change(self):
        params = LreaParams.initialize(CONFIG, 1)
        before = params.copy()
        version = params.version
        adagrad_step(params, {'w_decomp': Matrix(np.ones((2, 4)))}, AdagradState(params), lr=0.01)
        self.assertNotEqual(params.version, version)
        self.assertIs(params['w_comp'], before['w_comp'])
        self.assertIsNot(params['w_decomp'], before['w_decomp'])
        # the previous tensor object is untouched
        self.assertFalse(np.allclose(params['w_decomp'].data, before['w_decomp'].data))

    def test_padding_row_stays_zero(self):
        params = LreaParams.initialize(CONFIG, 1)
        state = AdagradState(params)
        grad = np.ones((6, 3))
        for _ in range(3):
            adagrad_step(params, {'embedding': grad, 'side_embedding': np.ones((3, 3))}, state, lr=0.5)
        self.assertTrue(np.all(params['embedding'].data[0] == 0))
        self.assertTrue(np.all(params['side_embedding'].data[0] == 0))
        self.assertTrue(np.all(params['embedding'].data[1:] != 0))

    def test_float32_is_kept(self):
        params = LreaParams.initialize(CONFIG, 1, dtype=np.float32)
        adagrad_step(params, {'w_comp': np.ones((4, 2))}, AdagradState(params), lr=0.1)
        self.assertEqual(params['w_comp'].dtype, np.float32)

    def test_shape_mismatch(self):
        params = LreaParams.initialize(CONFIG, 1)
        with self.assertRaises(DimensionError):
            adagrad_step(params, {'w_comp': np.ones((2, 4))}, AdagradState(params), lr=0.1)


if __name__ == "__main__":
    unittest.main()
