"""Adagrad optimizer over named LreaParams tensors."""
import numpy as np

from lrea.core.matrix import Matrix, DimensionError
from lrea.core.example import PADDING_ID

PADDING_TABLES = ('embedding', 'side_embedding')


class AdagradState(object):
    """Per-parameter accumulators of squared gradients, zero-initialised."""

    def __init__(self, params, epsilon=1e-8):
        self.epsilon = epsilon
        self.accumulators = {name: np.zeros(tensor.shape, dtype=tensor.dtype)
                             for name, tensor in params.items()}
        self.steps = 0


def adagrad_step(params, grads, state, lr):
    """Apply one update in place of `params` (tensors are replaced, not mutated).

    acc += g²;  θ -= lr·g / (√acc + ε);  padding rows of the embedding tables are re-zeroed.
    `grads` maps tensor names to Matrix (or ndarray) gradients; absent names are not updated.
    """
    for name, grad in grads.items():
        grad = grad.data if isinstance(grad, Matrix) else np.asarray(grad)
        theta = params[name].data
        if grad.shape != theta.shape:
            raise DimensionError(f"adagrad_step: gradient of {name} is {grad.shape}, parameter is {theta.shape}")
        acc = state.accumulators[name] + grad * grad
        state.accumulators[name] = acc
        updated = theta - lr * grad / (np.sqrt(acc) + state.epsilon)
        if name in PADDING_TABLES:
            updated[PADDING_ID] = 0.0
        params.assign(name, Matrix.wrap(updated.astype(theta.dtype, copy=False)))
    state.steps += 1
    return params, state
