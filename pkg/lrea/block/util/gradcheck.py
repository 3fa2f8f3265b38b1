"""GradCheck is a block which verifies the gradients of the full training loss."""
import json

import numpy as np
from termcolor import colored

from lrea.core.basewriter import BaseWriter, resolve_color
from lrea.core.config import ModelConfig
from lrea.core.example import BehaviorSequence, Example
from lrea.core.gradcheck import grad_check
from lrea.core.matrix import Matrix
from lrea.core.model import LreaParams
from lrea.core.training import total_loss


class GradCheckFailed(RuntimeError):
    """Some tape gradient disagrees with its finite-difference estimate."""


def tiny_batch(config, batch_size, rng):
    """Random examples fitting `config`, with partially padded sequences."""
    batch = []
    for index in range(batch_size):
        length = int(rng.integers(1, config.seq_len + 1))
        long_ids = rng.integers(1, config.vocab_size, size=length).tolist()
        short_ids = rng.integers(1, config.vocab_size, size=int(rng.integers(1, config.short_len + 1))).tolist()
        side_ids = rng.integers(1, config.side_vocab_size, size=2).tolist()
        sequence = BehaviorSequence.from_ids(long_ids, short_ids, config.seq_len, config.short_len)
        batch.append(Example(f"u{index}", int(rng.integers(1, config.vocab_size)), index % 2, sequence, side_ids))
    return batch


def check_total_loss(config, batch_size=3, lam=0.3, step=1e-5, tol=1e-4, seed=7):
    """Finite-difference check of total_loss w.r.t. every tensor of a float64 model."""
    rng = np.random.default_rng(seed)
    params = LreaParams.initialize(config, seed)
    if 'w_decomp' in params:
        # negative entries make the W_Decomp part of the penalty active
        params.assign('w_decomp', Matrix(rng.normal(size=params['w_decomp'].shape)))
    batch = tiny_batch(config, batch_size, rng)
    names = params.names()

    def loss(tensors):
        return total_loss(batch, LreaParams(config, dict(zip(names, tensors))), lam).total

    return grad_check(loss, params.tensors(), step=step, tol=tol, names=names)


class GradCheck(BaseWriter):
    """Print the maximum relative error per parameter tensor; raise GradCheckFailed if any exceeds `tol`.

    The default configuration (L=8, d=4, r=3, h=5, a batch of 3) takes a few seconds.
    """

    def __init__(self, kind='lrea', seq_len=8, short_len=3, dim=4, rank=3, hidden=5, head_sizes='6,4',
                 vocab_size=12, side_vocab_size=5, batch=3, lam=0.3, step=1e-5, tol=1e-4, seed=7,
                 activation='leaky_relu', as_json=False, color='auto', **kwargs):
        super().__init__(**kwargs)
        self.config = ModelConfig.from_params(dict(
            kind=kind, seq_len=seq_len, short_len=short_len, dim=dim, rank=rank, hidden=hidden,
            head_sizes=head_sizes, vocab_size=vocab_size, side_vocab_size=side_vocab_size,
            activation=activation))
        self.batch = batch
        self.lam = lam
        self.step = step
        self.tol = tol
        self.seed = seed
        self.as_json = as_json
        self.color = color

    def before_process_dataset(self, dataset):
        super().before_process_dataset(dataset)
        self.color = resolve_color(self.color)

    def process_dataset(self, dataset):
        report = check_total_loss(self.config, self.batch, self.lam, self.step, self.tol, self.seed)
        dataset.meta['gradcheck'] = report
        if self.as_json:
            print(json.dumps(report.as_dict(), sort_keys=True))
        else:
            for name, error in zip(report.names, report.max_errors):
                status = 'ok' if error <= self.tol else 'FAIL'
                if self.color:
                    status = colored(status, 'green' if status == 'ok' else 'red', attrs=['bold'])
                print(f"{name:16s} {error:10.3e}  {status}")
        if not report.passed:
            failing = dict(report.failures)
            worst = ', '.join(f"{name}{pos} analytic={a:.6g} numeric={n:.6g}"
                              for name, pos, a, n in report.worst_entries if name in failing)
            raise GradCheckFailed(f"gradient check failed (tol {self.tol:g}): {worst}")
