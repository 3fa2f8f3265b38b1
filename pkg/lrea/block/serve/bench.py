"""Bench is a block which times the serve path against the DIN long-sequence path."""
import json
import logging

from lrea.core.basewriter import BaseWriter
from lrea.core.checkpoint import load_checkpoint
from lrea.core.serving import bench


def _ints(value):
    if isinstance(value, int):
        return (value,)
    return tuple(int(v) for v in str(value).split(',') if v.strip())


class Bench(BaseWriter):
    """Print the JSON timing report {config, medians_ms, p90_ms, precompute_ms, ratios}.

    Example: `serve.Bench grid=128,1024,8192 B=32,64 r=32 d=16 repetitions=100 files=bench.json`.
    """

    def __init__(self, checkpoint=None, grid='128,1024,8192', B='32,64', r=32, d=16, h=36,
                 repetitions=100, warmup=10, users=8, seed=7, precision=32, **kwargs):
        """Create the Bench block object.

        Args:
        checkpoint: reuse the embeddings, attention and head weights (and d, h) of this checkpoint
        grid: sequence capacities L to measure
        B: numbers of candidates per request
        """
        super().__init__(**kwargs)
        self.checkpoint = checkpoint
        self.grid = _ints(grid)
        self.batch_sizes = _ints(B)
        self.rank, self.dim, self.hidden = r, d, h
        self.repetitions = repetitions
        self.warmup = warmup
        self.users = users
        self.seed = seed
        self.precision = precision

    def process_dataset(self, dataset):
        params = load_checkpoint(self.checkpoint) if self.checkpoint else None
        report = bench(params, grid=self.grid, batch_sizes=self.batch_sizes, rank=self.rank, dim=self.dim,
                       hidden=self.hidden, repetitions=self.repetitions, warmup=self.warmup,
                       n_users=self.users, seed=self.seed, precision=self.precision)
        for path, ratios in report['ratios'].items():
            logging.info('%s: %s', path, ratios)
        dataset.meta['bench'] = report
        print(json.dumps(report, indent=1, sort_keys=True))
