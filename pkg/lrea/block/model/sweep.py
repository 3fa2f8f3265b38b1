"""Sweep is a block which measures held-out AUC/GAUC across ranks, λ values and seeds."""
import json
import logging

import numpy as np

from lrea.block.model.train import Train
from lrea.core.basewriter import BaseWriter
from lrea.core.training import sweep


def _numbers(value, convert):
    if value is None or value == '':
        return []
    if isinstance(value, (int, float)):
        return [convert(value)]
    return [convert(v) for v in str(value).split(',') if v.strip()]


class Sweep(BaseWriter, Train):
    """Train one model per setting and print a JSON report.

    Example: `model.Sweep ranks=8,64 seeds=7,8,9 epochs=3 files=sweep.json`.
    Ranks are varied with the given `lam`, λ values with the given `rank`.
    The models are evaluated on `dataset.meta['heldout']` or, if there is none,
    on a `test_fraction` split of the dataset.
    """

    # Train parameters without a meaning for several models
    unused = ('checkpoint', 'log')

    def __init__(self, ranks=None, lambdas=None, seeds=None, test_fraction=0.2, **kwargs):
        given = [name for name in self.unused if kwargs.pop(name, None) is not None]
        if given:
            raise TypeError(f"{self.block_name()} trains one model per setting and saves none, "
                            f"so it does not accept {', '.join(given)}")
        super().__init__(**kwargs)
        self.ranks = _numbers(ranks, int)
        self.lambdas = _numbers(lambdas, float)
        self.seeds = _numbers(seeds, int)
        self.test_fraction = test_fraction

    @classmethod
    def parameter_names(cls):
        return super().parameter_names() - set(cls.unused)

    def process_dataset(self, dataset):
        train_set, test_set = dataset, dataset.meta.get('heldout')
        if test_set is None:
            train_set, test_set = dataset.split(self.test_fraction, self.train_config.seed)
        model_config = self.model_config(dataset)
        rows = sweep(train_set, test_set, model_config, self.train_config,
                     ranks=self.ranks, lambdas=self.lambdas, seeds=self.seeds)
        summary = {}
        for row in rows:
            summary.setdefault(f"rank={row['rank']} lambda={row['lambda']:g}", []).append(row['auc'])
        summary = {key: float(np.mean([a for a in aucs if a is not None])) if any(a is not None for a in aucs)
                   else None for key, aucs in summary.items()}
        for key, mean_auc in summary.items():
            logging.info('sweep %s: mean test AUC %s', key, mean_auc)
        dataset.meta['sweep'] = rows
        report = {'model_config': model_config.as_dict(), 'train_config': self.train_config.as_dict(),
                  'rows': rows, 'mean_auc': summary}
        print(json.dumps(report, indent=1, sort_keys=True))
