"""Auc is a block which evaluates a model and prints AUC and GAUC."""
import json

from termcolor import colored

from lrea.core.basewriter import BaseWriter, resolve_color
from lrea.core.checkpoint import params_for
from lrea.core.metrics import UndefinedMetricError, auc
from lrea.core.training import evaluate


class Auc(BaseWriter):
    """Print ranking metrics of a model on the dataset (or its held-out part).

    The model is the `checkpoint` or, if not given, the one trained by a previous block.
    When the dataset was generated, the AUC of the noise-free ground truth is printed too.
    """

    def __init__(self, checkpoint=None, on='data', batch_size=256, as_json=False, color='auto', **kwargs):
        """Create the Auc block object.

        Args:
        checkpoint: path of a JSON checkpoint
        on: evaluate on the `data` or on the `heldout` part (read.Synthetic test_fraction=...)
        as_json: print one JSON object instead of the human-readable table
        color: colorize the output? Default `auto` means only when printed to a console.
        """
        super().__init__(**kwargs)
        if on not in ('data', 'heldout'):
            raise ValueError(f"on must be data or heldout, got {on!r}")
        self.checkpoint = checkpoint
        self.on = on
        self.batch_size = batch_size
        self.as_json = as_json
        self.color = color

    def before_process_dataset(self, dataset):
        super().before_process_dataset(dataset)
        self.color = resolve_color(self.color)

    def process_dataset(self, dataset):
        params = params_for(dataset, self.checkpoint)
        target = dataset.meta.get('heldout') if self.on == 'heldout' else dataset
        if target is None:
            raise ValueError('on=heldout but there is no held-out part')
        result = evaluate(target, params, batch_size=self.batch_size)
        values = {'count': result.count, **result.as_dict()}
        truth = dataset.meta.get('truth')
        if truth is not None:
            try:
                values['oracle_auc'] = auc([truth.score(e) for e in target], target.labels)
            except UndefinedMetricError:
                values['oracle_auc'] = None
        dataset.meta['evaluation'] = values
        if self.as_json:
            print(json.dumps(values, sort_keys=True))
            return
        for name in ('auc', 'gauc', 'oracle_auc', 'ce', 'penalty', 'gap_mean', 'count'):
            if name in values:
                print(f"{name:10s} {self._format(name, values[name])}")

    def _format(self, name, value):
        if value is None:
            return 'undefined'
        if name == 'count':
            return str(value)
        text = f"{value:.4f}" if name in ('auc', 'gauc', 'oracle_auc') else f"{value:.6g}"
        if self.color and name in ('auc', 'gauc'):
            text = colored(text, 'green' if value >= 0.9 else 'yellow' if value > 0.5 else 'red', attrs=['bold'])
        return text
