"""Train is a block which trains a model on the dataset and saves a checkpoint."""
import json
import logging

from lrea.core.block import Block
from lrea.core.checkpoint import save_checkpoint
from lrea.core.config import ModelConfig, TrainConfig
from lrea.core.training import train


def dataset_shapes(dataset):
    """ModelConfig values implied by a dataset: capacities and vocabulary sizes."""
    meta = dataset.meta
    examples = list(dataset) + list(meta.get('heldout') or [])
    shapes = {}
    if dataset:
        shapes['seq_len'] = dataset[0].sequence.seq_len
        shapes['short_len'] = dataset[0].sequence.short_len
    elif 'seq_len' in meta:
        shapes['seq_len'], shapes['short_len'] = meta['seq_len'], meta['short_len']
    if meta.get('vocab_size'):
        shapes['vocab_size'] = meta['vocab_size']
    elif examples:
        shapes['vocab_size'] = 1 + max(max(e.target_id, int(e.sequence.long_ids.max()),
                                           int(e.sequence.short_ids.max())) for e in examples)
    if meta.get('side_vocab_size'):
        shapes['side_vocab_size'] = meta['side_vocab_size']
    elif examples:
        shapes['side_vocab_size'] = 1 + max(max(e.side_ids, default=0) for e in examples)
    return shapes


def split_config_params(kwargs):
    """Pop ModelConfig and TrainConfig fields from block parameters."""
    model_args = {name: kwargs.pop(name) for name in ModelConfig.field_names() if name in kwargs}
    train_args = {name: kwargs.pop(name) for name in TrainConfig.field_names() if name in kwargs}
    return model_args, train_args


class Train(Block):
    """Train a model with Adagrad; every ModelConfig and TrainConfig field is a parameter.

    The trained LreaParams are stored in `dataset.meta['params']` for the following blocks.
    Model shapes not given as parameters are taken from the dataset.
    With a held-out part (`dataset.meta['heldout']`) the per-epoch AUC is measured on it.
    """

    def __init__(self, checkpoint=None, log=None, **kwargs):
        """Create the Train block object.

        Args:
        checkpoint: path of the JSON checkpoint to write
        log: path of the training log, one JSON record per epoch (epoch 0 is the initialization)
        """
        self.model_args, train_args = split_config_params(kwargs)
        super().__init__(**kwargs)
        self.train_config = TrainConfig.from_params(train_args)
        self.checkpoint = checkpoint
        self.log = log

    @classmethod
    def parameter_names(cls):
        return super().parameter_names() | set(ModelConfig.field_names()) | set(TrainConfig.field_names())

    def model_config(self, dataset):
        values = {**dataset_shapes(dataset), **self.model_args}
        if 'rank' not in values and 'seq_len' in values:
            values['rank'] = min(ModelConfig.rank, int(values['seq_len']))
        return ModelConfig.from_params(values)

    def process_dataset(self, dataset):
        model_config = self.model_config(dataset)
        logging.info('Training %s on %s\nmodel: %s\ntraining: %s', model_config.kind, dataset,
                     model_config, self.train_config)
        log_file = open(self.log, 'w', encoding='utf-8') if self.log else None
        try:
            def write_record(record):
                if log_file is not None:
                    print(json.dumps(record, sort_keys=True), file=log_file, flush=True)

            result = train(dataset, model_config, self.train_config,
                           eval_dataset=dataset.meta.get('heldout'), on_epoch=write_record)
        finally:
            if log_file is not None:
                log_file.close()
        dataset.meta['params'] = result.params
        dataset.meta['history'] = result.history
        if self.checkpoint:
            save_checkpoint(result.params, self.checkpoint,
                            meta={'train_config': self.train_config.as_dict(), 'history': result.history})
