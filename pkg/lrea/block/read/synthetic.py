"""Synthetic is a reader block which generates a CTR dataset instead of loading it."""
import logging

from lrea.core.block import Block
from lrea.core.synthetic import SyntheticSpec, generate


class Synthetic(Block):
    """Fill the dataset with generated examples (see lrea.core.synthetic).

    Every SyntheticSpec field is a parameter, e.g.
    `read.Synthetic n_users=200 n_examples=5000 seq_len=64 noise=0.1 test_fraction=0.2`.
    With `test_fraction`, a deterministic part of the examples is held out
    in `dataset.meta['heldout']`.
    """

    def __init__(self, test_fraction=0.0, **kwargs):
        spec_args = {name: kwargs.pop(name) for name in SyntheticSpec.field_names() if name in kwargs}
        super().__init__(**kwargs)
        self.spec = SyntheticSpec.from_params(spec_args)
        self.test_fraction = test_fraction
        self.finished = False

    @classmethod
    def parameter_names(cls):
        return super().parameter_names() | set(SyntheticSpec.field_names())

    def process_dataset(self, dataset):
        if dataset:
            raise RuntimeError(f"{self.block_name()} must come before any block producing examples")
        data = generate(self.spec)
        train, heldout = data.dataset, None
        if self.test_fraction:
            train, heldout = data.dataset.split(self.test_fraction, self.spec.seed)
            logging.info('Held out %d of %d examples', len(heldout), len(data.dataset))
        dataset.extend(train)
        dataset.meta.update(data.dataset.meta)
        dataset.meta.update(truth=data.truth, heldout=heldout, vocab_size=self.spec.vocab_size,
                            side_vocab_size=self.spec.side_vocab_size, seq_len=self.spec.seq_len,
                            short_len=self.spec.short_len)
        self.finished = True
