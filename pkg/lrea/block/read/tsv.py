"""Tsv is a reader block for behavior-log files with one example per line.

The six tab-separated fields are::

    user_id  item_id  label  long_seq  short_seq  side

where the last three are comma-joined item ids in chronological order (oldest first)
and may be empty. Sequences longer than the capacity keep their most recent items.
"""
from typing import NamedTuple, Optional

import numpy as np

from lrea.core.basereader import BaseReader
from lrea.core.checkpoint import checkpoint_config
from lrea.core.dataset import Dataset
from lrea.core.example import BehaviorSequence, Example

FIELDS = ('user_id', 'item_id', 'label', 'long_seq', 'short_seq', 'side')
MAX_ID = int(np.iinfo(np.int64).max)


class MalformedLineError(ValueError):
    """A line of an input file does not match the expected format."""

    def __init__(self, filename, line_number, reason):
        super().__init__(f"{filename}:{line_number}: {reason}")
        self.filename = filename
        self.line_number = line_number


class Schema(NamedTuple):
    """Capacities and (optional) vocabulary sizes the loaded examples must fit."""
    seq_len: int = 200
    short_len: int = 10
    vocab_size: Optional[int] = None
    side_vocab_size: Optional[int] = None


def _parse_ids(text, field, vocab_size):
    ids = []
    for value in text.split(','):
        value = value.strip()
        if not value:
            continue
        if not value.isdigit():
            raise ValueError(f"{field}: {value!r} is not a non-negative integer id")
        item = int(value)
        if item > MAX_ID:
            raise ValueError(f"{field}: id {value} overflows the 64-bit id range")
        if vocab_size is not None and item >= vocab_size:
            raise ValueError(f"{field}: id {item} overflows the vocabulary size {vocab_size}")
        ids.append(item)
    return ids


def parse_line(line, schema):
    """Parse one line into an Example; raise ValueError describing the first problem."""
    fields = line.rstrip('\r\n').split('\t')
    if len(fields) != len(FIELDS):
        raise ValueError(f"expected {len(FIELDS)} tab-separated fields, got {len(fields)}")
    user_id, item, label, long_seq, short_seq, side = fields
    if not user_id:
        raise ValueError('empty user_id')
    if label not in ('0', '1'):
        raise ValueError(f"label must be 0 or 1, got {label!r}")
    targets = _parse_ids(item, 'item_id', schema.vocab_size)
    if len(targets) != 1 or targets[0] == 0:
        raise ValueError(f"item_id must be one positive id, got {item!r}")
    sequence = BehaviorSequence.from_ids(_parse_ids(long_seq, 'long_seq', schema.vocab_size),
                                         _parse_ids(short_seq, 'short_seq', schema.vocab_size),
                                         schema.seq_len, schema.short_len)
    return Example(user_id, targets[0], int(label), sequence,
                   _parse_ids(side, 'side', schema.side_vocab_size))


def iter_examples(filehandle, schema, filename='<input>'):
    for line_number, line in enumerate(filehandle, 1):
        if not line.strip():
            continue
        try:
            yield parse_line(line, schema)
        except ValueError as err:
            raise MalformedLineError(filename, line_number, err) from None


def load(path, schema=Schema()):
    """Load a whole file into a Dataset (FileNotFoundError if it does not exist)."""
    with open(path, encoding='utf-8') as filehandle:
        dataset = Dataset(iter_examples(filehandle, schema, str(path)))
    dataset.meta.update(loaded_from=str(path), seq_len=schema.seq_len, short_len=schema.short_len)
    return dataset


class Tsv(BaseReader):
    """A reader of behavior-log TSV files."""

    def __init__(self, seq_len=200, short_len=10, vocab_size=0, side_vocab_size=0, checkpoint=None,
                 heldout=False, **kwargs):
        """Create the Tsv reader object.

        Args:
        seq_len: capacity L of the long sequence
        short_len: capacity S of the short sequence
        vocab_size: reject item ids >= vocab_size (0 means no check)
        side_vocab_size: reject side ids >= side_vocab_size (0 means no check)
        checkpoint: take all four values above from the config of this checkpoint
        heldout: load the examples into `dataset.meta['heldout']` (e.g. a test set after the training data)
        """
        super().__init__(**kwargs)
        if checkpoint:
            config = checkpoint_config(checkpoint)
            seq_len, short_len = config.seq_len, config.short_len
            vocab_size, side_vocab_size = config.vocab_size, config.side_vocab_size
        self.schema = Schema(seq_len, short_len, vocab_size or None, side_vocab_size or None)
        self.heldout = heldout

    def read_examples(self):
        return iter_examples(self.filehandle, self.schema, self.filename)

    def process_dataset(self, dataset):
        if not self.heldout:
            super().process_dataset(dataset)
            return
        heldout = Dataset()
        super().process_dataset(heldout)
        dataset.meta['heldout'] = heldout

    def after_process_dataset(self, dataset):
        dataset.meta.update(seq_len=self.schema.seq_len, short_len=self.schema.short_len)
        if self.schema.vocab_size:
            dataset.meta['vocab_size'] = self.schema.vocab_size
        if self.schema.side_vocab_size:
            dataset.meta['side_vocab_size'] = self.schema.side_vocab_size
