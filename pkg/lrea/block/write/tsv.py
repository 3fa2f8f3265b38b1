"""Tsv class is a writer of behavior-log TSV files (the format read by read.Tsv)."""
from lrea.core.basewriter import BaseWriter


def format_line(example):
    """One TSV line (without the newline); padding is not written."""
    sequence = example.sequence
    return '\t'.join((example.user_id, str(example.target_id), str(example.label),
                      ','.join(map(str, sequence.recent_long())),
                      ','.join(map(str, sequence.recent_short())),
                      ','.join(map(str, example.side_ids))))


class Tsv(BaseWriter):
    """A writer of behavior-log TSV files."""

    def __init__(self, heldout=False, **kwargs):
        """Create the Tsv writer object.

        Args:
        heldout: write `dataset.meta['heldout']` (set by read.Synthetic test_fraction=...)
            instead of the dataset itself
        """
        super().__init__(**kwargs)
        self.heldout = heldout

    def process_dataset(self, dataset):
        if self.heldout:
            dataset = dataset.meta.get('heldout')
            if dataset is None:
                raise ValueError('heldout=1 but there is no held-out part, use read.Synthetic test_fraction=...')
        for example in dataset:
            print(format_line(example))
