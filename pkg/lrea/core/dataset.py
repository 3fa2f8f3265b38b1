"""Dataset class is a container for CTR examples."""
import numpy as np


class Dataset(object):
    """Dataset is an ordered container of Examples flowing through a block scenario.

    `meta` holds auxiliary information set by blocks, e.g. `loaded_from`
    (set by readers), `heldout` (a Dataset set by read.Synthetic)
    or `checkpoint` (set by model.Train).
    """

    def __init__(self, examples=None):
        self.examples = list(examples) if examples is not None else []
        self.meta = {}

    def __iter__(self):
        return iter(self.examples)

    def __getitem__(self, key):
        return self.examples[key]

    def __len__(self):
        return len(self.examples)

    def __bool__(self):
        return bool(self.examples)

    def __str__(self):
        return f"Dataset with {len(self)} examples, {len(self.user_ids())} users"

    def append(self, example):
        self.examples.append(example)

    def extend(self, examples):
        self.examples.extend(examples)

    @property
    def labels(self):
        return np.array([e.label for e in self.examples], dtype=np.int64)

    @property
    def groups(self):
        """The user id of every example (GAUC groups)."""
        return [e.user_id for e in self.examples]

    def user_ids(self):
        """Distinct user ids in order of first appearance."""
        return list(dict.fromkeys(e.user_id for e in self.examples))

    def user_sequences(self):
        """Map each user id to the sequence of its last example (the most recent state)."""
        sequences = {}
        for example in self.examples:
            sequences[example.user_id] = example.sequence
        return sequences

    def split(self, test_fraction, seed):
        """Deterministically split into (train, heldout) datasets."""
        if not 0 <= test_fraction < 1:
            raise ValueError(f"test_fraction must be in [0, 1), got {test_fraction}")
        order = np.random.default_rng(seed).permutation(len(self))
        n_test = int(round(len(self) * test_fraction))
        test_idx = set(order[:n_test].tolist())
        train = Dataset(e for i, e in enumerate(self.examples) if i not in test_idx)
        test = Dataset(e for i, e in enumerate(self.examples) if i in test_idx)
        return train, test

    def batches(self, batch_size, rng=None):
        """Yield lists of examples; shuffled by `rng` if given."""
        order = np.arange(len(self)) if rng is None else rng.permutation(len(self))
        for start in range(0, len(order), batch_size):
            yield [self.examples[i] for i in order[start:start + batch_size]]
