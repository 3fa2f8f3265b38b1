"""Example represents one training record: a user, a target item and the user's behaviors."""
import numpy as np

PADDING_ID = 0


def _fit(ids, capacity):
    """Keep the most recent `capacity` ids (oldest-first order) and right-pad with PADDING_ID."""
    ids = [int(i) for i in ids]
    if len(ids) > capacity:
        ids = ids[len(ids) - capacity:]
    fitted = np.zeros(capacity, dtype=np.int64)
    fitted[:len(ids)] = ids
    return fitted, len(ids)


class BehaviorSequence(object):
    """Long-term and short-term behavior ids of one user, padded to fixed capacities."""

    __slots__ = ['long_ids', 'short_ids', 'long_length', 'short_length']

    def __init__(self, long_ids, short_ids, long_length=None, short_length=None):
        self.long_ids = np.asarray(long_ids, dtype=np.int64)
        self.short_ids = np.asarray(short_ids, dtype=np.int64)
        self.long_length = int(np.count_nonzero(self.long_ids)) if long_length is None else long_length
        self.short_length = int(np.count_nonzero(self.short_ids)) if short_length is None else short_length
        self.long_ids.flags.writeable = False
        self.short_ids.flags.writeable = False

    @classmethod
    def from_ids(cls, long_ids, short_ids, seq_len, short_len):
        """Build a sequence from raw (oldest-first) ids, truncating to the most recent items."""
        long_fitted, long_length = _fit(long_ids, seq_len)
        short_fitted, short_length = _fit(short_ids, short_len)
        return cls(long_fitted, short_fitted, long_length, short_length)

    @property
    def seq_len(self):
        return len(self.long_ids)

    @property
    def short_len(self):
        return len(self.short_ids)

    def recent_long(self):
        """The unpadded long-sequence ids."""
        return self.long_ids[:self.long_length].tolist()

    def recent_short(self):
        return self.short_ids[:self.short_length].tolist()

    def __eq__(self, other):
        return (isinstance(other, BehaviorSequence)
                and np.array_equal(self.long_ids, other.long_ids)
                and np.array_equal(self.short_ids, other.short_ids))

    def __repr__(self):
        return f"BehaviorSequence(long={self.long_length}/{self.seq_len}, short={self.short_length}/{self.short_len})"


class Example(object):
    """One CTR record.

    user_id is a string (it only identifies a GAUC group and a cache key),
    item ids are integers, label is 0 or 1.
    """

    __slots__ = ['user_id', 'target_id', 'label', 'sequence', 'side_ids']

    def __init__(self, user_id, target_id, label, sequence, side_ids=()):
        if label not in (0, 1):
            raise ValueError(f"label must be 0 or 1, got {label!r}")
        self.user_id = str(user_id)
        self.target_id = int(target_id)
        self.label = int(label)
        self.sequence = sequence
        self.side_ids = tuple(int(i) for i in side_ids)

    def __eq__(self, other):
        return (isinstance(other, Example) and self.user_id == other.user_id
                and self.target_id == other.target_id and self.label == other.label
                and self.sequence == other.sequence and self.side_ids == other.side_ids)

    def __repr__(self):
        return f"Example(user={self.user_id}, target={self.target_id}, label={self.label})"

    def address(self):
        return f"{self.user_id}->{self.target_id}"
