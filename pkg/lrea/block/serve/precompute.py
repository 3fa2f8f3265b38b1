"""Precompute is a block which caches compressed user states for serving."""
from lrea.core.block import Block
from lrea.core.checkpoint import params_for
from lrea.core.serving import precompute


class Precompute(Block):
    """Build the state store of all users of the dataset (or of `users=u1,u2`).

    A user's state is computed from the behavior sequence of its last example.
    The store directory is replaced; `dataset.meta['store']` is set to the new StateStore.
    """

    def __init__(self, store, checkpoint=None, users=None, **kwargs):
        super().__init__(**kwargs)
        self.store = store
        self.checkpoint = checkpoint
        self.users = [u for u in str(users).split(',') if u] if users is not None else None

    def process_dataset(self, dataset):
        params = params_for(dataset, self.checkpoint)
        dataset.meta['store'] = precompute(dataset.user_sequences(), params, self.store, self.users)
