"""Synthetic CTR data with a known ground-truth click model.

Items belong to latent categories (orthonormal directions in `latent_dim` dimensions,
plus jitter), with the same number of items in every category. Every user has a few
interest categories with mixture weights; the user's history mostly samples items of
those categories, plus a fraction of random behaviors. Half of the targets come from
the user's interests, the other half from the remaining categories.

The click affinity of a target is the soft-attention-weighted similarity between
the target and the history items, so target attention models are well specified for it::

    a = Σ_i softmax_i(focus · v_t·v_i) · (v_t·v_i)
    label ~ Bernoulli(sigmoid(sharpness · (a - mean) / std / temperature + noise · ε)),  ε ~ N(0, 1)

With a moderate `focus` the affinity follows the share of the target's category in
the history; it is centred on its mean over the generated examples, which lies between
the interest and non-interest targets, so the noise-free labels are nearly separable.
The returned GroundTruth can score any example without noise (the Bayes-oracle scorer).
"""
import logging
from dataclasses import dataclass

import numpy as np

from lrea.core.config import DEFAULT_SEED, _FromDict
from lrea.core.dataset import Dataset
from lrea.core.example import BehaviorSequence, Example


@dataclass(frozen=True)
class SyntheticSpec(_FromDict):
    """Sizes and the click model of a generated dataset.

    latent_dim: dimension of the item vectors, also the number of item categories
    n_interests: interest categories per user
    focus: sharpness of the attention inside the affinity
    sharpness: scale of the standardized affinity in the click logit
    jitter: spread of the item vectors around their category direction
    behavior_noise: fraction of history items drawn uniformly from all items
    """
    n_users: int = 1000
    n_items: int = 200
    seq_len: int = 200
    short_len: int = 10
    n_examples: int = 25000
    seed: int = DEFAULT_SEED
    latent_dim: int = 4
    noise: float = 0.1
    temperature: float = 1.0
    n_interests: int = 2
    sharpness: float = 8.0
    focus: float = 2.0
    jitter: float = 0.3
    behavior_noise: float = 0.1
    side_vocab_size: int = 17
    n_side: int = 2

    def validate(self):
        for name in ('n_users', 'n_items', 'seq_len', 'short_len', 'n_examples', 'latent_dim',
                     'n_interests', 'side_vocab_size'):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if self.n_interests > self.latent_dim:
            raise ValueError('n_interests cannot exceed latent_dim (the number of categories)')
        if self.noise < 0 or self.temperature <= 0 or self.n_side < 0:
            raise ValueError('noise and n_side must be >= 0 and temperature > 0')
        if not 0 <= self.behavior_noise <= 1:
            raise ValueError(f"behavior_noise must be in [0, 1], got {self.behavior_noise}")

    @property
    def vocab_size(self):
        """Item vocabulary size including the padding id 0."""
        return self.n_items + 1


class GroundTruth(object):
    """Latents of a generated dataset and the noise-free click model."""

    def __init__(self, spec, item_vectors, categories, interests, center=0.0, spread=1.0):
        self.spec = spec
        self.item_vectors = item_vectors  # row 0 (padding) is zero
        self.categories = categories
        self.interests = interests
        self.center = center
        self.spread = spread

    def affinity(self, target_id, history):
        history = [i for i in history if i]
        if not history:
            return 0.0
        sims = self.item_vectors[history] @ self.item_vectors[target_id]
        weights = np.exp(self.spec.focus * (sims - sims.max()))
        return float(np.dot(weights / weights.sum(), sims))

    def calibrate(self, affinities):
        """Centre and scale the logits on the affinities of the generated examples."""
        self.center = float(np.mean(affinities))
        self.spread = float(np.std(affinities)) or 1.0

    def logits(self, affinities):
        return self.spec.sharpness * (np.asarray(affinities) - self.center) / self.spread / self.spec.temperature

    def score(self, example):
        """Bayes-oracle click probability of an example (no label noise)."""
        logit = self.logits(self.affinity(example.target_id, example.sequence.recent_long()))
        return float(1.0 / (1.0 + np.exp(-logit)))


class SyntheticData(object):
    def __init__(self, dataset, truth):
        self.dataset = dataset
        self.truth = truth


def _item_vectors(spec, rng):
    k = spec.latent_dim
    centroids, _ = np.linalg.qr(rng.normal(size=(k, k)))
    categories = np.concatenate([[-1], rng.permutation(np.arange(spec.n_items) % k)])
    vectors = np.zeros((spec.vocab_size, k))
    vectors[1:] = centroids[categories[1:]] + spec.jitter * rng.normal(size=(spec.n_items, k)) / np.sqrt(k)
    vectors[1:] /= np.linalg.norm(vectors[1:], axis=1, keepdims=True)
    return vectors, categories


def generate(spec):
    """Generate a dataset and its GroundTruth; a pure function of `spec`."""
    spec.validate()
    rng = np.random.default_rng(spec.seed)
    k = spec.latent_dim
    vectors, categories = _item_vectors(spec, rng)
    by_category = [np.flatnonzero(categories == c) for c in range(k)]
    by_category = [items if len(items) else np.arange(1, spec.vocab_size) for items in by_category]

    interests, histories = [], []
    for _ in range(spec.n_users):
        chosen = rng.choice(k, size=spec.n_interests, replace=False)
        mixture = rng.dirichlet(np.ones(spec.n_interests))
        length = int(rng.integers(max(1, spec.seq_len // 2), spec.seq_len + 1))
        picks = rng.choice(chosen, size=length, p=mixture)
        random_items = rng.random(length) < spec.behavior_noise
        history = [int(rng.integers(1, spec.vocab_size)) if random_items[pos]
                   else int(rng.choice(by_category[picks[pos]])) for pos in range(length)]
        interests.append((chosen, mixture))
        histories.append(history)

    rows = []
    for _ in range(spec.n_examples):
        user = int(rng.integers(spec.n_users))
        chosen, mixture = interests[user]
        others = np.setdiff1d(np.arange(k), chosen)
        if rng.random() < 0.5 or not len(others):
            category = rng.choice(chosen, p=mixture)
        else:
            category = rng.choice(others)
        target = int(rng.choice(by_category[category]))
        side = rng.integers(1, spec.side_vocab_size, size=spec.n_side) if spec.side_vocab_size > 1 \
            else np.zeros(spec.n_side, dtype=np.int64)
        rows.append((user, target, side.tolist()))

    truth = GroundTruth(spec, vectors, categories, interests)
    affinities = np.array([truth.affinity(target, histories[user]) for user, target, _ in rows])
    truth.calibrate(affinities)
    logits = truth.logits(affinities) + spec.noise * rng.normal(size=len(rows))
    labels = (rng.random(len(rows)) < 1.0 / (1.0 + np.exp(-logits))).astype(int)

    dataset = Dataset()
    sequences = [BehaviorSequence.from_ids(h, h[-spec.short_len:], spec.seq_len, spec.short_len)
                 for h in histories]
    for (user, target, side), label in zip(rows, labels):
        dataset.append(Example(f"u{user}", target, int(label), sequences[user], side))
    dataset.meta['generated_from'] = spec.as_dict()
    logging.info('Generated %d examples of %d users, click rate %.3f',
                 len(dataset), spec.n_users, labels.mean())
    return SyntheticData(dataset, truth)
