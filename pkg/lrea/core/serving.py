"""Serving pipeline: precompute compressed user states, score candidates, benchmark.

The serve path of a request only touches the cached d×r states of the user
(and the S short-sequence ids), never the raw length-L behavior sequence.
"""
import logging
import tempfile
import time
from dataclasses import dataclass, field
from typing import Tuple

import numpy as np

from lrea.core.config import DEFAULT_SEED, ModelConfig
from lrea.core.example import BehaviorSequence
from lrea.core.matrix import concat_rows, matmul, no_recording, transpose
from lrea.core.model import (LreaParams, din_attention, head_features, lookup_sequence,
                             lrea_attention_serve, mlp_head, probabilities)
from lrea.core.store import CompressedUserState, StateStore

BENCH_PATHS = ('lrea_serve', 'din_long')


def compress_user(user_id, sequence, params):
    """E_Comp = E_s^T·W_Comp and E_Auxabsorb = E_s^T·W_Decomp^T of one user (both d×r)."""
    if params.config.kind != 'lrea':
        raise ValueError(f"only lrea models have compressed states, this model is {params.config.kind}")
    with no_recording():
        e_s_t = transpose(lookup_sequence(params.embedding, sequence))
        e_comp = matmul(e_s_t, params['w_comp'])
        e_auxabsorb = matmul(e_s_t, transpose(params['w_decomp']))
    return CompressedUserState(str(user_id), e_comp, e_auxabsorb, params.version,
                               np.asarray(sequence.short_ids, dtype=np.int64))


def precompute(users, params, store_path, user_ids=None):
    """Write the compressed states of `users` (user id -> BehaviorSequence) to a StateStore.

    With `user_ids`, only those users are stored and an id missing from `users`
    raises KeyError. Running it twice with the same inputs gives a byte-identical store.
    """
    if user_ids is None:
        user_ids = sorted(users)
    unknown = [user_id for user_id in user_ids if user_id not in users]
    if unknown:
        raise KeyError(f"unknown user(s): {', '.join(map(str, unknown[:5]))}")
    states = (compress_user(user_id, users[user_id], params) for user_id in user_ids)
    config = params.config
    return StateStore.write(store_path, states, params.version, config.dim, config.rank, config.short_len)


@dataclass(frozen=True)
class ScoreRequest:
    user_id: str
    candidates: Tuple[int, ...]
    side_ids: Tuple[int, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, 'candidates', tuple(int(c) for c in self.candidates))
        object.__setattr__(self, 'side_ids', tuple(int(s) for s in self.side_ids))
        if not self.candidates:
            raise ValueError(f"request of user {self.user_id} has no candidates")

    @classmethod
    def from_line(cls, line):
        """Parse `user_id<TAB>candidate,ids[<TAB>side,ids]`."""
        fields = line.rstrip('\n').split('\t')
        if len(fields) not in (2, 3):
            raise ValueError(f"expected 2 or 3 tab-separated fields, got {len(fields)}")
        side = fields[2] if len(fields) == 3 else ''
        try:
            return cls(fields[0], _ids(fields[1]), _ids(side))
        except ValueError as err:
            raise ValueError(f"bad request {line.strip()!r}: {err}") from None


def _ids(text):
    return [int(value) for value in text.split(',') if value.strip()]


def _check_vocab(ids, size, what):
    for value in ids:
        if not 0 <= value < size:
            raise IndexError(f"{what} id {value} is outside the vocabulary [0, {size})")


def _head_probs(rows, params):
    return probabilities(mlp_head(concat_rows(rows), params)).data.ravel().tolist()


def score(request, store, params):
    """Click probabilities of request.candidates (in request order) via the absorbed path.

    Raises StaleCacheError if the store was built for other parameters and
    CacheMissError if the user has no cached state.
    """
    config = params.config
    _check_vocab(request.candidates, config.vocab_size, 'candidate')
    _check_vocab(request.side_ids, config.side_vocab_size, 'side')
    store.check_version(params.version)
    cached = store.get(request.user_id)
    state = CompressedUserState(cached.user_id, cached.e_comp.astype(params.dtype),
                                cached.e_auxabsorb.astype(params.dtype), cached.params_version,
                                cached.short_ids)
    rows = []
    with no_recording():
        for candidate in request.candidates:
            e_t = params.embedding.lookup([candidate])
            pooled = lrea_attention_serve(state, e_t, params)
            rows.append(head_features(pooled, state.short_ids, candidate, request.side_ids, params, e_t=e_t))
        return _head_probs(rows, params)


def score_din(request, sequence, params):
    """Reference long-sequence path: DIN attention over the raw L×d sequence for every candidate."""
    rows = []
    with no_recording():
        e_s = lookup_sequence(params.embedding, sequence)
        for candidate in request.candidates:
            e_t = params.embedding.lookup([candidate])
            pooled = din_attention(e_s, e_t, params.attention('att'))
            rows.append(head_features(pooled, sequence.short_ids, candidate, request.side_ids, params, e_t=e_t))
        return _head_probs(rows, params)


def _bench_params(base, seq_len, rank, seed, dtype):
    """Params of an lrea model with capacity `seq_len` built on the tensors of `base`.

    W_Comp and W_Decomp depend on L and are freshly initialised.
    """
    fresh = LreaParams.initialize(base.config.replace(kind='lrea', seq_len=seq_len, rank=rank), seed)
    for name, tensor in base.items():
        if name in fresh and name not in ('w_comp', 'w_decomp') and fresh[name].shape == tensor.shape:
            fresh.assign(name, tensor.astype(np.float64))
    return fresh.astype(dtype)


def _time_ms(func, request, repetitions, warmup):
    for _ in range(warmup):
        func(request)
    samples = []
    for _ in range(repetitions):
        start = time.perf_counter()
        func(request)
        samples.append((time.perf_counter() - start) * 1000.0)
    return samples


def bench(params=None, grid=(128, 1024, 8192), batch_sizes=(32, 64), rank=32, dim=16, hidden=36,
          repetitions=100, warmup=10, n_users=8, seed=DEFAULT_SEED, precision=32):
    """Time the absorbed serve path against the DIN long-sequence path.

    For every L in `grid` and B in `batch_sizes` the median and 90th percentile
    wall time (ms) of one request are measured for both paths. `params` may be
    a trained checkpoint whose embeddings, attention and head weights are reused.
    Returns the JSON-ready report {config, medians_ms, p90_ms, precompute_ms, ratios}.
    """
    if repetitions < 1 or not grid or not batch_sizes:
        raise ValueError('bench needs repetitions >= 1, a non-empty grid and batch sizes')
    dtype = np.float32 if precision == 32 else np.float64
    if params is None:
        base = LreaParams.initialize(ModelConfig(dim=dim, hidden=hidden, rank=rank, use_short=False), seed)
    else:
        base = params
    config = base.config
    rng = np.random.default_rng(seed)
    medians = {path: {} for path in BENCH_PATHS}
    p90 = {path: {} for path in BENCH_PATHS}
    precompute_ms = {}
    for seq_len in grid:
        seq_params = _bench_params(base, seq_len, rank, seed, dtype)
        users = {f"bench{u}": BehaviorSequence.from_ids(rng.integers(1, config.vocab_size, size=seq_len).tolist(),
                                                        rng.integers(1, config.vocab_size, size=config.short_len).tolist(),
                                                        seq_len, config.short_len)
                 for u in range(n_users)}
        with tempfile.TemporaryDirectory(prefix='lrea-bench-') as tmp:
            start = time.perf_counter()
            store = precompute(users, seq_params, tmp)
            precompute_ms[str(seq_len)] = (time.perf_counter() - start) * 1000.0
            for b in batch_sizes:
                user_id = f"bench{int(rng.integers(n_users))}"
                request = ScoreRequest(user_id, rng.integers(1, config.vocab_size, size=b).tolist(),
                                       rng.integers(1, config.side_vocab_size, size=1).tolist())
                timed = {
                    'lrea_serve': _time_ms(lambda req: score(req, store, seq_params), request, repetitions, warmup),
                    'din_long': _time_ms(lambda req: score_din(req, users[req.user_id], seq_params),
                                         request, repetitions, warmup),
                }
                for path, samples in timed.items():
                    medians[path].setdefault(str(seq_len), {})[str(b)] = float(np.median(samples))
                    p90[path].setdefault(str(seq_len), {})[str(b)] = float(np.percentile(samples, 90))
                logging.info('bench L=%d B=%d: lrea_serve %.3f ms, din_long %.3f ms', seq_len, b,
                             medians['lrea_serve'][str(seq_len)][str(b)], medians['din_long'][str(seq_len)][str(b)])
    report_config = {'grid': list(grid), 'B': list(batch_sizes), 'r': rank, 'd': config.dim,
                     'h': config.hidden, 'head_sizes': list(config.head_sizes), 'repetitions': repetitions,
                     'warmup': warmup, 'precision': precision, 'seed': seed,
                     'checkpoint_version': params.version if params is not None else None}
    return {'config': report_config, 'medians_ms': medians, 'p90_ms': p90,
            'precompute_ms': precompute_ms, 'ratios': _ratios(medians, grid, batch_sizes)}


def _ratios(medians, grid, batch_sizes):
    """Largest-L over smallest-L medians per B, and consecutive-B medians per L."""
    low, high = str(min(grid)), str(max(grid))
    ratios = {}
    for path in BENCH_PATHS:
        by_length = medians[path]
        ratios[f"{path}_L"] = {str(b): by_length[high][str(b)] / by_length[low][str(b)] for b in batch_sizes}
        ratios[f"{path}_B"] = {
            seq_len: {f"{b2}/{b1}": by_length[seq_len][str(b2)] / by_length[seq_len][str(b1)]
                      for b1, b2 in zip(batch_sizes[:-1], batch_sizes[1:])}
            for seq_len in by_length}
    return ratios
