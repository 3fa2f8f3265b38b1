"""Embeddings, target attention (DIN and LREA paths) and the prediction head.

Shapes follow the usual notation: L is the long-sequence capacity, r the rank,
d the embedding dimension and h the attention hidden width.
E_s is the L×d matrix of behavior embeddings, E_t the 1×d target embedding.
"""
import functools
import hashlib
import json
from typing import Callable, NamedTuple

import numpy as np

from lrea.core.matrix import (Matrix, DimensionError, add, broadcast_rows, clip, concat_cols,
                              concat_rows, hadamard, leaky_relu, matmul, max_abs_diff,
                              mean_rows, no_recording, relu, sigmoid, take_rows, transpose)
from lrea.core.store import StaleCacheError

PROB_FLOOR = 1e-7


class AttentionWeights(NamedTuple):
    """W_in split into W_1, W_2, W_3 (d×h each), W_o (h×1) and the activation φ."""
    w1: Matrix
    w2: Matrix
    w3: Matrix
    w_o: Matrix
    phi: Callable


class LreaOutput(NamedTuple):
    pooled: Matrix
    absorption_gap: float
    e_comp: Matrix


class EmbeddingTable(object):
    """Embedding weights whose row 0 is the (frozen, all-zero) padding row."""

    def __init__(self, weights):
        self.weights = weights

    @property
    def vocab_size(self):
        return self.weights.rows

    @property
    def dim(self):
        return self.weights.cols

    def lookup(self, ids):
        return take_rows(self.weights, ids)


def expected_shapes(config):
    """Return an ordered dict: tensor name -> (rows, cols) for a ModelConfig."""
    d, h = config.dim, config.hidden
    shapes = {'embedding': (config.vocab_size, d),
              'side_embedding': (config.side_vocab_size, d)}
    if config.kind == 'lrea':
        shapes['w_comp'] = (config.seq_len, config.rank)
        shapes['w_decomp'] = (config.rank, config.seq_len)
    prefixes = ['att'] if config.kind != 'din_short' else []
    if config.use_short:
        prefixes.append('short')
    for prefix in prefixes:
        for name in ('w1', 'w2', 'w3'):
            shapes[f"{prefix}.{name}"] = (d, h)
        shapes[f"{prefix}.w_o"] = (h, 1)
    width = head_input_width(config)
    for i, size in enumerate(config.head_sizes + (1,)):
        shapes[f"head.{i}.weight"] = (width, size)
        shapes[f"head.{i}.bias"] = (1, size)
        width = size
    return shapes


def head_input_width(config):
    parts = 2  # target embedding and pooled side features
    if config.kind != 'din_short':
        parts += 1
    if config.use_short:
        parts += 1
    return parts * config.dim


def _initial_tensor(name, shape, config, rng):
    rows, cols = shape
    if name in ('embedding', 'side_embedding'):
        values = rng.normal(0.0, 0.1, size=shape)
        values[0] = 0.0
    elif name == 'w_comp':
        values = rng.uniform(0.0, 1.0 / np.sqrt(config.seq_len), size=shape)
    elif name == 'w_decomp':
        values = np.abs(rng.normal(size=shape)) / np.sqrt(config.rank)
    elif name.endswith('.bias'):
        values = np.zeros(shape)
    elif name.startswith('head.'):
        values = rng.normal(0.0, np.sqrt(2.0 / rows), size=shape)
    else:
        values = rng.normal(0.0, 1.0 / np.sqrt(rows), size=shape)
    return values


class LreaParams(object):
    """All trainable tensors of one model, addressed by name.

    Tensors are immutable Matrix objects; training replaces them with `assign`,
    which also invalidates the cached params version.
    """

    def __init__(self, config, tensors, version=None):
        self.config = config
        self._tensors = {}
        shapes = expected_shapes(config)
        missing = set(shapes) - set(tensors)
        extra = set(tensors) - set(shapes)
        if missing or extra:
            raise ValueError(f"Tensors do not match the config: missing {sorted(missing)}, "
                             f"unexpected {sorted(extra)}")
        for name, shape in shapes.items():
            tensor = tensors[name]
            if tensor.shape != shape:
                raise DimensionError(f"{name}: expected {shape[0]}x{shape[1]}, "
                                     f"got {tensor.rows}x{tensor.cols}")
            self._tensors[name] = tensor
        self._version = version

    @classmethod
    def initialize(cls, config, seed, dtype=np.float64):
        """Create freshly initialised parameters; deterministic given `seed`."""
        config.validate()
        rng = np.random.default_rng(seed)
        tensors = {name: Matrix(_initial_tensor(name, shape, config, rng), dtype=dtype)
                   for name, shape in expected_shapes(config).items()}
        return cls(config, tensors)

    def __getitem__(self, name):
        return self._tensors[name]

    def __contains__(self, name):
        return name in self._tensors

    def __iter__(self):
        return iter(self._tensors)

    def names(self):
        return list(self._tensors)

    def items(self):
        return list(self._tensors.items())

    def tensors(self):
        return list(self._tensors.values())

    def assign(self, name, tensor):
        if tensor.shape != self._tensors[name].shape:
            raise DimensionError(f"{name}: cannot assign {tensor.rows}x{tensor.cols}, "
                                 f"expected {self._tensors[name].rows}x{self._tensors[name].cols}")
        self._tensors[name] = tensor
        self._version = None

    def copy(self):
        return LreaParams(self.config, dict(self._tensors), version=self._version)

    def astype(self, dtype):
        """Same checkpoint at another precision; the params version is kept."""
        tensors = {name: tensor.astype(dtype) for name, tensor in self._tensors.items()}
        return LreaParams(self.config, tensors, version=self.version)

    @property
    def dtype(self):
        return self._tensors['embedding'].dtype

    @property
    def version(self):
        """SHA-256 over the config and every tensor; any change of a value changes it."""
        if self._version is None:
            digest = hashlib.sha256()
            digest.update(json.dumps(self.config.as_dict(), sort_keys=True).encode('utf-8'))
            for name, tensor in self._tensors.items():
                digest.update(f"{name}:{tensor.rows}x{tensor.cols};".encode('utf-8'))
                digest.update(np.ascontiguousarray(tensor.data, dtype='<f8').tobytes())
            self._version = digest.hexdigest()
        return self._version

    @property
    def embedding(self):
        return EmbeddingTable(self._tensors['embedding'])

    @property
    def side_embedding(self):
        return EmbeddingTable(self._tensors['side_embedding'])

    @property
    def phi(self):
        if self.config.activation == 'relu':
            return relu
        return functools.partial(leaky_relu, slope=self.config.leaky_slope)

    def attention(self, prefix='att'):
        return AttentionWeights(self[f"{prefix}.w1"], self[f"{prefix}.w2"], self[f"{prefix}.w3"],
                                self[f"{prefix}.w_o"], self.phi)

    def head_layers(self):
        return [(self[f"head.{i}.weight"], self[f"head.{i}.bias"])
                for i in range(len(self.config.head_sizes) + 1)]


def lookup_sequence(table, seq):
    """Embed the long sequence: an L×d matrix whose padded rows are zero."""
    return table.lookup(seq.long_ids)


def lookup_short(table, seq):
    return table.lookup(seq.short_ids)


def din_attention(e_s, e_t, weights):
    """DIN target attention: E_s^T·AttScore, returned as a 1×d row.

    AttScore = φ[E_t·W_1 + E_s·W_2 + (E_t ⊙ E_s)·W_3]·W_o, with E_t broadcast to L rows.
    There are no bias terms, so zero (padded) rows of E_s contribute nothing.
    """
    if e_t.shape != (1, e_s.cols):
        raise DimensionError(f"din_attention: target must be 1x{e_s.cols}, got {e_t.rows}x{e_t.cols}")
    targets = broadcast_rows(e_t, e_s.rows)
    pre = add(add(matmul(targets, weights.w1), matmul(e_s, weights.w2)),
              matmul(hadamard(targets, e_s), weights.w3))
    score = matmul(weights.phi(pre), weights.w_o)
    return transpose(matmul(transpose(e_s), score))


def lrea_reconstruct(e_s, w_comp, w_decomp):
    """Low-rank reconstruction (E_s^T·W_Comp·W_Decomp)^T, an L×d matrix."""
    return transpose(matmul(matmul(transpose(e_s), w_comp), w_decomp))


def compressed_preactivation(e_comp, e_t, weights):
    """M = E_t·W_1 + E_Comp^T·W_2 + (E_t ⊙ E_Comp^T)·W_3 with E_t broadcast to r rows (r×h)."""
    if e_t.shape != (1, e_comp.rows):
        raise DimensionError(f"target must be 1x{e_comp.rows}, got {e_t.rows}x{e_t.cols}")
    comp_t = transpose(e_comp)
    targets = broadcast_rows(e_t, comp_t.rows)
    return add(add(matmul(targets, weights.w1), matmul(comp_t, weights.w2)),
               matmul(hadamard(targets, comp_t), weights.w3))


def lrea_attention_train(e_s, e_t, weights, w_comp, w_decomp):
    """Training path of the low-rank attention.

    Returns the unabsorbed output (E_s^T·φ(W_Decomp^T·M)·W_o)^T, through which
    gradients flow, the absorption gap (max-abs distance to the absorbed output
    ((E_s^T·W_Decomp^T)·φ(M)·W_o)^T, computed off the tape) and E_Comp = E_s^T·W_Comp.
    """
    if w_comp.rows != e_s.rows or w_decomp.shape != (w_comp.cols, e_s.rows):
        raise DimensionError(f"lrea_attention_train: E_s {e_s.rows}x{e_s.cols}, "
                             f"W_Comp {w_comp.rows}x{w_comp.cols}, W_Decomp {w_decomp.rows}x{w_decomp.cols}")
    e_s_t = transpose(e_s)
    e_comp = matmul(e_s_t, w_comp)
    m = compressed_preactivation(e_comp, e_t, weights)
    decomp_t = transpose(w_decomp)
    score = matmul(weights.phi(matmul(decomp_t, m)), weights.w_o)
    pooled = transpose(matmul(e_s_t, score))
    with no_recording():
        auxabsorb = matmul(e_s_t, decomp_t)
        absorbed = transpose(matmul(matmul(auxabsorb, weights.phi(m)), weights.w_o))
        gap = max_abs_diff(pooled, absorbed)
    return LreaOutput(pooled, gap, e_comp)


def lrea_attention_serve(state, e_t, params):
    """Absorbed path: (E_Auxabsorb·φ(M)·W_o)^T from the cached d×r state only."""
    if state.params_version != params.version:
        raise StaleCacheError(f"state of user {state.user_id} was built for params "
                              f"{state.params_version[:12]}, the model is {params.version[:12]}")
    return absorbed_attention(state.e_comp, state.e_auxabsorb, e_t, params.attention('att'))


def absorbed_attention(e_comp, e_auxabsorb, e_t, weights):
    m = compressed_preactivation(e_comp, e_t, weights)
    return transpose(matmul(matmul(e_auxabsorb, weights.phi(m)), weights.w_o))


def side_vector(side_ids, params):
    """Mean of the side-feature embeddings (1×d), zero if there are none."""
    if not side_ids:
        return Matrix.zeros(1, params.config.dim, dtype=params.dtype)
    return mean_rows(params.side_embedding.lookup(list(side_ids)))


def head_features(long_pooled, short_ids, target_id, side_ids, params, e_t=None):
    """Concatenate the pooled branches, target embedding and side vector into one 1×W row."""
    config = params.config
    if e_t is None:
        e_t = params.embedding.lookup([target_id])
    parts = []
    if config.kind != 'din_short':
        parts.append(long_pooled)
    if config.use_short:
        parts.append(din_attention(params.embedding.lookup(short_ids), e_t, params.attention('short')))
    parts.append(e_t)
    parts.append(side_vector(side_ids, params))
    return concat_cols(parts)


def mlp_head(features, params):
    """Leaky-ReLU MLP over N×W features, returning N×1 logits."""
    layers = params.head_layers()
    x = features
    for i, (weight, bias) in enumerate(layers):
        x = add(matmul(x, weight), broadcast_rows(bias, x.rows))
        if i < len(layers) - 1:
            x = leaky_relu(x, params.config.leaky_slope)
    return x


def probabilities(logits):
    """Sigmoid, clamped to [1e-7, 1 - 1e-7]."""
    return clip(sigmoid(logits), PROB_FLOOR, 1.0 - PROB_FLOOR)


class ForwardResult(NamedTuple):
    probs: Matrix
    e_comps: list
    gaps: list


def forward(examples, params):
    """Training-path forward pass of a batch; records on the active tape if any."""
    config = params.config
    rows, e_comps, gaps = [], [], []
    for example in examples:
        e_t = params.embedding.lookup([example.target_id])
        long_pooled = None
        if config.kind == 'lrea':
            e_s = lookup_sequence(params.embedding, example.sequence)
            out = lrea_attention_train(e_s, e_t, params.attention('att'), params['w_comp'], params['w_decomp'])
            long_pooled = out.pooled
            e_comps.append(out.e_comp)
            gaps.append(out.absorption_gap)
        elif config.kind == 'din':
            e_s = lookup_sequence(params.embedding, example.sequence)
            long_pooled = din_attention(e_s, e_t, params.attention('att'))
        rows.append(head_features(long_pooled, example.sequence.short_ids, example.target_id,
                                  example.side_ids, params, e_t=e_t))
    probs = probabilities(mlp_head(concat_rows(rows), params))
    return ForwardResult(probs, e_comps, gaps)


def predict(example, params):
    """Click probability of one example (training path)."""
    with no_recording():
        return float(forward([example], params).probs)
