"""Losses, the Adagrad training loop, evaluation and hyper-parameter sweeps."""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from lrea.core.adagrad import AdagradState, adagrad_step
from lrea.core.matrix import (Matrix, Tape, add, detach, matmul, neg_part_sq_norm, no_recording,
                              record, scale, transpose)
from lrea.core.metrics import UndefinedMetricError, auc, gauc
from lrea.core.model import LreaParams, forward, lookup_sequence


class TrainingDivergedError(ArithmeticError):
    """The training loss became NaN or infinite."""


def cross_entropy(probs, labels):
    """Mean binary cross-entropy -(1/N)·Σ[y·log p + (1-y)·log(1-p)] as a 1x1 Matrix.

    `probs` is an N×1 (or 1×N) Matrix of probabilities in (0, 1), differentiable.
    """
    if not isinstance(probs, Matrix):
        probs = Matrix(np.asarray(probs, dtype=np.float64).reshape(-1, 1))
    labels = np.asarray(labels, dtype=np.float64).reshape(probs.shape)
    count = labels.size
    if count == 0:
        raise ValueError('cross_entropy of an empty batch')
    p = probs.data
    value = -np.sum(labels * np.log(p) + (1.0 - labels) * np.log(1.0 - p)) / count
    out = Matrix.wrap(np.array([[value]], dtype=p.dtype))
    return record(out, (probs,), lambda g: (-g[0, 0] * (labels / p - (1.0 - labels) / (1.0 - p)) / count,))


def non_neg_loss(w_decomp, e_comp_t):
    """‖max(0, -W_Decomp^T)‖² + ‖max(0, -W_Comp^T·E_s)‖², with e_comp_t = W_Comp^T·E_s (r×d)."""
    return add(neg_part_sq_norm(transpose(w_decomp)), neg_part_sq_norm(e_comp_t))


class LossTerms(NamedTuple):
    total: Matrix
    ce: float
    penalty: float
    gap_mean: float
    probs: Matrix


def _sequence_penalty(batch, params, e_comps, stop_penalty_gradient):
    """Mean over the batch of ‖max(0, -W_Comp^T·E_s)‖²."""
    terms = []
    for example, e_comp in zip(batch, e_comps):
        if stop_penalty_gradient:
            e_s = detach(lookup_sequence(params.embedding, example.sequence))
            e_comp_t = matmul(transpose(params['w_comp']), e_s)
        else:
            e_comp_t = transpose(e_comp)
        terms.append(neg_part_sq_norm(e_comp_t))
    total = terms[0]
    for term in terms[1:]:
        total = add(total, term)
    return scale(total, 1.0 / len(terms))


def total_loss(batch, params, lam, stop_penalty_gradient=False):
    """Cross-entropy + λ·non-negativity penalty of one batch.

    The penalty averages the E_Comp term over the examples and adds the
    batch-independent W_Decomp term once. DIN models have no penalty.
    """
    if lam < 0:
        raise ValueError(f"lambda must be >= 0, got {lam}")
    result = forward(batch, params)
    ce = cross_entropy(result.probs, [e.label for e in batch])
    if params.config.kind != 'lrea':
        return LossTerms(ce, float(ce), 0.0, 0.0, result.probs)
    penalty = add(_sequence_penalty(batch, params, result.e_comps, stop_penalty_gradient),
                  neg_part_sq_norm(transpose(params['w_decomp'])))
    total = add(ce, scale(penalty, lam))
    return LossTerms(total, float(ce), float(penalty), float(np.mean(result.gaps)), result.probs)


def batch_gradients(batch, params, config, executor=None):
    """Gradients of total_loss w.r.t. every tensor, sharded over `executor` threads.

    Shard results are combined with weights n_shard/N in shard order,
    so the outcome does not depend on the number of threads.
    """
    names = params.names()
    sources = params.tensors()

    def shard_gradients(shard):
        with Tape() as tape:
            terms = total_loss(shard, params, config.lam, config.stop_penalty_gradient)
        return terms, tape.gradient(terms.total, sources)

    shards = [batch]
    if executor is not None and config.threads > 1 and len(batch) > 1:
        bounds = np.linspace(0, len(batch), min(config.threads, len(batch)) + 1).astype(int)
        shards = [batch[start:end] for start, end in zip(bounds[:-1], bounds[1:])]
        results = list(executor.map(shard_gradients, shards))
    else:
        results = [shard_gradients(batch)]

    grads = {name: np.zeros(tensor.shape, dtype=tensor.dtype) for name, tensor in params.items()}
    stats = np.zeros(4)
    for shard, (terms, shard_grads) in zip(shards, results):
        weight = len(shard) / len(batch)
        for name, grad in zip(names, shard_grads):
            grads[name] = grads[name] + weight * grad.data
        stats += weight * np.array([float(terms.total), terms.ce, terms.penalty, terms.gap_mean])
    return grads, stats


@dataclass
class EvalResult:
    ce: float
    penalty: float
    gap_mean: float
    auc: float
    gauc: float
    count: int
    scores: np.ndarray = field(default=None, repr=False)

    def as_dict(self):
        return {'ce': self.ce, 'penalty': self.penalty, 'gap_mean': self.gap_mean,
                'auc': self.auc, 'gauc': self.gauc}


def _safe_metric(metric, *args):
    try:
        return metric(*args)
    except UndefinedMetricError as err:
        logging.warning('%s', err)
        return None


def evaluate(dataset, params, batch_size=256, lam=0.0):
    """Forward-only pass: mean CE, mean penalty, mean absorption gap, AUC and GAUC."""
    if not dataset:
        raise ValueError('cannot evaluate an empty dataset')
    scores, ce_sum, penalty_sum, gap_sum = [], 0.0, 0.0, 0.0
    with no_recording():
        for batch in dataset.batches(batch_size):
            terms = total_loss(batch, params, lam)
            scores.append(terms.probs.data.ravel())
            ce_sum += terms.ce * len(batch)
            penalty_sum += terms.penalty * len(batch)
            gap_sum += terms.gap_mean * len(batch)
    scores = np.concatenate(scores)
    count = len(dataset)
    return EvalResult(ce=ce_sum / count, penalty=penalty_sum / count, gap_mean=gap_sum / count,
                      auc=_safe_metric(auc, scores, dataset.labels),
                      gauc=_safe_metric(gauc, scores, dataset.labels, dataset.groups),
                      count=count, scores=scores)


@dataclass
class TrainResult:
    params: LreaParams
    history: list


def _epoch_record(epoch, ce, penalty, gap_mean, evaluation):
    return {'epoch': epoch, 'ce': ce, 'penalty': penalty, 'gap_mean': gap_mean,
            'auc': evaluation.auc, 'gauc': evaluation.gauc}


def train(dataset, model_config, train_config, eval_dataset=None, on_epoch=None):
    """Train a model with Adagrad on total_loss; deterministic given train_config.seed.

    The history starts with an epoch-0 record measured at initialisation.
    For later epochs ce, penalty and gap_mean are averages over the epoch's batches
    and auc/gauc are measured on `eval_dataset` (or on `dataset` if None).
    `on_epoch(record)` is called for every record.
    """
    if not dataset:
        raise ValueError('cannot train on an empty dataset')
    train_config.validate()
    dtype = np.float32 if train_config.precision == 32 else np.float64
    params = LreaParams.initialize(model_config, train_config.seed, dtype=dtype)
    state = AdagradState(params, train_config.epsilon)
    shuffle_rng = np.random.default_rng([train_config.seed, 1])
    eval_dataset = eval_dataset if eval_dataset is not None else dataset
    history = []

    def emit(record):
        history.append(record)
        logging.info('epoch %(epoch)d: ce=%(ce).5f penalty=%(penalty).5g gap=%(gap_mean).3g '
                     'auc=%(auc)s gauc=%(gauc)s', record)
        if on_epoch is not None:
            on_epoch(record)

    initial = evaluate(dataset, params, lam=train_config.lam)
    evaluation = initial if eval_dataset is dataset else evaluate(eval_dataset, params)
    emit(_epoch_record(0, initial.ce, initial.penalty, initial.gap_mean, evaluation))

    executor = ThreadPoolExecutor(train_config.threads) if train_config.threads > 1 else None
    try:
        for epoch in range(1, train_config.epochs + 1):
            sums, seen = np.zeros(4), 0
            for batch_no, batch in enumerate(dataset.batches(train_config.batch_size, shuffle_rng)):
                grads, stats = batch_gradients(batch, params, train_config, executor)
                if not np.all(np.isfinite(stats)):
                    raise TrainingDivergedError(
                        f"loss became non-finite at epoch {epoch}, batch {batch_no}: "
                        f"total={stats[0]} ce={stats[1]} penalty={stats[2]} gap={stats[3]}")
                adagrad_step(params, grads, state, train_config.learning_rate)
                sums += stats * len(batch)
                seen += len(batch)
                logging.debug('epoch %d batch %d: loss %.5f', epoch, batch_no, stats[0])
            means = sums / seen
            evaluation = evaluate(eval_dataset, params)
            emit(_epoch_record(epoch, means[1], means[2], means[3], evaluation))
    finally:
        if executor is not None:
            executor.shutdown()
    return TrainResult(params, history)


def sweep(dataset, test_dataset, model_config, train_config, ranks=(), lambdas=(), seeds=None):
    """Train one model per (rank or λ, seed) setting and report held-out AUC/GAUC.

    Ranks are varied with λ fixed at train_config.lam and λ values with the
    rank fixed at model_config.rank.
    """
    seeds = list(seeds) if seeds else [train_config.seed]
    settings = [(int(rank), train_config.lam) for rank in ranks]
    settings += [(model_config.rank, float(lam)) for lam in lambdas]
    if not settings:
        settings = [(model_config.rank, train_config.lam)]
    rows = []
    for rank, lam in settings:
        for seed in seeds:
            logging.info('sweep: rank=%d lambda=%g seed=%d', rank, lam, seed)
            result = train(dataset, model_config.replace(rank=rank), train_config.replace(lam=lam, seed=seed))
            evaluation = evaluate(test_dataset, result.params)
            rows.append({'rank': rank, 'lambda': lam, 'seed': seed,
                         'auc': evaluation.auc, 'gauc': evaluation.gauc})
    return rows
