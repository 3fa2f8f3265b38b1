"""Ranking metrics AUC and GAUC."""
import numpy as np


class UndefinedMetricError(ValueError):
    """The metric is undefined, e.g. AUC of a single-class sample."""


def _average_ranks(scores):
    """1-based ranks; tied scores share the average of their ranks."""
    order = np.argsort(scores, kind='mergesort')
    sorted_scores = scores[order]
    _, first, counts = np.unique(sorted_scores, return_index=True, return_counts=True)
    average = first + (counts + 1) / 2.0
    ranks = np.empty(len(scores), dtype=np.float64)
    ranks[order] = np.repeat(average, counts)
    return ranks


def auc(scores, labels):
    """Probability that a random positive outranks a random negative (ties count 1/2).

    Rank-sum (Mann-Whitney) formulation, O(N log N).
    """
    scores = np.asarray(scores, dtype=np.float64).ravel()
    labels = np.asarray(labels).ravel()
    if len(scores) != len(labels):
        raise ValueError(f"auc: {len(scores)} scores but {len(labels)} labels")
    positive = labels == 1
    n_pos = int(positive.sum())
    n_neg = len(labels) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise UndefinedMetricError(f"auc needs both classes, got {n_pos} positives and {n_neg} negatives")
    ranks = _average_ranks(scores)
    return float((ranks[positive].sum() - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


def gauc(scores, labels, group_ids):
    """Per-group AUC averaged with weights equal to the group sizes.

    Groups with a single class are skipped.
    """
    scores = np.asarray(scores, dtype=np.float64).ravel()
    labels = np.asarray(labels).ravel()
    group_ids = np.asarray(group_ids).ravel()
    if not len(scores) == len(labels) == len(group_ids):
        raise ValueError('gauc: scores, labels and group_ids differ in length')
    total, weights = 0.0, 0
    for group in np.unique(group_ids):
        members = group_ids == group
        group_labels = labels[members]
        n_pos = int((group_labels == 1).sum())
        if n_pos == 0 or n_pos == len(group_labels):
            continue
        total += len(group_labels) * auc(scores[members], group_labels)
        weights += len(group_labels)
    if weights == 0:
        raise UndefinedMetricError('gauc: no group contains both classes')
    return total / weights
