"""Finite-difference verification of tape gradients."""
import logging
from dataclasses import dataclass, field

import numpy as np

from lrea.core.matrix import Matrix, Tape


class EvaluationError(ArithmeticError):
    """The checked function returned a non-finite value."""


@dataclass
class GradCheckReport:
    """Maximum relative error per checked parameter."""
    names: list
    max_errors: list
    tol: float
    worst_entries: list = field(default_factory=list)

    @property
    def passed(self):
        return all(error <= self.tol for error in self.max_errors)

    @property
    def failures(self):
        return [(name, error) for name, error in zip(self.names, self.max_errors) if error > self.tol]

    def as_dict(self):
        return {'tol': self.tol, 'passed': self.passed,
                'max_errors': dict(zip(self.names, self.max_errors))}


def _scalar(value):
    value = float(value)
    if not np.isfinite(value):
        raise EvaluationError(f"function evaluated to {value}")
    return value


def grad_check(func, params, step=1e-5, tol=1e-4, names=None, floor=1e-6):
    """Compare tape gradients of `func(params)` with central finite differences.

    `func` takes the list of Matrix parameters and returns a 1x1 Matrix.
    The relative error of an entry is |analytic - numeric| / max(|analytic|, |numeric|, floor),
    where `floor` keeps entries with a (near) zero gradient from dividing by rounding noise.
    Run it with float64 parameters.
    """
    params = list(params)
    if names is None:
        names = [f"param{i}" for i in range(len(params))]
    with Tape() as tape:
        value = func(params)
    _scalar(value)
    analytic = tape.gradient(value, params)

    max_errors, worst = [], []
    for index, (name, param) in enumerate(zip(names, params)):
        base = np.array(param.data, dtype=np.float64)
        numeric = np.zeros_like(base)
        for pos in np.ndindex(base.shape):
            shifted = base.copy()
            shifted[pos] += step
            plus = _scalar(func(params[:index] + [Matrix(shifted)] + params[index + 1:]))
            shifted[pos] -= 2 * step
            minus = _scalar(func(params[:index] + [Matrix(shifted)] + params[index + 1:]))
            numeric[pos] = (plus - minus) / (2 * step)
        grad = analytic[index].data
        denominator = np.maximum(np.maximum(np.abs(grad), np.abs(numeric)), floor)
        errors = np.abs(grad - numeric) / denominator
        pos = np.unravel_index(np.argmax(errors), errors.shape)
        max_errors.append(float(errors[pos]))
        worst.append((name, tuple(int(p) for p in pos), float(grad[pos]), float(numeric[pos])))
        logging.debug('grad_check %s: max relative error %.3g at %s', name, errors[pos], pos)
    return GradCheckReport(names=list(names), max_errors=max_errors, tol=tol, worst_entries=worst)
