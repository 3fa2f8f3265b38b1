"""Matrix is an immutable dense 2-D array; Tape records operations for reverse-mode gradients.

All differentiable operations in this module take and return `Matrix` objects.
When a `Tape` is active in the current thread, every operation appends one record
to it, so that `tape.gradient(loss, params)` can replay the forward pass backward::

    with Tape() as tape:
        loss = neg_part_sq_norm(matmul(a, b))
    grad_a, grad_b = tape.gradient(loss, [a, b])

Without an active tape nothing is recorded, which is what the serving path relies on.
Broadcasting is never implicit: use `broadcast_rows` to replicate a 1×n row.
"""
import contextlib
import threading

import numpy as np


class DimensionError(ValueError):
    """Operands of an operation have incompatible shapes."""


class Matrix(object):
    """Dense 2-D real matrix with shape metadata.

    The wrapped ndarray is read-only, so a Matrix can be shared freely between
    threads and tapes. Floating dtypes are kept (float32 for benchmarks),
    anything else is converted to float64.
    """

    __slots__ = ['_data']

    def __init__(self, data, dtype=None):
        if dtype is None:
            dtype = data.dtype if isinstance(data, np.ndarray) and data.dtype.kind == 'f' else np.float64
        array = np.array(data, dtype=dtype)
        if array.ndim == 0:
            array = array.reshape(1, 1)
        elif array.ndim == 1:
            array = array.reshape(1, -1)
        elif array.ndim > 2:
            raise DimensionError(f"Matrix must be 2-D, got an array of shape {array.shape}")
        if array.shape[0] < 1 or array.shape[1] < 1:
            raise DimensionError(f"Matrix must have positive rows and cols, got {array.shape}")
        array.flags.writeable = False
        self._data = array

    @classmethod
    def wrap(cls, array):
        """Wrap an ndarray produced by an operation without copying it."""
        matrix = cls.__new__(cls)
        array.flags.writeable = False
        matrix._data = array
        return matrix

    @classmethod
    def zeros(cls, rows, cols, dtype=np.float64):
        return cls.wrap(np.zeros((rows, cols), dtype=dtype))

    @classmethod
    def identity(cls, size, dtype=np.float64):
        return cls.wrap(np.eye(size, dtype=dtype))

    @property
    def data(self):
        """Read-only ndarray of shape (rows, cols)."""
        return self._data

    @property
    def rows(self):
        return self._data.shape[0]

    @property
    def cols(self):
        return self._data.shape[1]

    @property
    def shape(self):
        return self._data.shape

    @property
    def dtype(self):
        return self._data.dtype

    def astype(self, dtype):
        return Matrix.wrap(self._data.astype(dtype))

    def tolist(self):
        return self._data.tolist()

    def __float__(self):
        if self.shape != (1, 1):
            raise DimensionError(f"Only a 1x1 matrix converts to float, not {self.rows}x{self.cols}")
        return float(self._data[0, 0])

    def __len__(self):
        return self.rows

    def __repr__(self):
        return f"Matrix({self.rows}x{self.cols}, {self._data.dtype})"


_local = threading.local()


def _tape_stack():
    stack = getattr(_local, 'stack', None)
    if stack is None:
        stack = _local.stack = []
    return stack


def current_tape():
    """Return the tape recording in this thread, or None."""
    stack = _tape_stack()
    return stack[-1] if stack else None


@contextlib.contextmanager
def no_recording():
    """Evaluate operations without recording them on the active tape."""
    stack = _tape_stack()
    stack.append(None)
    try:
        yield
    finally:
        stack.pop()


class Tape(object):
    """Ordered record of primitive operations of one forward pass.

    A tape is single-owner: it is bound to the thread which entered it.
    Tapes of different threads are independent.
    """

    def __init__(self):
        self._records = []

    def __enter__(self):
        _tape_stack().append(self)
        return self

    def __exit__(self, *exc):
        stack = _tape_stack()
        if not stack or stack[-1] is not self:
            raise RuntimeError('Tape exited out of order')
        stack.pop()
        return False

    def __len__(self):
        return len(self._records)

    def record(self, output, inputs, backward):
        """Append one operation: `backward(grad_output)` returns one gradient (or None) per input."""
        self._records.append((output, inputs, backward))

    def gradient(self, target, sources):
        """Return d target / d source for each source as a list of Matrix.

        `target` must be a 1x1 Matrix produced while this tape was recording.
        Sources which do not influence the target get a zero gradient.
        """
        if target.shape != (1, 1):
            raise DimensionError(f"gradient target must be 1x1, got {target.rows}x{target.cols}")
        grads = {id(source): np.zeros(source.shape, dtype=source.dtype) for source in sources}
        grads[id(target)] = np.ones((1, 1), dtype=target.dtype)
        for output, inputs, backward in reversed(self._records):
            grad_output = grads.get(id(output))
            if grad_output is None:
                continue
            for operand, grad in zip(inputs, backward(grad_output)):
                if grad is None:
                    continue
                key = id(operand)
                if key in grads:
                    grads[key] = grads[key] + grad
                else:
                    grads[key] = grad
        return [Matrix.wrap(np.asarray(grads[id(source)])) for source in sources]


def record(output, inputs, backward):
    """Record an operation on the active tape (if any) and return `output`."""
    tape = current_tape()
    if tape is not None:
        tape.record(output, inputs, backward)
    return output


def _same_shape(name, a, b):
    if a.shape != b.shape:
        raise DimensionError(f"{name}: shapes {a.rows}x{a.cols} and {b.rows}x{b.cols} differ")


def matmul(a, b):
    """Standard matrix product a·b."""
    if a.cols != b.rows:
        raise DimensionError(f"matmul: cannot multiply {a.rows}x{a.cols} by {b.rows}x{b.cols}")
    out = Matrix.wrap(a.data @ b.data)
    return record(out, (a, b), lambda g: (g @ b.data.T, a.data.T @ g))


def hadamard(a, b):
    """Elementwise product of two matrices of identical shape."""
    _same_shape('hadamard', a, b)
    out = Matrix.wrap(a.data * b.data)
    return record(out, (a, b), lambda g: (g * b.data, g * a.data))


def add(a, b):
    _same_shape('add', a, b)
    out = Matrix.wrap(a.data + b.data)
    return record(out, (a, b), lambda g: (g, g))


def scale(a, factor):
    """Multiply by a constant (not differentiated)."""
    factor = float(factor)
    out = Matrix.wrap(a.data * factor)
    return record(out, (a,), lambda g: (g * factor,))


def transpose(a):
    out = Matrix.wrap(np.ascontiguousarray(a.data.T))
    return record(out, (a,), lambda g: (g.T,))


def broadcast_rows(a, rows):
    """Replicate a 1×n row `rows` times into a rows×n matrix."""
    if a.rows != 1:
        raise DimensionError(f"broadcast_rows: expected a 1xn row, got {a.rows}x{a.cols}")
    out = Matrix.wrap(np.repeat(a.data, rows, axis=0))
    return record(out, (a,), lambda g: (g.sum(axis=0, keepdims=True),))


def _leaky(a, slope):
    x = a.data
    positive = x >= 0
    out = Matrix.wrap(np.where(positive, x, x * slope))
    # the subgradient at exactly 0 is 1
    return record(out, (a,), lambda g: (np.where(positive, g, g * slope),))


def leaky_relu(a, slope=0.01):
    """Elementwise max(x, slope·x) with 0 < slope < 1."""
    if not 0 < slope < 1:
        raise ValueError(f"leaky_relu slope must be in (0, 1), got {slope}")
    return _leaky(a, slope)


def relu(a):
    return _leaky(a, 0.0)


def neg_part_sq_norm(a):
    """Sum of squares of the negative entries, Σ max(0, -a)², as a 1x1 matrix."""
    negative = np.maximum(0.0, -a.data)
    out = Matrix.wrap(np.array([[np.sum(negative * negative)]], dtype=a.dtype))
    return record(out, (a,), lambda g: (-2.0 * negative * g[0, 0],))


def sum_all(a):
    out = Matrix.wrap(np.array([[a.data.sum()]], dtype=a.dtype))
    return record(out, (a,), lambda g: (np.full(a.shape, g[0, 0], dtype=a.dtype),))


def sigmoid(a):
    x = a.data
    value = 0.5 * (1.0 + np.tanh(0.5 * x))
    out = Matrix.wrap(value)
    return record(out, (a,), lambda g: (g * value * (1.0 - value),))


def clip(a, low, high):
    """Clamp entries to [low, high]; clamped entries get zero gradient."""
    x = a.data
    inside = (x >= low) & (x <= high)
    out = Matrix.wrap(np.clip(x, low, high))
    return record(out, (a,), lambda g: (np.where(inside, g, 0.0),))


def take_rows(table, ids):
    """Gather rows `ids` of `table` (embedding lookup); gradients scatter-add back."""
    ids = np.asarray(ids, dtype=np.int64)
    if ids.ndim != 1 or len(ids) == 0:
        raise DimensionError(f"take_rows: expected a non-empty 1-D id list, got shape {ids.shape}")
    if ids.min() < 0 or ids.max() >= table.rows:
        bad = ids[(ids < 0) | (ids >= table.rows)][0]
        raise IndexError(f"id {bad} out of range for a table with {table.rows} rows")
    out = Matrix.wrap(table.data[ids])

    def backward(g):
        grad = np.zeros(table.shape, dtype=g.dtype)
        np.add.at(grad, ids, g)
        return (grad,)
    return record(out, (table,), backward)


def mean_rows(a):
    """Average of all rows, a 1×cols matrix."""
    out = Matrix.wrap(a.data.mean(axis=0, keepdims=True))
    return record(out, (a,), lambda g: (np.repeat(g / a.rows, a.rows, axis=0),))


def concat_cols(parts):
    """Join matrices with the same number of rows side by side."""
    parts = list(parts)
    rows = {p.rows for p in parts}
    if len(rows) != 1:
        raise DimensionError('concat_cols: row counts differ: '
                             + ', '.join(f"{p.rows}x{p.cols}" for p in parts))
    out = Matrix.wrap(np.concatenate([p.data for p in parts], axis=1))
    bounds = np.cumsum([p.cols for p in parts])[:-1]
    return record(out, tuple(parts), lambda g: tuple(np.split(g, bounds, axis=1)))


def concat_rows(parts):
    """Stack matrices with the same number of columns on top of each other."""
    parts = list(parts)
    cols = {p.cols for p in parts}
    if len(cols) != 1:
        raise DimensionError('concat_rows: column counts differ: '
                             + ', '.join(f"{p.rows}x{p.cols}" for p in parts))
    out = Matrix.wrap(np.concatenate([p.data for p in parts], axis=0))
    bounds = np.cumsum([p.rows for p in parts])[:-1]
    return record(out, tuple(parts), lambda g: tuple(np.split(g, bounds, axis=0)))


def detach(a):
    """Same values, but gradients do not flow back through the result."""
    return Matrix.wrap(a.data.copy())


def max_abs_diff(a, b):
    """Largest absolute entry of a - b (a diagnostic, never recorded)."""
    _same_shape('max_abs_diff', a, b)
    return float(np.max(np.abs(a.data - b.data)))
