"""Matrix Frequent Directions with a ``2*ell``-row buffer.

This is the ``n3 = 1`` special case of t-FD and the engine behind the
matricized baseline. The buffer is shrunk with the ``ell``-th singular value
of the full ``2*ell``-row buffer, so every shrink zeroes at least ``ell + 1``
rows.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .exceptions import DimensionError, NumericalError


@dataclass
class FdState:
    """Live matrix FD state.

    ``fill`` counts the leading rows that may be nonzero; rows at index
    ``fill`` and beyond are exactly zero. ``n_shrinks`` counts shrink steps.
    """

    buffer: np.ndarray
    ell: int
    fill: int = 0
    loss_sum: float = 0.0
    n_shrinks: int = 0
    deltas: list = field(default_factory=list)

    @property
    def d(self) -> int:
        return self.buffer.shape[1]


def shrink_rows(m: np.ndarray, ell: int, out: np.ndarray | None = None):
    """One FD shrink of a ``(rows, d)`` matrix, real or complex.

    Returns ``(b, delta, kept)`` where ``b`` has the shape of ``m``, its rows
    from ``kept`` on are zero, and ``delta`` is the squared ``ell``-th
    singular value of ``m`` (zero when ``m`` has fewer than ``ell`` of them).
    ``out`` may be ``m`` itself or a view of the same shape; the result is
    then written there.
    """
    try:
        _, s, vh = np.linalg.svd(m, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalError("SVD did not converge during shrink") from exc
    delta = float(s[ell - 1] ** 2) if s.size >= ell else 0.0
    shrunk = np.sqrt(np.maximum(s**2 - delta, 0.0))
    kept = int(np.count_nonzero(shrunk > 0.0))
    b = np.zeros_like(m) if out is None else out
    b[kept:] = 0
    vh = vh[:kept]
    vh *= shrunk[:kept, None]
    b[:kept] = vh
    return b, delta, kept


def fd_init(ell: int, d: int) -> FdState:
    if ell < 1:
        raise ValueError(f"ell must be >= 1, got {ell}")
    if d < 1:
        raise DimensionError(f"row length must be >= 1, got {d}")
    return FdState(buffer=np.zeros((2 * ell, d)), ell=ell)


def fd_shrink(state: FdState) -> FdState:
    _, delta, kept = shrink_rows(state.buffer, state.ell, out=state.buffer)
    state.fill = kept
    state.loss_sum += delta
    state.n_shrinks += 1
    state.deltas.append(delta)
    return state


def fd_insert(state: FdState, row) -> FdState:
    row = np.asarray(row, dtype=float)
    if row.shape != (state.d,):
        raise DimensionError(f"expected row of length {state.d}, got {row.shape}")
    state.buffer[state.fill] = row
    state.fill += 1
    if state.fill == 2 * state.ell:
        fd_shrink(state)
    return state


def fd_finalize(state: FdState) -> np.ndarray:
    """First ``ell`` rows of the buffer, shrinking once more if needed."""
    if state.fill > state.ell:
        fd_shrink(state)
    return state.buffer[: state.ell].copy()


def frequent_directions(a, ell: int) -> np.ndarray:
    """Stream the rows of ``a`` through FD and return the ``ell x d`` sketch."""
    a = np.asarray(a, dtype=float)
    state = fd_init(ell, a.shape[1])
    for row in a:
        fd_insert(state, row)
    return fd_finalize(state)


class FrequentDirections(TransformerMixin, BaseEstimator):
    """Matrix Frequent Directions as an estimator.

    Parameters
    ----------
    ell : int
        Sketch size; the internal buffer holds ``2 * ell`` rows.
    n_components : int, optional
        Number of right singular vectors of the sketch used by
        :meth:`transform`. Defaults to ``ell``.

    Attributes
    ----------
    sketch_ : ndarray of shape (ell, n_features)
    components_ : ndarray of shape (n_components, n_features)
    loss_ : float
        Accumulated squared singular values removed by shrinking.
    """

    def __init__(self, ell: int = 10, n_components: int | None = None):
        self.ell = ell
        self.n_components = n_components

    def partial_fit(self, X, y=None):
        X = check_array(X)
        if not hasattr(self, "state_"):
            self.state_ = fd_init(self.ell, X.shape[1])
            self.n_features_in_ = X.shape[1]
        elif X.shape[1] != self.n_features_in_:
            raise DimensionError(
                f"X has {X.shape[1]} features, expected {self.n_features_in_}"
            )
        for row in X:
            fd_insert(self.state_, row)
        self._finish()
        return self

    def fit(self, X, y=None):
        for attr in ("state_", "sketch_", "components_"):
            self.__dict__.pop(attr, None)
        return self.partial_fit(X)

    def _finish(self):
        state = self.state_
        snapshot = FdState(
            buffer=state.buffer.copy(), ell=state.ell, fill=state.fill,
            loss_sum=state.loss_sum,
        )
        self.sketch_ = fd_finalize(snapshot)
        self.loss_ = snapshot.loss_sum
        k = self.ell if self.n_components is None else self.n_components
        _, _, vh = np.linalg.svd(self.sketch_, full_matrices=False)
        self.components_ = vh[:k]

    def transform(self, X):
        check_is_fitted(self, "components_")
        X = check_array(X)
        return X @ self.components_.T

    def inverse_transform(self, X):
        check_is_fitted(self, "components_")
        return np.asarray(X) @ self.components_
