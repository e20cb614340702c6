"""Comparison sketchers: matricized FD, single-pass srt-SVD, norm sampling.

Randomness comes from ``numpy.random.Generator`` with the PCG64 bit
generator seeded by a 64-bit integer; Gaussians use numpy's ziggurat
sampler. Independent streams for repeats are derived with
``SeedSequence(seed).spawn`` (see :func:`spawn_seeds`), so a fixed seed gives
identical output on every platform numpy supports.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator

from ._base import TensorSketchMixin, check_stream
from .exceptions import DimensionError, SamplingError
from .fd import fd_finalize, fd_init, fd_insert
from .tensor import check_tensor, fold_mode1, unfold_mode1


def spawn_seeds(seed: int, n: int) -> list[int]:
    """``n`` independent 64-bit seeds derived from ``seed``."""
    children = np.random.SeedSequence(seed).spawn(n)
    return [int(c.generate_state(1, dtype=np.uint64)[0]) for c in children]


def _slices(source, trailing_dims=None):
    """Iterator over horizontal slices plus their shape ``(n2, n3, ...)``."""
    if isinstance(source, np.ndarray):
        check_tensor(source)
        return iter(source), source.shape[1:]
    it = iter(source)
    trailing_dims = trailing_dims or getattr(source, "slice_dims", None)
    if trailing_dims is not None:
        return it, tuple(trailing_dims)
    try:
        first = next(it)
    except StopIteration:
        raise DimensionError("empty source: pass trailing_dims") from None
    first = np.asarray(first, dtype=float)

    def chain():
        yield first
        yield from it

    return chain(), first.shape


def _as_slice(x, dims) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape == (1,) + dims:
        x = x[0]
    if x.shape != dims:
        raise DimensionError(f"slice has shape {x.shape}, expected {dims}")
    return x


def mtfd_stream(source, ell: int, trailing_dims=None) -> np.ndarray:
    """Matricized FD: unfold each slice to a row, run matrix FD, fold back."""
    it, dims = _slices(source, trailing_dims)
    width = int(np.prod(dims))
    state = fd_init(ell, width)
    for x in it:
        row = unfold_mode1(_as_slice(x, dims)[None])[0]
        fd_insert(state, row)
    return fold_mode1(fd_finalize(state), (ell,) + dims)


def gaussian_projection(ell: int, n1: int, seed: int) -> np.ndarray:
    """The ``ell x n1`` first frontal slice drawn by :func:`srtsvd_stream`."""
    rng = np.random.default_rng(seed)
    return rng.standard_normal((n1, ell)).T / np.sqrt(ell)


def srtsvd_stream(source, ell: int, seed: int = 0, projection=None,
                  trailing_dims=None) -> np.ndarray:
    """Single-pass ``Q * A`` with a Gaussian ``Q`` whose only nonzero frontal
    slice is the first one.

    Column ``j`` of that slice is drawn when slice ``j`` arrives, so ``n1``
    need not be known in advance. ``projection`` (``ell x n1``) replaces the
    random draw.
    """
    if ell < 1:
        raise ValueError(f"ell must be >= 1, got {ell}")
    it, dims = _slices(source, trailing_dims)
    rng = np.random.default_rng(seed)
    scale = 1.0 / np.sqrt(ell)
    b = np.zeros((ell,) + dims)
    for j, x in enumerate(it):
        x = _as_slice(x, dims)
        if projection is None:
            q = rng.standard_normal(ell) * scale
        else:
            q = projection[:, j]
        b += np.multiply.outer(q, x)
    return b


def normsamp_two_pass(source, ell: int, seed: int = 0) -> np.ndarray:
    """Norm sampling of horizontal slices, i.i.d. with replacement.

    ``source`` must be re-iterable (an array, a :class:`~tensorfd.io.StreamReader`,
    a list): the first pass computes slice norms, the second collects the
    sampled slices, each rescaled by ``1 / sqrt(ell * p_i)``.
    """
    if ell < 1:
        raise ValueError(f"ell must be >= 1, got {ell}")
    it, dims = _slices(source)
    sq = np.array([np.sum(_as_slice(x, dims) ** 2) for x in it])
    total = sq.sum()
    if sq.size == 0 or total <= 0:
        raise SamplingError("cannot norm-sample an all-zero tensor")
    p = sq / total
    rng = np.random.default_rng(seed)
    picks = rng.choice(sq.size, size=ell, replace=True, p=p)

    order = np.argsort(picks, kind="stable")
    b = np.zeros((ell,) + dims)
    pos = 0
    it, _ = _slices(source, dims)
    for j, x in enumerate(it):
        while pos < ell and picks[order[pos]] == j:
            b[order[pos]] = _as_slice(x, dims) / np.sqrt(ell * p[j])
            pos += 1
        if pos == ell:
            break
    if pos < ell:
        raise DimensionError("second pass returned fewer slices than the first")
    return b


class MatricizedFrequentDirections(TensorSketchMixin, BaseEstimator):
    """Matrix FD on the mode-1 unfolding, folded back to a tensor sketch."""

    def __init__(self, ell: int = 10, n_components: int | None = None):
        self.ell = ell
        self.n_components = n_components

    def fit(self, X, y=None):
        self.__dict__.pop("state_", None)
        return self.partial_fit(X)

    def partial_fit(self, X, y=None):
        if hasattr(self, "state_"):
            X = check_stream(X, self.dims_)
        else:
            X = check_stream(X)
            self.dims_ = X.shape[1:]
            self.state_ = fd_init(self.ell, int(np.prod(self.dims_)))
        for row in unfold_mode1(X):
            fd_insert(self.state_, row)
        snap = fd_init(self.ell, self.state_.d)
        snap.buffer[:] = self.state_.buffer
        snap.fill = self.state_.fill
        self.sketch_ = fold_mode1(fd_finalize(snap), (self.ell,) + self.dims_)
        self._set_components()
        return self


class StreamingRandomizedTSVD(TensorSketchMixin, BaseEstimator):
    """Single-pass srt-SVD sketch ``Q * A``."""

    def __init__(self, ell: int = 10, n_components: int | None = None, seed: int = 0):
        self.ell = ell
        self.n_components = n_components
        self.seed = seed

    def fit(self, X, y=None):
        X = check_stream(X)
        self.sketch_ = srtsvd_stream(X, self.ell, self.seed)
        self._set_components()
        return self


class NormSampling(TensorSketchMixin, BaseEstimator):
    """Two-pass norm sampling of horizontal slices."""

    def __init__(self, ell: int = 10, n_components: int | None = None, seed: int = 0):
        self.ell = ell
        self.n_components = n_components
        self.seed = seed

    def fit(self, X, y=None):
        X = check_stream(X)
        self.sketch_ = normsamp_two_pass(X, self.ell, self.seed)
        self._set_components()
        return self
