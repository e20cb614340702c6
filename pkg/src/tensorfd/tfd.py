"""Streaming tensor Frequent Directions (t-FD) for order-p tensors.

Horizontal slices ``A_j`` (``1 x n2 x n3 x ... x np``) arrive one at a time
and are written into a ``2*ell``-slice buffer. When the buffer is full, every
Fourier-domain frontal slice of the buffer is shrunk by its own squared
``ell``-th singular value ``delta_j^(i)``, which zeroes at least ``ell + 1``
horizontal slices.

The buffer lives permanently in the Fourier domain. The trailing-mode DFT
acts tube by tube inside one horizontal slice, so transforming an incoming
slice on its own and writing it into the transformed buffer is the same as
transforming the whole buffer after insertion. Only the half spectrum is
kept; each conjugate pair of frontal slices is factorized once.

Two loss accumulators are kept per stream: ``sum_max_delta`` (the largest
``delta`` over slices, summed over shrinks) and ``sum_all_delta`` (every
``delta`` summed). Their ratio, scaled by ``rho``, is the constant ``c`` in
``[1, rho]`` that enters the error bounds.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator

from ._base import TensorSketchMixin, check_stream
from .exceptions import DimensionError
from .fd import shrink_rows
from .tensor import SpectrumLayout, check_tensor

# per-batch slice count is capped so shrink temporaries stay a small
# fraction of the buffer
SVD_CHUNK = 64
CHUNK_FRACTION = 8


@dataclass
class SketchState:
    """Live t-FD state.

    ``fourier_buffer`` has shape ``(m, 2*ell, n2)``: the ``m`` stored
    half-spectrum frontal slices of the buffer. Rows ``fill`` and beyond are
    exactly zero in every slice.
    """

    fourier_buffer: np.ndarray
    ell: int
    trailing_dims: tuple
    layout: SpectrumLayout
    fill: int = 0
    sum_max_delta: float = 0.0
    sum_all_delta: float = 0.0
    n_seen: int = 0
    n_shrinks: int = 0

    @property
    def n2(self) -> int:
        return self.fourier_buffer.shape[2]

    @property
    def rho(self) -> int:
        return self.layout.rho

    @property
    def buffer(self) -> np.ndarray:
        """Spatial ``2*ell x n2 x ...`` buffer (materialized on access)."""
        return self.layout.spatial(self.fourier_buffer)

    @property
    def c_value(self) -> float | None:
        if self.sum_all_delta <= 0.0:
            return None
        return self.rho * self.sum_max_delta / self.sum_all_delta


@dataclass(frozen=True)
class SketchResult:
    """Output of a t-FD stream.

    ``c_value`` is ``None`` when no shrink removed any mass, in which case
    the constant is undefined.
    """

    sketch: np.ndarray
    c_value: float | None
    delta_total: float
    sum_all_delta: float = 0.0
    n_shrinks: int = 0
    n_seen: int = 0


def tfd_init(ell: int, trailing_dims) -> SketchState:
    """Fresh state for slices of shape ``(n2, n3, ..., np)``.

    ``trailing_dims`` is ``(n2, n3, ..., np)`` and must have length >= 2.
    """
    if ell < 1:
        raise ValueError(f"ell must be >= 1, got {ell}")
    dims = tuple(int(n) for n in trailing_dims)
    if len(dims) < 2:
        raise DimensionError(
            "t-FD needs order >= 3: pass (n2, n3, ...) with at least one trailing mode"
        )
    if any(n < 1 for n in dims):
        raise DimensionError(f"invalid slice dims {dims}")
    layout = SpectrumLayout(dims[1:])
    buf = np.zeros((layout.m, 2 * ell, dims[0]), dtype=complex)
    return SketchState(fourier_buffer=buf, ell=ell, trailing_dims=dims, layout=layout)


def _slice_spectrum(state: SketchState, slc) -> np.ndarray:
    x = np.asarray(slc, dtype=float)
    if x.shape == (1,) + state.trailing_dims:
        x = x[0]
    if x.shape != state.trailing_dims:
        raise DimensionError(
            f"slice has shape {np.shape(slc)}, expected {state.trailing_dims}"
        )
    axes = tuple(range(1, x.ndim))
    f = np.fft.rfftn(x, axes=axes)
    return f.reshape(state.n2, state.layout.m).T


def tfd_insert(state: SketchState, slc) -> SketchState:
    """Write one horizontal slice into the buffer, shrinking when it fills."""
    spec = _slice_spectrum(state, slc)
    state.fourier_buffer[:, state.fill, :] = spec
    state.fill += 1
    state.n_seen += 1
    if state.fill == 2 * state.ell:
        tfd_shrink(state)
    return state


def _shrink_batch(m: np.ndarray, ell: int):
    _, s, vh = np.linalg.svd(m, full_matrices=False)
    if s.shape[1] >= ell:
        delta = s[:, ell - 1] ** 2
    else:
        delta = np.zeros(s.shape[0])
    shrunk = np.sqrt(np.maximum(s**2 - delta[:, None], 0.0))
    kept = np.count_nonzero(shrunk > 0.0, axis=1)
    rows = vh.shape[1]
    out = np.zeros_like(m)
    out[:, :rows] = shrunk[:, :, None] * vh
    return out, delta, kept


def tfd_shrink(state: SketchState) -> SketchState:
    """Shrink every Fourier slice by its squared ``ell``-th singular value."""
    layout, ell = state.layout, state.ell
    buf = state.fourier_buffer
    delta = np.zeros(layout.m)
    kept = np.zeros(layout.m, dtype=int)

    reps = layout.representatives
    chunk = max(1, min(SVD_CHUNK, layout.m // CHUNK_FRACTION))
    batched = reps[~layout.self_conjugate[reps]] if chunk > 1 else reps[:0]
    for i in np.setdiff1d(reps, batched):
        sl = buf[i]
        if layout.self_conjugate[i]:
            # real matrix: a real SVD keeps the slice exactly real
            b, d, k = shrink_rows(np.ascontiguousarray(sl.real), ell)
            sl[:] = b
        else:
            _, d, k = shrink_rows(sl, ell, out=sl)
        delta[i], kept[i] = d, k
    for start in range(0, batched.size, chunk):
        idx = batched[start:start + chunk]
        b, d, k = _shrink_batch(buf[idx], ell)
        buf[idx] = b
        delta[idx], kept[idx] = d, k
    for i in layout.mirrors:
        src = layout.source[i]
        buf[i] = np.conj(buf[src])
        delta[i], kept[i] = delta[src], kept[src]

    state.sum_max_delta += float(delta.max())
    state.sum_all_delta += float(layout.total(delta))
    state.fill = int(kept.max())
    state.n_shrinks += 1
    return state


def tfd_finalize(state: SketchState) -> SketchResult:
    """Force a last shrink if more than ``ell`` slices are live; return the sketch."""
    if state.fill > state.ell:
        tfd_shrink(state)
    layout = state.layout
    sketch = np.empty((state.ell,) + state.trailing_dims)
    for r in range(state.ell):
        sketch[r] = layout.spatial(state.fourier_buffer[:, r:r + 1, :])[0]
    return SketchResult(
        sketch=sketch,
        c_value=state.c_value,
        delta_total=state.sum_max_delta,
        sum_all_delta=state.sum_all_delta,
        n_shrinks=state.n_shrinks,
        n_seen=state.n_seen,
    )


def tfd_stream(source, ell: int, trailing_dims=None) -> SketchResult:
    """Single pass of t-FD over ``source``.

    ``source`` is a tensor (iterated along mode 1) or any iterable of
    horizontal slices. ``trailing_dims`` must be given when the source is
    empty and not an array.
    """
    if isinstance(source, np.ndarray):
        check_tensor(source)
        trailing_dims = source.shape[1:]
    elif trailing_dims is None:
        trailing_dims = getattr(source, "slice_dims", None)
    it = iter(source)
    state = tfd_init(ell, trailing_dims) if trailing_dims is not None else None
    for slc in it:
        if state is None:
            shape = np.shape(slc)
            state = tfd_init(ell, shape[1:] if len(shape) > 2 and shape[0] == 1 else shape)
        tfd_insert(state, slc)
    if state is None:
        raise DimensionError("empty source: pass trailing_dims")
    return tfd_finalize(state)


class TensorFrequentDirections(TensorSketchMixin, BaseEstimator):
    """t-FD as a streaming transformer.

    ``fit`` consumes a tensor ``X`` of shape ``(n1, n2, n3, ..., np)`` one
    horizontal slice at a time; ``partial_fit`` continues the same stream
    with more slices.

    Parameters
    ----------
    ell : int
        Sketch size (number of horizontal slices in the sketch).
    n_components : int, optional
        Tubal rank ``k`` of the subspace used by ``transform``; defaults to
        ``min(ell, n2)``.

    Attributes
    ----------
    sketch_ : ndarray of shape (ell, n2, n3, ..., np)
    c_ : float or None
        Loss-imbalance constant of the stream so far; ``None`` until a shrink
        has removed mass.
    delta_ : float
        Sum over shrinks of the largest per-slice loss.
    components_ : ndarray of shape (n2, k, n3, ..., np)
        Leading right singular tensor of the sketch.
    """

    def __init__(self, ell: int = 10, n_components: int | None = None):
        self.ell = ell
        self.n_components = n_components

    def fit(self, X, y=None):
        for attr in ("state_", "sketch_", "components_"):
            self.__dict__.pop(attr, None)
        return self.partial_fit(X)

    def partial_fit(self, X, y=None):
        if hasattr(self, "state_"):
            X = check_stream(X, self.state_.trailing_dims)
        else:
            X = check_stream(X)
            self.state_ = tfd_init(self.ell, X.shape[1:])
        for slc in X:
            tfd_insert(self.state_, slc)
        self._finish()
        return self

    def _finish(self):
        # finalize a copy so the live stream can keep going
        st = self.state_
        snap = SketchState(
            fourier_buffer=st.fourier_buffer.copy(), ell=st.ell,
            trailing_dims=st.trailing_dims, layout=st.layout, fill=st.fill,
            sum_max_delta=st.sum_max_delta, sum_all_delta=st.sum_all_delta,
            n_seen=st.n_seen, n_shrinks=st.n_shrinks,
        )
        result = tfd_finalize(snap)
        self.result_ = result
        self.sketch_ = result.sketch
        self.c_ = result.c_value
        self.delta_ = result.delta_total
        self._set_components()
