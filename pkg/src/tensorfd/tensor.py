"""Dense order-p tensors and t-product algebra.

Tensors are plain ``numpy.ndarray`` objects of float64 with ``ndim >= 3``
(``n1 x n2 x n3 x ... x np``); data is stored row-major, so the last index
varies fastest. Modes 3..p are the *trailing* modes and ``rho`` denotes the
product of their sizes, i.e. the number of frontal slices.

All t-product work happens in the Fourier domain obtained by an unnormalized
forward DFT along every trailing mode (the inverse carries the ``1/n``
factor). Two representations of that domain are provided:

* :func:`fft_modes` / :func:`ifft_modes` give the full spectrum wrapped in a
  :class:`FourierTensor`.
* :func:`rfft_modes` / :func:`irfft_modes` keep the half spectrum along the
  last trailing mode, which is all a real tensor needs. :class:`SpectrumLayout`
  describes which stored slices are conjugates of each other so per-slice
  factorizations can be computed once per conjugate pair.

Frontal slices are enumerated with the mode-3 index varying fastest (the
column-major convention), which fixes the block order of
:func:`unfold_mode1` and of :func:`bcirc_matrix`.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import prod
from typing import Callable, Sequence

import numpy as np

from .exceptions import DimensionError, NumericalError, SizeCapError

BCIRC_MAX_ENTRIES = 10**6
IMAG_RESIDUE_TOL = 1e-9


def check_tensor(a, min_order: int = 3, name: str = "tensor") -> np.ndarray:
    """Return ``a`` as a float64 array of order ``>= min_order``."""
    arr = np.asarray(a)
    if np.iscomplexobj(arr):
        raise DimensionError(f"{name} must be real-valued")
    arr = arr.astype(np.float64, copy=False)
    if arr.ndim < min_order:
        raise DimensionError(
            f"{name} must have order >= {min_order}, got shape {arr.shape}"
        )
    if any(n < 1 for n in arr.shape):
        raise DimensionError(f"{name} has an empty dimension: {arr.shape}")
    return arr


def trailing_size(dims: Sequence[int]) -> int:
    """Number of frontal slices ``rho = n3 * ... * np``."""
    return prod(dims[2:])


@dataclass(frozen=True)
class FourierTensor:
    """Complex tensor produced by a DFT along modes 3..p.

    ``real_sourced`` records that the data came from a real tensor, in which
    case it is conjugate symmetric along the trailing modes.
    """

    data: np.ndarray
    real_sourced: bool = False

    @property
    def dims(self) -> tuple[int, ...]:
        return self.data.shape

    def conjugate_symmetry_error(self) -> float:
        """Relative deviation from conjugate symmetry along trailing modes."""
        x = self.data
        mirrored = x
        for axis in range(2, x.ndim):
            n = x.shape[axis]
            mirrored = mirrored.take((-np.arange(n)) % n, axis=axis)
        scale = max(np.linalg.norm(x), np.finfo(float).tiny)
        return float(np.linalg.norm(x - np.conj(mirrored)) / scale)


def _trailing_axes(ndim: int) -> tuple[int, ...]:
    return tuple(range(2, ndim))


def fft_modes(t) -> FourierTensor:
    """Unnormalized DFT along every trailing mode of a real tensor."""
    arr = np.asarray(t)
    if arr.ndim < 3:
        raise DimensionError(f"fft_modes needs order >= 3, got shape {arr.shape}")
    real = not np.iscomplexobj(arr)
    data = np.fft.fftn(arr, axes=_trailing_axes(arr.ndim))
    return FourierTensor(data, real_sourced=real)


def ifft_modes(t: FourierTensor | np.ndarray) -> np.ndarray:
    """Inverse of :func:`fft_modes`.

    For real-sourced input the imaginary residue is checked and discarded; a
    residue above ``1e-9`` relative raises :class:`NumericalError`. Otherwise
    the complex result is returned unless it is real to that tolerance.
    """
    if isinstance(t, FourierTensor):
        data, real_sourced = t.data, t.real_sourced
    else:
        data, real_sourced = np.asarray(t), False
    if data.ndim < 3:
        raise DimensionError(f"ifft_modes needs order >= 3, got shape {data.shape}")
    out = np.fft.ifftn(data, axes=_trailing_axes(data.ndim))
    scale = max(np.linalg.norm(out), np.finfo(float).tiny)
    residue = np.linalg.norm(out.imag) / scale
    if residue <= IMAG_RESIDUE_TOL:
        return np.ascontiguousarray(out.real)
    if real_sourced:
        raise NumericalError(
            f"imaginary residue {residue:.3e} exceeds {IMAG_RESIDUE_TOL:g}"
        )
    return out


def rfft_modes(a: np.ndarray) -> np.ndarray:
    """Half-spectrum DFT along the trailing modes of a real tensor."""
    return np.fft.rfftn(a, axes=_trailing_axes(a.ndim))


def irfft_modes(x: np.ndarray, trailing: Sequence[int]) -> np.ndarray:
    """Inverse of :func:`rfft_modes` for the given trailing sizes."""
    return np.fft.irfftn(x, s=tuple(trailing), axes=_trailing_axes(x.ndim))


class SpectrumLayout:
    """Bookkeeping for the half spectrum of a real tensor.

    The stored slices are those of ``rfft_modes`` flattened in C order. A
    stored slice either stands for itself and its (unstored) conjugate
    partner, weight 2, or lies on a plane where the last trailing index is
    ``0`` or ``n/2``; there its partner is stored too and the weight is 1.

    Attributes
    ----------
    source : ndarray of int
        For every stored slice, the index of the slice it is computed from.
        ``source[i] == i`` for representatives; otherwise slice ``i`` equals
        the conjugate of slice ``source[i]``.
    self_conjugate : ndarray of bool
        Slices equal to their own conjugate, i.e. real matrices.
    weights : ndarray of int
        Number of full-spectrum slices each stored slice stands for; sums to
        ``rho``.
    """

    def __init__(self, trailing: Sequence[int]):
        trailing = tuple(int(n) for n in trailing)
        if not trailing:
            raise DimensionError("at least one trailing mode is required")
        self.trailing = trailing
        self.rho = prod(trailing)
        self.half_shape = trailing[:-1] + (trailing[-1] // 2 + 1,)
        self.m = prod(self.half_shape)

        idx = np.indices(self.half_shape).reshape(len(trailing), self.m)
        last = idx[-1]
        boundary = (last == 0) | (2 * last == trailing[-1])
        mirrored = [(-idx[d]) % trailing[d] for d in range(len(trailing) - 1)]
        mirrored.append(last)
        mirror = np.ravel_multi_index(tuple(mirrored), self.half_shape)
        flat = np.arange(self.m)

        self.weights = np.where(boundary, 1, 2)
        self.self_conjugate = boundary & (mirror == flat)
        self.source = np.where(boundary & (mirror < flat), mirror, flat)
        self.representatives = np.flatnonzero(self.source == flat)
        self.mirrors = np.flatnonzero(self.source != flat)

    def to_slices(self, x: np.ndarray) -> np.ndarray:
        """View a half spectrum ``(r, c, *half_shape)`` as ``(m, r, c)``."""
        r, c = x.shape[:2]
        return x.reshape(r, c, self.m).transpose(2, 0, 1)

    def from_slices(self, s: np.ndarray) -> np.ndarray:
        """Inverse of :meth:`to_slices`."""
        m, r, c = s.shape
        return s.transpose(1, 2, 0).reshape((r, c) + self.half_shape)

    def spatial(self, s: np.ndarray) -> np.ndarray:
        """Real tensor whose half spectrum has slices ``s``."""
        return irfft_modes(self.from_slices(s), self.trailing)

    def total(self, per_slice: np.ndarray) -> np.ndarray:
        """Sum of a per-slice quantity over the full spectrum."""
        return np.tensordot(self.weights, per_slice, axes=(0, 0))

    def map_slices(
        self,
        func: Callable[[np.ndarray], tuple],
        slices: np.ndarray,
    ) -> list[tuple]:
        """Apply ``func`` to every stored slice, exploiting conjugate symmetry.

        ``func`` receives a single ``(r, c)`` slice (real for self-conjugate
        slices, complex otherwise) and returns a tuple of arrays. Mirrored
        slices get the elementwise conjugate of their source's result.
        """
        out: list[tuple | None] = [None] * self.m
        for i in self.representatives:
            sl = slices[i]
            if self.self_conjugate[i]:
                sl = np.ascontiguousarray(sl.real)
            out[i] = func(sl)
        for i in self.mirrors:
            out[i] = tuple(np.conj(v) for v in out[self.source[i]])
        return out


def identity_tensor(n: int, trailing: Sequence[int]) -> np.ndarray:
    """Identity tensor: first frontal slice is ``I_n``, the rest are zero."""
    eye = np.zeros((n, n) + tuple(trailing))
    eye[(slice(None), slice(None)) + (0,) * len(trailing)] = np.eye(n)
    return eye


def t_product(a, b) -> np.ndarray:
    """t-product of ``a`` (n1 x n2 x ...) and ``b`` (n2 x m x ...)."""
    a = check_tensor(a, name="a")
    b = check_tensor(b, name="b")
    if a.shape[2:] != b.shape[2:]:
        raise DimensionError(
            f"trailing dims differ: {a.shape[2:]} vs {b.shape[2:]}"
        )
    if a.shape[1] != b.shape[0]:
        raise DimensionError(f"inner dims differ: {a.shape} * {b.shape}")
    layout = SpectrumLayout(a.shape[2:])
    fa = layout.to_slices(rfft_modes(a))
    fb = layout.to_slices(rfft_modes(b))
    return layout.spatial(np.matmul(fa, fb))


def t_transpose(a) -> np.ndarray:
    """Tensor transpose: transpose every frontal slice, reverse slices 2..n."""
    a = check_tensor(a)
    out = np.swapaxes(a, 0, 1)
    for axis in range(2, a.ndim):
        n = a.shape[axis]
        out = out.take((-np.arange(n)) % n, axis=axis)
    return np.ascontiguousarray(out)


def bcirc_unfold(b: np.ndarray) -> np.ndarray:
    """Stack frontal slices recursively into a ``(n1*rho, n2)`` block column."""
    if b.ndim == 2:
        return b
    return np.vstack([bcirc_unfold(b[..., i]) for i in range(b.shape[-1])])


def bcirc_fold(m: np.ndarray, dims: Sequence[int]) -> np.ndarray:
    """Inverse of :func:`bcirc_unfold`."""
    dims = tuple(dims)
    if len(dims) == 2:
        return m.reshape(dims)
    n = dims[-1]
    step = m.shape[0] // n
    return np.stack(
        [bcirc_fold(m[i * step:(i + 1) * step], dims[:-1]) for i in range(n)],
        axis=-1,
    )


def bcirc_matrix(a, max_entries: int = BCIRC_MAX_ENTRIES) -> np.ndarray:
    """Explicit block-circulant expansion ``(n1*rho) x (n2*rho)``.

    Meant as a brute-force oracle for small tensors only; refuses to build
    matrices with more than ``max_entries`` entries.
    """
    a = check_tensor(a, min_order=2)
    rho = trailing_size(a.shape)
    entries = a.shape[0] * rho * a.shape[1] * rho
    if entries > max_entries:
        raise SizeCapError(
            f"bcirc of {a.shape} has {entries} entries (cap {max_entries})"
        )
    return _bcirc(a)


def _bcirc(a: np.ndarray) -> np.ndarray:
    if a.ndim == 2:
        return a
    n = a.shape[-1]
    blocks = [_bcirc(a[..., i]) for i in range(n)]
    return np.block([[blocks[(r - s) % n] for s in range(n)] for r in range(n)])


def fro_norm(a) -> float:
    return float(np.linalg.norm(np.asarray(a, dtype=float).ravel()))


def tube_norm(x) -> float:
    """The l2* norm of a tensor column (second dimension must be 1)."""
    x = check_tensor(x, name="tensor column")
    if x.shape[1] != 1:
        raise DimensionError(f"tensor column must have n2 == 1, got {x.shape}")
    return fro_norm(x)


def tensor_spectral_norm(a) -> float:
    """Largest singular value over the Fourier-domain frontal slices."""
    a = check_tensor(a)
    layout = SpectrumLayout(a.shape[2:])
    slices = layout.to_slices(rfft_modes(a))
    return float(np.linalg.svd(slices, compute_uv=False).max())


def unfold_mode1(a) -> np.ndarray:
    """Mode-1 unfolding ``[A^(1) A^(2) ... A^(rho)]`` of shape ``n1 x n2*rho``."""
    a = check_tensor(a)
    n1, n2 = a.shape[:2]
    rho = trailing_size(a.shape)
    frontal = a.reshape(n1, n2, rho, order="F")
    return frontal.transpose(0, 2, 1).reshape(n1, rho * n2)


def fold_mode1(m, dims: Sequence[int]) -> np.ndarray:
    """Inverse of :func:`unfold_mode1`."""
    dims = tuple(int(d) for d in dims)
    m = np.asarray(m, dtype=float)
    n1, n2 = dims[:2]
    rho = trailing_size(dims)
    if m.shape != (n1, n2 * rho):
        raise DimensionError(f"cannot fold {m.shape} into {dims}")
    frontal = m.reshape(n1, rho, n2).transpose(0, 2, 1)
    return np.ascontiguousarray(frontal.reshape(dims, order="F"))
