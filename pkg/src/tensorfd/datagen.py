"""Synthetic low-tubal-rank tensors and the two-regime extreme-case tensors.

The synthetic model is ``A = S * D * U^T + N / eta``: ``S`` has i.i.d.
standard normal entries, ``U`` is partially orthogonal, ``D`` is f-diagonal
with a decaying spectrum chosen per Fourier slice, and ``N`` is standard
Gaussian noise. Decay laws for position ``i = 1..k``:

* linear: ``1 - (i - 1) / k``
* polynomial: ``1 / i``
* exponential: ``2 ** -i``

These formulas are defaults, not part of the model; pass ``decay`` to fix a
single law or ``decay_laws`` to supply others.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .exceptions import DimensionError
from .tensor import SpectrumLayout, rfft_modes

DecayLaw = Callable[[np.ndarray, int], np.ndarray]

DECAY_LAWS: dict[str, DecayLaw] = {
    "linear": lambda i, k: 1.0 - (i - 1) / k,
    "polynomial": lambda i, k: 1.0 / i,
    "exponential": lambda i, k: 2.0 ** (-i),
}


@dataclass(frozen=True)
class SyntheticSpec:
    dims: tuple
    k: int
    eta: float = 10.0
    decay: str | None = None
    seed: int = 0
    decay_laws: dict = field(default_factory=lambda: dict(DECAY_LAWS))

    def __post_init__(self):
        dims = tuple(int(n) for n in self.dims)
        object.__setattr__(self, "dims", dims)
        if len(dims) < 3 or min(dims) < 1:
            raise DimensionError(f"invalid dims {dims}")
        if not 1 <= self.k <= min(dims[:2]):
            raise ValueError(f"k must lie in [1, {min(dims[:2])}], got {self.k}")
        if not self.eta > 0:
            raise ValueError(f"eta must be positive, got {self.eta}")
        if self.decay is not None and self.decay not in self.decay_laws:
            raise ValueError(f"unknown decay {self.decay!r}")


@dataclass(frozen=True)
class ExtremeSpec:
    dims: tuple
    alpha: float
    seed: int = 0

    def __post_init__(self):
        dims = tuple(int(n) for n in self.dims)
        object.__setattr__(self, "dims", dims)
        if len(dims) < 3 or min(dims) < 1:
            raise DimensionError(f"invalid dims {dims}")
        if not self.alpha > 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")


# Full-scale configurations of the original experiments; too large for CI.
FULL_SCALE_SYNTHETIC = {
    "third_order": {"dims": (10000, 1000, 10), "eta": 10.0, "k": (10, 20, 50)},
    "fourth_order": {"dims": (10000, 1000, 10, 3), "eta": 10.0, "k": (10, 20, 50)},
}
FULL_SCALE_EXTREME = {"dims": (3000, 300, 20), "alpha": (0.01, 100.0)}


def _rng(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def _orthonormal_slices(n2: int, k: int, layout: SpectrumLayout, rng) -> np.ndarray:
    out = np.empty((layout.m, n2, k), dtype=complex)
    for i in layout.representatives:
        g = rng.standard_normal((n2, k))
        if not layout.self_conjugate[i]:
            g = g + 1j * rng.standard_normal((n2, k))
        q, r = np.linalg.qr(g)
        # fix signs so the draw is a deterministic function of g
        d = np.diagonal(r)
        q = q * (np.conj(d) / np.abs(d))
        out[i] = q
    for i in layout.mirrors:
        out[i] = np.conj(out[layout.source[i]])
    return out


def gen_partial_orthogonal(n2: int, k: int, trailing_dims: Sequence[int], seed=0) -> np.ndarray:
    """Real ``n2 x k x ...`` tensor ``Q`` with ``Q^T * Q = I``."""
    if not 1 <= k <= n2:
        raise ValueError(f"need 1 <= k <= n2, got k={k}, n2={n2}")
    layout = SpectrumLayout(trailing_dims)
    return layout.spatial(_orthonormal_slices(n2, k, layout, _rng(seed)))


def gen_synthetic(spec: SyntheticSpec, return_info: bool = False):
    """Draw ``S * D * U^T + N / eta`` for ``spec``.

    With ``return_info=True`` also returns a dict with the chosen decay law
    of every stored Fourier slice.
    """
    rng = _rng(spec.seed)
    n1, n2 = spec.dims[:2]
    trailing = spec.dims[2:]
    k = spec.k
    layout = SpectrumLayout(trailing)

    names = list(spec.decay_laws)
    idx = np.arange(1, k + 1, dtype=float)
    laws = [None] * layout.m
    for i in layout.representatives:
        laws[i] = spec.decay if spec.decay is not None else names[rng.integers(len(names))]
    for i in layout.mirrors:
        laws[i] = laws[layout.source[i]]
    sigma = np.array([spec.decay_laws[name](idx, k) for name in laws])

    s = rng.standard_normal((n1, k) + trailing)
    fs = layout.to_slices(rfft_modes(s))
    fu = _orthonormal_slices(n2, k, layout, rng)
    low_rank = layout.spatial(
        np.matmul(fs * sigma[:, None, :], np.conj(fu).transpose(0, 2, 1))
    )
    noise = rng.standard_normal(spec.dims)
    a = low_rank + noise / spec.eta
    if return_info:
        return a, {"decay": laws}
    return a


def gen_extreme(spec: ExtremeSpec) -> np.ndarray:
    """``B + alpha * U``: identical Gaussian frontal slices plus uniform noise."""
    rng = _rng(spec.seed)
    n1, n2 = spec.dims[:2]
    trailing = spec.dims[2:]
    base = rng.standard_normal((n1, n2))
    b = np.broadcast_to(base.reshape((n1, n2) + (1,) * len(trailing)), spec.dims)
    u = rng.uniform(0.0, 1.0, spec.dims)
    return b + spec.alpha * u


def gen_scenes(n1: int = 80, n2: int = 40, segments=((0, 15), (1, 10), (0, 15), (1, 12), (0, 8)),
               rank: int = 3, noise: float = 0.5, seed=0):
    """Synthetic video ``n1 x n2 x n_frames`` alternating between scenes.

    ``segments`` lists ``(scene, n_frames)`` runs. Every scene is a fixed
    rank-``rank`` image; each frame is its scene's image with a small random
    gain plus Gaussian noise. Returns ``(tensor, labels)`` with one scene
    label per frame.
    """
    rng = _rng(seed)
    n_scenes = 1 + max(s for s, _ in segments)
    images = [rng.standard_normal((n1, rank)) @ rng.standard_normal((rank, n2))
              for _ in range(n_scenes)]
    labels = np.concatenate([np.full(n, s) for s, n in segments])
    frames = [images[s] * (1 + 0.05 * rng.standard_normal()) for s in labels]
    a = np.stack(frames, axis=2) + noise * rng.standard_normal((n1, n2, labels.size))
    return a, labels
