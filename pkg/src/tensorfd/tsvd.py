"""Full and truncated t-SVD, tubal rank, best tubal-rank-k approximation."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import NumericalError
from .tensor import SpectrumLayout, check_tensor, rfft_modes

DEFAULT_RANK_TOL = 1e-8


@dataclass(frozen=True)
class TsvdFactors:
    """Factors of ``A = U * S * V^T``.

    ``u`` is ``n1 x n1 x ...``, ``s`` is f-diagonal ``n1 x n2 x ...`` and ``v``
    is ``n2 x n2 x ...``. ``fourier_s`` holds the per-slice singular values of
    the half spectrum, shape ``(m, min(n1, n2))``, sorted descending, and
    ``layout`` the matching :class:`~tensorfd.tensor.SpectrumLayout`.
    """

    u: np.ndarray
    s: np.ndarray
    v: np.ndarray
    fourier_s: np.ndarray
    layout: SpectrumLayout

    def singular_tube_norms(self) -> np.ndarray:
        """l2* norms of the singular tubes ``S(i, i, :, ..., :)``."""
        sq = self.layout.total(self.fourier_s**2) / self.layout.rho
        return np.sqrt(sq)


def _fix_phase(u: np.ndarray, v: np.ndarray) -> None:
    """Make the leading nonzero entry of each left singular vector real-positive.

    ``u`` is ``(r, q)`` and ``v`` is ``(c, q)``; both are modified in place so
    ``u @ diag(s) @ v^H`` is unchanged.
    """
    mags = np.abs(u)
    tol = 1e-12 * max(mags.max(initial=0.0), 1.0)
    lead = np.argmax(mags > tol, axis=0)
    pivot = u[lead, np.arange(u.shape[1])]
    phase = np.ones_like(pivot)
    nz = np.abs(pivot) > tol
    phase[nz] = pivot[nz] / np.abs(pivot[nz])
    u *= np.conj(phase)
    v *= np.conj(phase)


def _slice_svd(full: bool):
    def svd(m: np.ndarray, index: int = -1):
        try:
            u, s, vh = np.linalg.svd(m, full_matrices=full)
        except np.linalg.LinAlgError as exc:
            raise NumericalError(f"SVD did not converge on Fourier slice {index}") from exc
        v = np.conj(vh.T).copy()
        u = u.copy()
        q = min(m.shape)
        _fix_phase(u[:, :q], v[:, :q])
        return u, s, v

    return svd


def t_svd(a) -> TsvdFactors:
    """Full t-SVD computed slice by slice in the Fourier domain.

    Only one slice of every conjugate pair is factorized; its partner gets
    the conjugate factors, which keeps all three factors real.
    """
    a = check_tensor(a)
    n1, n2 = a.shape[:2]
    q = min(n1, n2)
    layout = SpectrumLayout(a.shape[2:])
    slices = layout.to_slices(rfft_modes(a))
    svd = _slice_svd(full=True)

    results: list = [None] * layout.m
    for i in layout.representatives:
        sl = slices[i].real if layout.self_conjugate[i] else slices[i]
        results[i] = svd(np.ascontiguousarray(sl), int(i))
    for i in layout.mirrors:
        u, s, v = results[layout.source[i]]
        results[i] = (np.conj(u), s, np.conj(v))

    fu = np.empty((layout.m, n1, n1), dtype=complex)
    fv = np.empty((layout.m, n2, n2), dtype=complex)
    fs = np.zeros((layout.m, n1, n2))
    sv = np.empty((layout.m, q))
    for i, (u, s, v) in enumerate(results):
        fu[i], fv[i] = u, v
        fs[i, np.arange(q), np.arange(q)] = s
        sv[i] = s
    return TsvdFactors(
        u=layout.spatial(fu),
        s=layout.spatial(fs.astype(complex)),
        v=layout.spatial(fv),
        fourier_s=sv,
        layout=layout,
    )


def tubal_rank(f: TsvdFactors, tol: float = DEFAULT_RANK_TOL) -> int:
    """Number of singular tubes above ``tol`` times the largest one."""
    norms = f.singular_tube_norms()
    if norms.size == 0 or norms[0] == 0.0:
        return 0
    return int(np.count_nonzero(norms > tol * norms[0]))


def truncate_k(f: TsvdFactors, k: int):
    """Best tubal-rank-``k`` approximation from t-SVD factors.

    Returns ``(a_k, (u_k, s_k, v_k))`` where ``a_k = u_k * s_k * v_k^T``.
    """
    n1, n2 = f.u.shape[0], f.v.shape[0]
    if not 1 <= k <= min(n1, n2):
        raise ValueError(f"k must lie in [1, {min(n1, n2)}], got {k}")
    u_k = np.ascontiguousarray(f.u[:, :k])
    s_k = np.ascontiguousarray(f.s[:k, :k])
    v_k = np.ascontiguousarray(f.v[:, :k])
    layout = f.layout
    fu = layout.to_slices(rfft_modes(u_k))
    fv = layout.to_slices(rfft_modes(v_k))
    sig = f.fourier_s[:, :k]
    a_k = layout.spatial(np.matmul(fu * sig[:, None, :], np.conj(fv).transpose(0, 2, 1)))
    return a_k, (u_k, s_k, v_k)


def tail_energy(a, k: int) -> float:
    """``||A - A_k||_F^2`` from the Fourier-domain spectrum tail."""
    f = fourier_spectrum(a)
    layout = SpectrumLayout(np.asarray(a).shape[2:])
    return float(layout.total((f[:, k:] ** 2).sum(axis=1)) / layout.rho)


def fourier_spectrum(a) -> np.ndarray:
    """Singular values of every stored half-spectrum slice, ``(m, q)``."""
    a = check_tensor(a)
    layout = SpectrumLayout(a.shape[2:])
    return np.linalg.svd(layout.to_slices(rfft_modes(a)), compute_uv=False)
