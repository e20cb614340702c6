"""Error measures for tensor sketches and runtime bound certificates.

Every measure that needs ``||A - A_k||_F^2`` computes it from a full t-SVD
of ``A``, so these functions load the whole tensor and are guarded by a size
cap (:data:`ORACLE_MAX_ENTRIES`, override with ``max_entries=None``).
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from .exceptions import DimensionError, SizeCapError
from .tensor import SpectrumLayout, check_tensor, fro_norm, rfft_modes
from .tsvd import t_svd

ORACLE_MAX_ENTRIES = 20_000_000
ORTHO_TOL = 1e-6


def _guard(a: np.ndarray, max_entries: int | None) -> None:
    if max_entries is not None and a.size > max_entries:
        raise SizeCapError(
            f"oracle metrics on {a.shape} exceed the {max_entries}-entry cap"
        )


def _pair(a, b):
    a = check_tensor(a, name="a")
    b = check_tensor(b, name="b")
    if a.shape[1:] != b.shape[1:]:
        raise DimensionError(f"sketch dims {b.shape} do not match {a.shape}")
    return a, b


def gram_slices(a: np.ndarray, layout: SpectrumLayout) -> np.ndarray:
    """Fourier slices of ``A^T * A``: ``conj(A_i)^T A_i`` per stored slice."""
    f = layout.to_slices(rfft_modes(a))
    return np.matmul(np.conj(f).transpose(0, 2, 1), f)


def covariance_error(a, b, max_entries: int | None = ORACLE_MAX_ENTRIES) -> float:
    """Tensor spectral norm of ``A^T * A - B^T * B``."""
    a, b = _pair(a, b)
    _guard(a, max_entries)
    layout = SpectrumLayout(a.shape[2:])
    diff = gram_slices(a, layout) - gram_slices(b, layout)
    return float(np.linalg.norm(diff, ord=2, axis=(1, 2)).max())


def best_rank_error(a, k: int, max_entries: int | None = ORACLE_MAX_ENTRIES) -> float:
    """``||A - A_k||_F^2`` for the best tubal-rank-``k`` approximation."""
    a = check_tensor(a)
    _guard(a, max_entries)
    layout = SpectrumLayout(a.shape[2:])
    s = np.linalg.svd(layout.to_slices(rfft_modes(a)), compute_uv=False)
    return float(layout.total((s[:, k:] ** 2).sum(axis=1)) / layout.rho)


def sketch_subspace(b, k: int) -> np.ndarray:
    """First ``k`` lateral slices of the right t-SVD factor of ``b``."""
    b = check_tensor(b)
    if not 1 <= k <= b.shape[1]:
        raise ValueError(f"k must lie in [1, {b.shape[1]}], got {k}")
    return np.ascontiguousarray(t_svd(b).v[:, :k])


def projection_error(
    a,
    v_k,
    method: str = "pythagorean",
    max_entries: int | None = ORACLE_MAX_ENTRIES,
) -> float:
    """``||A - A * V_k * V_k^T||_F^2`` for a partially orthogonal ``V_k``.

    ``method="pythagorean"`` uses ``||A||^2 - ||A * V_k||^2``;
    ``method="direct"`` forms the residual explicitly.
    """
    a = check_tensor(a, name="a")
    v_k = check_tensor(v_k, name="v_k")
    _guard(a, max_entries)
    if v_k.shape[0] != a.shape[1] or v_k.shape[2:] != a.shape[2:]:
        raise DimensionError(f"V_k of shape {v_k.shape} does not fit {a.shape}")
    layout = SpectrumLayout(a.shape[2:])
    fv = layout.to_slices(rfft_modes(v_k))
    gram = np.matmul(np.conj(fv).transpose(0, 2, 1), fv)
    eye = np.eye(v_k.shape[1])
    if np.abs(gram - eye).max() > ORTHO_TOL:
        raise ValueError("V_k is not partially orthogonal (V_k^T * V_k != I)")

    fa = layout.to_slices(rfft_modes(a))
    proj = np.matmul(fa, fv)
    if method == "pythagorean":
        kept = layout.total(np.sum(np.abs(proj) ** 2, axis=(1, 2))) / layout.rho
        return float(max(fro_norm(a) ** 2 - kept, 0.0))
    if method == "direct":
        resid = fa - np.matmul(proj, np.conj(fv).transpose(0, 2, 1))
        return float(layout.total(np.sum(np.abs(resid) ** 2, axis=(1, 2))) / layout.rho)
    raise ValueError(f"unknown method {method!r}")


@dataclass
class ErrorReport:
    """One (algorithm, ell, k) evaluation.

    Error ratios are normalized by ``||A - A_k||_F^2``; they are ``inf`` when
    that tail is exactly zero.
    """

    algorithm: str
    ell: int
    k: int
    dims: tuple
    proj_err_ratio: float
    cov_err_ratio: float
    c_value: float | None = None
    wall_time_s: float = 0.0
    proj_err: float = 0.0
    cov_err: float = 0.0
    tail: float = 0.0
    extra: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return asdict(self)


def _ratio(num: float, den: float) -> float:
    if den > 0:
        return num / den
    return 0.0 if num == 0 else float("inf")


def error_report(a, b, k: int, algorithm: str = "", ell: int | None = None,
                 c_value=None, wall_time_s: float = 0.0,
                 max_entries: int | None = ORACLE_MAX_ENTRIES) -> ErrorReport:
    a, b = _pair(a, b)
    tail = best_rank_error(a, k, max_entries)
    cov = covariance_error(a, b, max_entries)
    proj = projection_error(a, sketch_subspace(b, k), max_entries=max_entries)
    return ErrorReport(
        algorithm=algorithm, ell=b.shape[0] if ell is None else ell, k=k,
        dims=tuple(a.shape), proj_err_ratio=_ratio(proj, tail),
        cov_err_ratio=_ratio(cov, tail), c_value=c_value,
        wall_time_s=wall_time_s, proj_err=proj, cov_err=cov, tail=tail,
    )


@dataclass
class BoundCertificate:
    """Outcome of checking the t-FD covariance and projection bounds.

    ``status`` is ``"pass"``, ``"fail"`` or ``"skip"`` (the bounds say
    nothing when ``k >= ell / c``). Margins are ``bound - observed``.
    """

    status: str
    k: int
    ell: int
    c: float
    cov_err: float = float("nan")
    cov_bound: float = float("nan")
    proj_err: float = float("nan")
    proj_bound: float = float("nan")
    tail: float = float("nan")
    rtol: float = 1e-6
    slack: float = 0.0

    @property
    def cov_margin(self) -> float:
        return self.cov_bound - self.cov_err

    @property
    def proj_margin(self) -> float:
        return self.proj_bound - self.proj_err

    @property
    def cov_ok(self) -> bool:
        return self.cov_err <= self.cov_bound * (1 + self.rtol) + self.slack

    @property
    def proj_ok(self) -> bool:
        return self.proj_err <= self.proj_bound * (1 + self.rtol) + self.slack


def certify_bounds(a, result, k: int, rtol: float = 1e-6, atol: float = 1e-12,
                   max_entries: int | None = ORACLE_MAX_ENTRIES) -> BoundCertificate:
    """Check the covariance and projection bounds for a t-FD ``result``.

    ``c`` is taken from the run; an undefined ``c`` (no mass was ever
    removed) is certified with ``c = 1``, where both bounds still apply.
    Each inequality may exceed its bound by ``rtol`` relative plus
    ``atol * ||A||_F^2``: roundoff alone leaves errors near ``1e-15 ||A||_F^2``,
    which matters once the tail itself is that small.
    """
    b = result.sketch
    a, b = _pair(a, b)
    ell = b.shape[0]
    c = 1.0 if result.c_value is None else float(result.c_value)
    if k >= ell / c or k > b.shape[1]:
        return BoundCertificate("skip", k=k, ell=ell, c=c, rtol=rtol)
    tail = best_rank_error(a, k, max_entries)
    cov = covariance_error(a, b, max_entries)
    proj = projection_error(a, sketch_subspace(b, k), max_entries=max_entries)
    cert = BoundCertificate(
        "pass", k=k, ell=ell, c=c, cov_err=cov, cov_bound=tail / (ell / c - k),
        proj_err=proj, proj_bound=ell / (ell - c * k) * tail, tail=tail, rtol=rtol,
        slack=atol * fro_norm(a) ** 2,
    )
    if not (cert.cov_ok and cert.proj_ok):
        cert.status = "fail"
    return cert


def mtfd_covariance_bound(a, ell: int, k: int) -> float:
    """``rho / (ell - k) * ||A||_F^2``, the matricized-FD covariance bound."""
    a = check_tensor(a)
    rho = int(np.prod(a.shape[2:]))
    return rho / (ell - k) * fro_norm(a) ** 2


def projection_covariance_gap(a, b, k: int,
                              max_entries: int | None = ORACLE_MAX_ENTRIES) -> float:
    """Slack of ``proj_err <= ||A - A_k||^2 + 2k * cov_err`` (>= 0 when it holds).

    The relation holds for any sketch ``b``, whatever produced it.
    """
    a, b = _pair(a, b)
    tail = best_rank_error(a, k, max_entries)
    cov = covariance_error(a, b, max_entries)
    proj = projection_error(a, sketch_subspace(b, k), max_entries=max_entries)
    return tail + 2 * k * cov - proj
