"""Experiment orchestration: sketch sweeps, CSV reports, scene clustering.

A run has two strictly separated phases. The sketching phase streams the
input once per cell and is timed (excluding time spent reading the input)
and optionally memory-profiled. The evaluation phase afterwards loads the
full tensor and computes the oracle error measures.
"""
from __future__ import annotations

import csv
import gc
import io as _io
import time
import tracemalloc
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from dataclasses import dataclass, field
from statistics import fmean
from typing import Sequence

import numpy as np
from scipy import stats
from sklearn.cluster import KMeans

from .baselines import mtfd_stream, normsamp_two_pass, spawn_seeds, srtsvd_stream
from .datagen import ExtremeSpec, SyntheticSpec, gen_extreme, gen_synthetic
from .exceptions import DimensionError
from .io import StreamReader
from .metrics import ORACLE_MAX_ENTRIES, error_report
from .tensor import SpectrumLayout, rfft_modes
from .tfd import tfd_stream
from .tsvd import t_svd

ALGORITHMS = ("tfd", "mtfd", "srtsvd", "normsamp")
RANDOMIZED = {"srtsvd", "normsamp"}

CSV_FIELDS = [
    "algorithm", "ell", "k", "repeat", "dims", "seed",
    "proj_err_ratio", "cov_err_ratio", "c_value",
    "wall_time_s", "io_time_s", "oracle_time_s", "peak_scalars",
    "proj_err", "cov_err", "tail",
]


@contextmanager
def track_peak():
    """Measure peak traced allocation (bytes) inside the block.

    Yields a dict whose ``"peak_bytes"`` and ``"peak_scalars"`` (8-byte
    units) entries are filled on exit.
    """
    out = {"peak_bytes": 0, "peak_scalars": 0.0}
    started = not tracemalloc.is_tracing()
    if started:
        tracemalloc.start()
    base, _ = tracemalloc.get_traced_memory()
    tracemalloc.reset_peak()
    try:
        yield out
    finally:
        _, peak = tracemalloc.get_traced_memory()
        if started:
            tracemalloc.stop()
        out["peak_bytes"] = max(peak - base, 0)
        out["peak_scalars"] = out["peak_bytes"] / 8


class TimedSource:
    """Re-iterable wrapper that accumulates time spent producing slices."""

    def __init__(self, source):
        self.source = source
        self.io_time = 0.0
        self.slice_dims = getattr(source, "slice_dims", None)
        if isinstance(source, np.ndarray):
            self.slice_dims = source.shape[1:]

    def __iter__(self):
        it = iter(self.source)
        while True:
            t0 = time.perf_counter()
            try:
                x = next(it)
            except StopIteration:
                self.io_time += time.perf_counter() - t0
                return
            self.io_time += time.perf_counter() - t0
            yield x


def run_sketch(algorithm: str, source, ell: int, seed: int = 0):
    """Sketch ``source`` with one algorithm; returns ``(sketch, c_value)``."""
    dims = getattr(source, "slice_dims", None)
    if algorithm == "tfd":
        r = tfd_stream(source, ell, trailing_dims=dims)
        return r.sketch, r.c_value
    if algorithm == "mtfd":
        return mtfd_stream(source, ell, trailing_dims=dims), None
    if algorithm == "srtsvd":
        return srtsvd_stream(source, ell, seed, trailing_dims=dims), None
    if algorithm == "normsamp":
        return normsamp_two_pass(source, ell, seed), None
    if algorithm == "identity":
        # test hook: the "sketch" is the input itself
        return np.stack(list(source)), None
    raise ValueError(f"unknown algorithm {algorithm!r}")


@dataclass
class ExperimentConfig:
    """One experiment sweep.

    ``input`` is a stream-file path, a :class:`SyntheticSpec` or an
    :class:`ExtremeSpec`.
    """

    input: object
    algorithms: Sequence[str] = ("tfd",)
    ells: Sequence[int] = (10,)
    ks: Sequence[int] = (5,)
    repeats: int = 1
    seed: int = 0
    out: str | None = None
    n_jobs: int = 1
    track_memory: bool = True
    oracle_max_entries: int | None = ORACLE_MAX_ENTRIES
    extra_algorithms: tuple = field(default=("identity",), repr=False)

    def validate(self) -> None:
        allowed = set(ALGORITHMS) | set(self.extra_algorithms)
        bad = [a for a in self.algorithms if a not in allowed]
        if bad:
            raise ValueError(f"unknown algorithms {bad}")
        if not self.algorithms:
            raise ValueError("no algorithms selected")
        if not self.ells or min(self.ells) < 1:
            raise ValueError("sketch sizes must be >= 1")
        if not self.ks or min(self.ks) < 1:
            raise ValueError("k values must be >= 1")
        if self.repeats < 1:
            raise ValueError("repeats must be >= 1")
        if not isinstance(self.input, (str, SyntheticSpec, ExtremeSpec)) and not hasattr(
            self.input, "__fspath__"
        ):
            raise ValueError(f"unsupported input {self.input!r}")


def _materialize(cfg: ExperimentConfig):
    if isinstance(cfg.input, SyntheticSpec):
        return gen_synthetic(cfg.input)
    if isinstance(cfg.input, ExtremeSpec):
        return gen_extreme(cfg.input)
    return StreamReader(cfg.input)


def _sketch_cell(cfg, source, algorithm, ell, seed):
    timed = TimedSource(source)
    if cfg.track_memory and cfg.n_jobs == 1:
        with track_peak() as mem:
            t0 = time.perf_counter()
            sketch, c = run_sketch(algorithm, timed, ell, seed)
            elapsed = time.perf_counter() - t0
        peak = mem["peak_scalars"]
    else:
        t0 = time.perf_counter()
        sketch, c = run_sketch(algorithm, timed, ell, seed)
        elapsed = time.perf_counter() - t0
        peak = float("nan")
    return {
        "sketch": sketch, "c_value": c, "wall_time_s": elapsed - timed.io_time,
        "io_time_s": timed.io_time, "peak_scalars": peak,
    }


def run_experiment(cfg: ExperimentConfig) -> list[dict]:
    """Run every (algorithm, ell, repeat) cell, then evaluate each k.

    Returns one row per (algorithm, ell, k, repeat) followed by one mean row
    per (algorithm, ell, k) with ``repeat == "mean"``. Writes CSV to
    ``cfg.out`` when set.
    """
    cfg.validate()
    source = _materialize(cfg)
    dims = source.shape if isinstance(source, np.ndarray) else source.dims

    cells = []
    for algorithm in cfg.algorithms:
        seeds = spawn_seeds(cfg.seed, cfg.repeats)
        for ell in cfg.ells:
            for rep in range(cfg.repeats):
                cells.append((algorithm, ell, rep, seeds[rep]))

    def work(cell):
        algorithm, ell, rep, seed = cell
        return _sketch_cell(cfg, source, algorithm, ell, seed)

    if cfg.n_jobs > 1:
        with ThreadPoolExecutor(cfg.n_jobs) as pool:
            sketched = list(pool.map(work, cells))
    else:
        sketched = [work(c) for c in cells]

    # evaluation phase: the full tensor is loaded only now
    a = source if isinstance(source, np.ndarray) else source.read_all()
    rows = []
    for (algorithm, ell, rep, seed), res in zip(cells, sketched):
        for k in cfg.ks:
            t0 = time.perf_counter()
            rep_ = error_report(
                a, res["sketch"], k, algorithm=algorithm, ell=ell,
                c_value=res["c_value"], wall_time_s=res["wall_time_s"],
                max_entries=cfg.oracle_max_entries,
            )
            rows.append({
                "algorithm": algorithm, "ell": ell, "k": k, "repeat": rep,
                "dims": "x".join(map(str, dims)), "seed": seed,
                "proj_err_ratio": rep_.proj_err_ratio,
                "cov_err_ratio": rep_.cov_err_ratio,
                "c_value": rep_.c_value,
                "wall_time_s": res["wall_time_s"], "io_time_s": res["io_time_s"],
                "oracle_time_s": time.perf_counter() - t0,
                "peak_scalars": res["peak_scalars"],
                "proj_err": rep_.proj_err, "cov_err": rep_.cov_err, "tail": rep_.tail,
            })
    rows.extend(_mean_rows(rows))
    if cfg.out:
        with open(cfg.out, "w", newline="") as fh:
            write_csv(rows, fh)
    return rows


def _mean_rows(rows: list[dict]) -> list[dict]:
    groups: dict[tuple, list[dict]] = {}
    for r in rows:
        groups.setdefault((r["algorithm"], r["ell"], r["k"]), []).append(r)
    out = []
    numeric = ["proj_err_ratio", "cov_err_ratio", "wall_time_s", "io_time_s",
               "oracle_time_s", "peak_scalars", "proj_err", "cov_err", "tail"]
    for (algorithm, ell, k), grp in groups.items():
        row = {"algorithm": algorithm, "ell": ell, "k": k, "repeat": "mean",
               "dims": grp[0]["dims"], "seed": ""}
        for name in numeric:
            row[name] = fmean(r[name] for r in grp)
        cs = [r["c_value"] for r in grp if r["c_value"] is not None]
        row["c_value"] = fmean(cs) if cs else None
        out.append(row)
    return out


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_csv(rows: list[dict], fh) -> None:
    """RFC 4180 CSV with the fixed :data:`CSV_FIELDS` header."""
    w = csv.writer(fh, lineterminator="\r\n")
    w.writerow(CSV_FIELDS)
    for r in rows:
        w.writerow([_fmt(r.get(name)) for name in CSV_FIELDS])


def rows_to_csv(rows: list[dict]) -> str:
    buf = _io.StringIO()
    write_csv(rows, buf)
    return buf.getvalue()


def _projector_slices(v_k: np.ndarray, layout: SpectrumLayout) -> np.ndarray:
    fv = layout.to_slices(rfft_modes(v_k))
    return np.matmul(fv, np.conj(fv).transpose(0, 2, 1))


def scene_features(source, ell: int, k: int | None = None,
                   features: str = "projection") -> np.ndarray:
    """Per-frame feature vectors, shape ``(n_frames, dim)``.

    Frames are mode 3 of an ``n1 x n2 x n_frames`` stream. The stream is
    sketched with t-FD and the sketch's leading right singular tensor
    ``V_k`` (``k`` defaults to ``ell // 2``) is computed.

    ``features="projection"`` makes a second pass computing
    ``A * V_k * V_k^T``, the stream projected onto the dominant subspace,
    and averages it over mode 2, giving one ``n1``-vector per frame. The
    projection does not depend on the basis chosen for ``V_k``.

    ``features="sketch_u"`` averages the sketch's own left factor ``U``
    (``ell x ell x n_frames``) over mode 2. An FD sketch already has
    orthogonal, sorted rows in every Fourier slice, so this ``U`` is the
    identity up to phase and the features carry little information; it is
    kept for comparison.
    """
    dims = getattr(source, "slice_dims", None)
    if isinstance(source, np.ndarray):
        dims = source.shape[1:]
    if dims is None or len(dims) != 2:
        raise DimensionError("scene classification expects an n1 x n2 x frames stream")
    result = tfd_stream(source, ell, trailing_dims=dims)
    if features == "sketch_u":
        return t_svd(result.sketch).u.mean(axis=1).T
    if features != "projection":
        raise ValueError(f"unknown features {features!r}")

    k = max(1, ell // 2) if k is None else k
    n2 = dims[0]
    k = min(k, n2, ell)
    v_k = t_svd(result.sketch).v[:, :k]
    layout = SpectrumLayout(dims[1:])
    proj = _projector_slices(v_k, layout)
    rows = []
    for x in source:
        x = np.asarray(x, dtype=float).reshape(dims)
        fx = np.fft.rfft(x, axis=1).T[:, None, :]
        px = np.matmul(fx, proj)[:, 0, :].T
        rows.append(np.fft.irfft(px, n=dims[1], axis=1).mean(axis=0))
    return np.array(rows).T


def classify_scenes(source, ell: int, n_clusters: int = 2, seed: int = 0,
                    k: int | None = None, features: str = "projection",
                    n_init: int = 20, return_model: bool = False):
    """Cluster the frames of a video-like stream.

    ``source`` is an ``n1 x n2 x n_frames`` tensor, a stream-file path or a
    :class:`~tensorfd.io.StreamReader`; it is read twice. Frames must be
    along mode 3 (pre-orient the tensor if they are not). Clustering is
    Lloyd's k-means with k-means++ seeding and ``n_init`` restarts.
    """
    if n_clusters < 2:
        raise ValueError(f"n_clusters must be >= 2, got {n_clusters}")
    if isinstance(source, str) or hasattr(source, "__fspath__"):
        source = StreamReader(source)
    feats = scene_features(source, ell, k=k, features=features)
    km = KMeans(n_clusters, init="k-means++", n_init=n_init, random_state=seed)
    labels = km.fit_predict(feats)
    if return_model:
        return labels, km, feats
    return labels


def runtime_scaling(n1_values: Sequence[int], n2: int = 40, n3: int = 8,
                    ell: int = 10, seed: int = 0, repeats: int = 5):
    """Time t-FD for several stream lengths; fit time against ``n1``.

    Returns ``(times, r_squared)``. Each time is the minimum over
    ``repeats`` runs on the same tensor. Runs are interleaved (every round
    times every length once) so drift in machine speed hits all lengths
    alike, and garbage collection is paused while the clock runs.
    """
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((max(n1_values), n2, n3))
    times = [float("inf")] * len(n1_values)
    gc_was_enabled = gc.isenabled()
    for _ in range(repeats):
        for i, n1 in enumerate(n1_values):
            gc.collect()
            gc.disable()
            try:
                t0 = time.perf_counter()
                tfd_stream(a[:n1], ell)
                times[i] = min(times[i], time.perf_counter() - t0)
            finally:
                if gc_was_enabled:
                    gc.enable()
    fit = stats.linregress(np.asarray(n1_values, dtype=float), times)
    return times, float(fit.rvalue**2)
