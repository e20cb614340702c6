"""Streaming low-tubal-rank tensor sketching with tensor Frequent Directions."""
from .baselines import (
    MatricizedFrequentDirections,
    NormSampling,
    StreamingRandomizedTSVD,
    mtfd_stream,
    normsamp_two_pass,
    srtsvd_stream,
)
from .datagen import (
    ExtremeSpec,
    SyntheticSpec,
    gen_extreme,
    gen_partial_orthogonal,
    gen_scenes,
    gen_synthetic,
)
from .fd import FrequentDirections, frequent_directions
from .metrics import certify_bounds, covariance_error, projection_error
from .tensor import FourierTensor, fft_modes, ifft_modes, t_product, t_transpose
from .tfd import SketchResult, SketchState, TensorFrequentDirections, tfd_stream
from .tsvd import TsvdFactors, t_svd, truncate_k, tubal_rank

__version__ = "0.1.0"

__all__ = [
    "ExtremeSpec", "FourierTensor", "FrequentDirections", "MatricizedFrequentDirections",
    "NormSampling", "SketchResult", "SketchState", "StreamingRandomizedTSVD",
    "SyntheticSpec", "TensorFrequentDirections", "TsvdFactors", "certify_bounds",
    "covariance_error", "fft_modes", "frequent_directions", "gen_extreme",
    "gen_partial_orthogonal", "gen_scenes", "gen_synthetic", "ifft_modes", "mtfd_stream",
    "normsamp_two_pass", "projection_error", "srtsvd_stream", "t_product", "t_svd",
    "t_transpose", "tfd_stream", "truncate_k", "tubal_rank",
]
