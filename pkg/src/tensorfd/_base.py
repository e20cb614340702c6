"""Shared estimator plumbing for tensor sketchers."""
from __future__ import annotations

import numpy as np
from sklearn.base import TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .exceptions import DimensionError
from .tensor import t_product, t_transpose
from .tsvd import t_svd


def check_stream(X, trailing_dims=None) -> np.ndarray:
    """Validate a block of horizontal slices ``(n, n2, n3, ...)``."""
    X = check_array(X, allow_nd=True, ensure_2d=False, ensure_min_samples=0)
    if X.ndim < 3:
        raise DimensionError(f"expected an order >= 3 tensor, got shape {X.shape}")
    if trailing_dims is not None and X.shape[1:] != tuple(trailing_dims):
        raise DimensionError(
            f"slices have shape {X.shape[1:]}, expected {tuple(trailing_dims)}"
        )
    return X


class TensorSketchMixin(TransformerMixin):
    """``transform`` / ``inverse_transform`` through the sketch's top right
    singular tensor ``V_k`` (``n2 x k x n3 x ...``).

    Subclasses set ``sketch_`` and call :meth:`_set_components`.
    """

    def _set_components(self):
        ell, n2 = self.sketch_.shape[:2]
        k = min(ell, n2) if self.n_components is None else self.n_components
        if not 1 <= k <= min(ell, n2):
            raise ValueError(f"n_components must lie in [1, {min(ell, n2)}], got {k}")
        self.components_ = np.ascontiguousarray(t_svd(self.sketch_).v[:, :k])

    def transform(self, X):
        """Project slices onto the sketch subspace: ``X * V_k``."""
        check_is_fitted(self, "components_")
        X = check_stream(X, (self.components_.shape[0],) + self.components_.shape[2:])
        return t_product(X, self.components_)

    def inverse_transform(self, Z):
        """Map coefficients back: ``Z * V_k^T``."""
        check_is_fitted(self, "components_")
        return t_product(Z, t_transpose(self.components_))
