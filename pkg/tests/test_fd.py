import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sklearn.base import clone

from tensorfd.exceptions import DimensionError
from tensorfd.fd import (
    FrequentDirections,
    fd_finalize,
    fd_init,
    fd_insert,
    fd_shrink,
    frequent_directions,
)


def tail(a, k):
    s = np.linalg.svd(a, compute_uv=False)
    return float(np.sum(s[k:] ** 2))


def test_insert_into_empty_state():
    state = fd_insert(fd_init(3, 4), np.ones(4))
    assert state.loss_sum == 0 and state.fill == 1


def test_insert_length_mismatch():
    with pytest.raises(DimensionError):
        fd_insert(fd_init(3, 4), np.ones(5))


def test_init_rejects_bad_ell():
    with pytest.raises(ValueError):
        fd_init(0, 4)


def test_identical_rows_zero_out():
    ell = 4
    state = fd_init(ell, 6)
    for _ in range(2 * ell):
        fd_insert(state, np.eye(6)[0])
    assert state.n_shrinks == 1
    zero_rows = np.sum(np.all(state.buffer == 0, axis=1))
    assert zero_rows >= ell + 1


def test_shrink_low_rank_buffer_is_rotation(rng):
    ell = 4
    state = fd_init(ell, 6)
    rows = rng.standard_normal((ell - 1, 6))
    state.buffer[: ell - 1] = rows
    before = rows.T @ rows
    fd_shrink(state)
    assert state.loss_sum == 0
    np.testing.assert_allclose(state.buffer.T @ state.buffer, before, atol=1e-12)


def test_shrink_orthonormal_rows():
    ell = 3
    state = fd_init(ell, 8)
    state.buffer[:] = np.eye(8)[: 2 * ell]
    fd_shrink(state)
    assert state.loss_sum == pytest.approx(1.0)
    assert np.all(state.buffer == 0)


def test_shrink_semidefinite_order(rng):
    ell = 5
    state = fd_init(ell, 12)
    state.buffer[:] = rng.standard_normal((2 * ell, 12))
    c = state.buffer.copy()
    fd_shrink(state)
    b = state.buffer
    delta = state.deltas[-1]
    diff = c.T @ c - b.T @ b
    eig = np.linalg.eigvalsh(diff)
    assert eig.min() >= -1e-10
    assert eig.max() <= delta + 1e-10
    assert np.sum(np.all(b == 0, axis=1)) >= ell + 1


def test_stream_bound(rng):
    a = rng.standard_normal((50, 10))
    ell = 5
    b = frequent_directions(a, ell)
    cov = np.linalg.norm(a.T @ a - b.T @ b, 2)
    for k in range(ell):
        assert cov <= tail(a, k) / (ell - k) * (1 + 1e-9)


def test_zero_stream():
    assert np.all(frequent_directions(np.zeros((30, 5)), 4) == 0)


def test_short_stream_kept_verbatim(rng):
    a = rng.standard_normal((3, 7))
    b = frequent_directions(a, 5)
    np.testing.assert_array_equal(b[:3], a)
    assert np.all(b[3:] == 0)


def test_finalize_forces_shrink(rng):
    ell = 4
    state = fd_init(ell, 6)
    for row in rng.standard_normal((ell + 2, 6)):
        fd_insert(state, row)
    assert state.n_shrinks == 0
    b = fd_finalize(state)
    assert state.n_shrinks == 1
    assert b.shape == (ell, 6)


def test_loss_sum_nondecreasing(rng):
    state = fd_init(3, 5)
    seen = [0.0]
    for row in rng.standard_normal((40, 5)):
        fd_insert(state, row)
        seen.append(state.loss_sum)
    assert np.all(np.diff(seen) >= 0)
    assert state.fill <= 6


@settings(max_examples=30, deadline=None)
@given(n=st.integers(1, 60), d=st.integers(1, 12), ell=st.integers(1, 8),
       seed=st.integers(0, 2**32 - 1))
def test_fd_properties(n, d, ell, seed):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((n, d)) * rng.uniform(0.1, 10, size=(n, 1))
    b = frequent_directions(a, ell)
    scale = np.sum(a**2)
    g = a.T @ a - b.T @ b
    assert np.linalg.eigvalsh(g).min() >= -1e-9 * scale
    cov = np.linalg.eigvalsh(g).max()
    for k in range(min(ell, d)):
        assert cov <= tail(a, k) / (ell - k) + 1e-9 * scale
    for x in rng.standard_normal((5, d)):
        x /= np.linalg.norm(x)
        assert np.sum((a @ x) ** 2) >= np.sum((b @ x) ** 2) - 1e-9 * scale


def test_estimator(rng):
    a = rng.standard_normal((40, 8))
    est = FrequentDirections(ell=4, n_components=2).fit(a)
    np.testing.assert_allclose(est.sketch_, frequent_directions(a, 4))
    assert est.transform(a).shape == (40, 2)
    assert est.inverse_transform(est.transform(a)).shape == (40, 8)
    assert clone(est).get_params() == {"ell": 4, "n_components": 2}


def test_estimator_partial_fit_matches_fit(rng):
    a = rng.standard_normal((37, 6))
    whole = FrequentDirections(ell=3).fit(a)
    parts = FrequentDirections(ell=3)
    for chunk in np.array_split(a, 5):
        parts.partial_fit(chunk)
    np.testing.assert_allclose(parts.sketch_, whole.sketch_, atol=1e-12)
    with pytest.raises(DimensionError):
        parts.partial_fit(np.ones((2, 7)))
