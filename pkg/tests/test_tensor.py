import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tensorfd.exceptions import DimensionError, NumericalError, SizeCapError
from tensorfd.tensor import (
    FourierTensor,
    SpectrumLayout,
    bcirc_matrix,
    fft_modes,
    fold_mode1,
    fro_norm,
    identity_tensor,
    ifft_modes,
    rfft_modes,
    t_product,
    t_transpose,
    tensor_spectral_norm,
    tube_norm,
    unfold_mode1,
)

from conftest import bcirc_product, naive_dft


def test_fft_modes_zero():
    f = fft_modes(np.zeros((2, 2, 2)))
    assert np.all(f.data == 0)
    assert f.real_sourced


def test_fft_modes_constant_tube():
    a = np.ones((1, 1, 4))
    np.testing.assert_allclose(fft_modes(a).data[0, 0], [4, 0, 0, 0], atol=1e-15)


def test_fft_modes_matches_naive_dft(rng):
    a = rng.standard_normal((2, 3, 4))
    np.testing.assert_allclose(fft_modes(a).data, naive_dft(a, 2), atol=1e-12, rtol=0)


def test_fft_modes_order_four_matches_naive(rng):
    a = rng.standard_normal((2, 2, 3, 5))
    expected = naive_dft(naive_dft(a, 2), 3)
    np.testing.assert_allclose(fft_modes(a).data, expected, atol=1e-12)


def test_fft_modes_rejects_order_two():
    with pytest.raises(DimensionError):
        fft_modes(np.zeros((3, 3)))


def test_ifft_round_trip(rng):
    a = rng.standard_normal((3, 2, 5))
    back = ifft_modes(fft_modes(a))
    assert back.dtype == np.float64
    np.testing.assert_allclose(back, a, rtol=1e-12, atol=1e-12)


def test_ifft_zero_and_constant():
    assert np.all(ifft_modes(fft_modes(np.zeros((2, 2, 3)))) == 0)
    tube = FourierTensor(np.array([4, 0, 0, 0], dtype=complex).reshape(1, 1, 4), True)
    np.testing.assert_allclose(ifft_modes(tube), np.ones((1, 1, 4)))


def test_ifft_flags_inconsistent_real_source(rng):
    data = rng.standard_normal((2, 2, 4)) + 1j * rng.standard_normal((2, 2, 4))
    with pytest.raises(NumericalError):
        ifft_modes(FourierTensor(data, real_sourced=True))
    # without the flag the complex result is simply returned
    assert np.iscomplexobj(ifft_modes(FourierTensor(data, real_sourced=False)))


@pytest.mark.parametrize("dims", [(2, 3, 4), (3, 2, 5), (2, 2, 3, 4), (1, 2, 2, 2, 3)])
def test_conjugate_symmetry(rng, dims):
    assert fft_modes(rng.standard_normal(dims)).conjugate_symmetry_error() < 1e-10


def test_identity_product(rng):
    a = rng.standard_normal((3, 4, 5))
    np.testing.assert_allclose(t_product(identity_tensor(3, (5,)), a), a, atol=1e-12)
    np.testing.assert_allclose(t_product(a, identity_tensor(4, (5,))), a, atol=1e-12)


def test_product_n3_one_is_matmul(rng):
    a = rng.standard_normal((3, 4, 1))
    b = rng.standard_normal((4, 2, 1))
    np.testing.assert_allclose(t_product(a, b)[..., 0], a[..., 0] @ b[..., 0], atol=1e-12)


def test_product_matches_bcirc(rng):
    a = rng.standard_normal((2, 2, 2))
    b = rng.standard_normal((2, 2, 2))
    np.testing.assert_allclose(t_product(a, b), bcirc_product(a, b), atol=1e-12)


def test_product_dimension_errors(rng):
    with pytest.raises(DimensionError):
        t_product(rng.standard_normal((2, 3, 4)), rng.standard_normal((2, 3, 4)))
    with pytest.raises(DimensionError):
        t_product(rng.standard_normal((2, 3, 4)), rng.standard_normal((3, 3, 5)))


def test_transpose_involution_and_matrix_case(rng):
    a = rng.standard_normal((2, 3, 4, 2))
    np.testing.assert_array_equal(t_transpose(t_transpose(a)), a)
    m = rng.standard_normal((2, 3, 1))
    np.testing.assert_array_equal(t_transpose(m)[..., 0], m[..., 0].T)


def test_transpose_bcirc_identity(rng):
    a = rng.standard_normal((2, 3, 4))
    np.testing.assert_allclose(bcirc_matrix(t_transpose(a)), bcirc_matrix(a).T)


def test_bcirc_small_cases(rng):
    a = np.array([1.5, -2.0]).reshape(1, 1, 2)
    np.testing.assert_array_equal(bcirc_matrix(a), [[1.5, -2.0], [-2.0, 1.5]])
    m = rng.standard_normal((3, 2, 1))
    np.testing.assert_array_equal(bcirc_matrix(m), m[..., 0])


def test_bcirc_homomorphism(rng):
    a = rng.standard_normal((2, 2, 3))
    b = rng.standard_normal((2, 2, 3))
    np.testing.assert_allclose(
        bcirc_matrix(t_product(a, b)), bcirc_matrix(a) @ bcirc_matrix(b), atol=1e-10
    )


def test_bcirc_cap():
    with pytest.raises(SizeCapError):
        bcirc_matrix(np.zeros((10, 10, 101)))


def test_fro_norm(rng):
    assert fro_norm(np.zeros((2, 2, 2))) == 0
    a = np.zeros((2, 2, 2))
    a[1, 0, 1] = 3
    assert fro_norm(a) == 3
    b = rng.standard_normal((3, 2, 4))
    rho = 4
    parseval = np.linalg.norm(fft_modes(b).data) ** 2 / rho
    assert fro_norm(b) ** 2 == pytest.approx(parseval, rel=1e-10)


def test_tube_norm(rng):
    assert tube_norm(np.zeros((3, 1, 4))) == 0
    e = np.zeros((3, 1, 4))
    e[2, 0, 1] = 1
    assert tube_norm(e) == 1
    x = rng.standard_normal((3, 1, 4))
    assert tube_norm(x) == fro_norm(x)
    with pytest.raises(DimensionError):
        tube_norm(np.zeros((3, 2, 4)))


def test_spectral_norm(rng):
    assert tensor_spectral_norm(np.zeros((2, 2, 3))) == 0
    m = rng.standard_normal((3, 4, 1))
    assert tensor_spectral_norm(m) == pytest.approx(np.linalg.norm(m[..., 0], 2), rel=1e-12)
    a = rng.standard_normal((2, 2, 2))
    assert tensor_spectral_norm(a) == pytest.approx(np.linalg.norm(bcirc_matrix(a), 2), rel=1e-10)


def test_unfold_layout():
    a = np.arange(8, dtype=float).reshape(2, 2, 2)
    # [A^(1) A^(2)] with A^(i) = a[:, :, i]
    expected = np.hstack([a[:, :, 0], a[:, :, 1]])
    np.testing.assert_array_equal(unfold_mode1(a), expected)
    np.testing.assert_array_equal(unfold_mode1(a), [[0, 2, 1, 3], [4, 6, 5, 7]])


def test_unfold_fourth_order_block_order(rng):
    a = rng.standard_normal((2, 3, 2, 3))
    u = unfold_mode1(a)
    # mode-3 index varies fastest across the column blocks
    for i4 in range(3):
        for i3 in range(2):
            block = i3 + 2 * i4
            np.testing.assert_array_equal(u[:, 3 * block:3 * block + 3], a[:, :, i3, i4])


def test_fold_unfold_inverse(rng):
    a = rng.standard_normal((3, 2, 4, 2))
    np.testing.assert_array_equal(fold_mode1(unfold_mode1(a), a.shape), a)
    m = rng.standard_normal((3, 2, 1))
    np.testing.assert_array_equal(unfold_mode1(m), m[..., 0])


@pytest.mark.parametrize("trailing", [(1,), (2,), (5,), (6,), (4, 3), (3, 4), (2, 2, 3)])
def test_spectrum_layout_weights(trailing):
    layout = SpectrumLayout(trailing)
    assert layout.weights.sum() == layout.rho
    # self-conjugate slices are exactly the real ones
    a = np.random.default_rng(1).standard_normal((2, 2) + trailing)
    sl = layout.to_slices(rfft_modes(a))
    for i in range(layout.m):
        if layout.self_conjugate[i]:
            assert np.abs(sl[i].imag).max() < 1e-12
        if layout.source[i] != i:
            np.testing.assert_allclose(sl[i], np.conj(sl[layout.source[i]]), atol=1e-12)


dims_strategy = st.tuples(
    st.integers(1, 4), st.integers(1, 4), st.integers(1, 4), st.integers(1, 3)
)


@settings(max_examples=40, deadline=None)
@given(dims=dims_strategy, seed=st.integers(0, 2**32 - 1))
def test_parseval_property(dims, seed):
    a = np.random.default_rng(seed).standard_normal(dims)
    rho = dims[2] * dims[3]
    lhs = rho * fro_norm(a) ** 2
    rhs = np.linalg.norm(fft_modes(a).data) ** 2
    assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(n=st.lists(st.integers(1, 4), min_size=4, max_size=4),
       trailing=st.lists(st.integers(1, 4), min_size=1, max_size=2),
       seed=st.integers(0, 2**32 - 1))
def test_product_algebra_properties(n, trailing, seed):
    rng = np.random.default_rng(seed)
    tr = tuple(trailing)
    a = rng.standard_normal((n[0], n[1]) + tr)
    b = rng.standard_normal((n[1], n[2]) + tr)
    c = rng.standard_normal((n[2], n[3]) + tr)
    left = t_product(t_product(a, b), c)
    right = t_product(a, t_product(b, c))
    np.testing.assert_allclose(left, right, atol=1e-10 * max(1.0, np.abs(left).max()))
    np.testing.assert_allclose(
        t_transpose(t_product(a, b)), t_product(t_transpose(b), t_transpose(a)), atol=1e-10
    )
    np.testing.assert_allclose(
        bcirc_matrix(t_product(a, b)), bcirc_matrix(a) @ bcirc_matrix(b), atol=1e-10
    )
