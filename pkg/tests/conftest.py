import numpy as np
import pytest

from tensorfd.tensor import bcirc_fold, bcirc_matrix, bcirc_unfold


@pytest.fixture
def rng():
    return np.random.default_rng(20240517)


def naive_dft(x, axis):
    """O(n^2) DFT along one axis, written out as a double loop."""
    x = np.moveaxis(np.asarray(x, dtype=complex), axis, -1)
    n = x.shape[-1]
    out = np.zeros_like(x)
    for f in range(n):
        for t in range(n):
            out[..., f] += x[..., t] * np.exp(-2j * np.pi * f * t / n)
    return np.moveaxis(out, -1, axis)


def bcirc_product(a, b):
    """t-product through the explicit block-circulant matrix."""
    c_dims = (a.shape[0], b.shape[1]) + a.shape[2:]
    return bcirc_fold(bcirc_matrix(a) @ bcirc_unfold(b), c_dims)


def random_tensor_shape(rng, max_dim=4, order=None):
    order = order or int(rng.integers(3, 5))
    return tuple(int(n) for n in rng.integers(1, max_dim + 1, size=order))


ACCEPTANCE_LINES = []


def record_criterion(number, name, ok, detail=""):
    line = f"CRITERION {number:2d} {'PASS' if ok else 'FAIL'}  {name}"
    if detail:
        line += f"  ({detail})"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
