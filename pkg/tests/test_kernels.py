import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from covertkey import _kernels
from covertkey.probcore import empirical_mi

BACKENDS = [pytest.param(_kernels.python_backend, id="python")]
if _kernels.compiled_backend is not None:
    BACKENDS.append(pytest.param(_kernels.compiled_backend, id="cython"))


@pytest.mark.parametrize("backend", BACKENDS)
def test_mi_matrix_matches_types(backend):
    rng = np.random.default_rng(0)
    xs = rng.integers(0, 2, size=(7, 9))
    ys = rng.integers(0, 3, size=(5, 9))
    out = backend.mi_matrix(xs, ys, 2, 3)
    assert out.shape == (7, 5)
    for i in range(7):
        for j in range(5):
            assert out[i, j] == pytest.approx(empirical_mi(xs[i].tolist(), ys[j].tolist()), abs=1e-12)


@pytest.mark.parametrize("backend", BACKENDS)
def test_row_matches(backend):
    entries = np.array([[0, 1, 1], [1, 1, 1], [0, 1, 1]])
    assert backend.row_matches(np.array([0, 1, 1]), entries).tolist() == [1, 0, 1]


@pytest.mark.parametrize("backend", BACKENDS)
def test_mi_rows(backend):
    x = np.array([0, 1, 0, 1])
    ys = np.array([[0, 1, 0, 1], [1, 1, 1, 1]])
    np.testing.assert_allclose(backend.mi_rows(x, ys, 2, 2), [1.0, 0.0], atol=1e-12)


@pytest.mark.skipif(_kernels.compiled_backend is None, reason="compiled backend not built")
@settings(max_examples=30, deadline=None)
@given(st.integers(1, 12), st.integers(1, 6), st.integers(1, 6), st.integers(0, 2**32 - 1))
def test_backends_agree(n, a, b, seed):
    rng = np.random.default_rng(seed)
    xs = rng.integers(0, 2, size=(a, n))
    ys = rng.integers(0, 3, size=(b, n))
    py = _kernels.python_backend.mi_matrix(xs, ys, 2, 3)
    cy = _kernels.compiled_backend.mi_matrix(xs, ys, 2, 3)
    np.testing.assert_allclose(py, cy, atol=1e-12)
    np.testing.assert_array_equal(
        _kernels.python_backend.row_matches(ys[0], ys), _kernels.compiled_backend.row_matches(ys[0], ys)
    )


def test_backend_flag():
    assert _kernels.BACKEND in ("cython", "python")
