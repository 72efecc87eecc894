import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def dense_matrix(apply_fn, in_shape, out_size=None):
    """Materialize a linear map as a dense matrix by probing basis vectors."""
    n = int(np.prod(in_shape))
    cols = []
    for i in range(n):
        e = np.zeros(n)
        e[i] = 1.0
        cols.append(np.asarray(apply_fn(e.reshape(in_shape))).ravel())
    return np.stack(cols, axis=1)
