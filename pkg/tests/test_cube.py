import numpy as np
import pytest

from panfuse.cube import HyperCube, PanImage, VectorField, axpy, inner
from panfuse.errors import DataError, NumericalError


def test_band_extraction():
    cube = HyperCube.from_planes([np.zeros((3, 4)), np.ones((3, 4))])
    assert np.array_equal(cube.band(2), np.ones((3, 4)))
    assert np.array_equal(cube.band(1), np.zeros((3, 4)))


def test_band_out_of_range():
    cube = HyperCube(np.zeros((2, 3, 3)))
    with pytest.raises(DataError):
        cube.band(0)
    with pytest.raises(DataError):
        cube.band(3)


def test_plane_round_trip_bit_exact(rng):
    planes = [rng.standard_normal((5, 7)) for _ in range(4)]
    cube = HyperCube.from_planes(planes)
    for l, plane in enumerate(planes, start=1):
        assert np.array_equal(cube.band(l), plane)


def test_band_returns_copy():
    cube = HyperCube(np.zeros((1, 2, 2)))
    plane = cube.band(1)
    plane[0, 0] = 5.0
    assert cube.data[0, 0, 0] == 0.0


def test_rejects_non_finite():
    bad = np.zeros((1, 2, 2))
    bad[0, 0, 0] = np.nan
    with pytest.raises(NumericalError):
        HyperCube(bad)
    with pytest.raises(NumericalError):
        PanImage(np.array([[np.inf, 0.0]]))


def test_axpy():
    x = HyperCube(np.ones((2, 2, 2)))
    y = HyperCube(np.ones((2, 2, 2)))
    zero = HyperCube(np.zeros((2, 2, 2)))
    assert np.array_equal(axpy(0.0, x, y).data, y.data)
    assert np.array_equal(axpy(1.0, x, zero).data, x.data)
    assert np.array_equal(axpy(2.0, x, y).data, np.full((2, 2, 2), 3.0))


def test_axpy_shape_mismatch():
    with pytest.raises(DataError):
        axpy(1.0, HyperCube(np.zeros((1, 2, 2))), HyperCube(np.zeros((1, 3, 3))))


def test_inner_symmetric_linear(rng):
    a = HyperCube(rng.standard_normal((3, 4, 4)))
    b = HyperCube(rng.standard_normal((3, 4, 4)))
    c = HyperCube(rng.standard_normal((3, 4, 4)))
    assert inner(a, b) == pytest.approx(inner(b, a), rel=1e-14)
    lhs = inner(axpy(2.5, a, b), c)
    rhs = 2.5 * inner(a, c) + inner(b, c)
    assert lhs == pytest.approx(rhs, rel=1e-12)


def test_vector_field_shape_check():
    with pytest.raises(DataError):
        VectorField(np.zeros((3, 4, 4)))
    f = VectorField(np.zeros((2, 4, 4)))
    assert f.norms().shape == (4, 4)
