"""Dense multiband image containers.

Storage is band-sequential: a cube is a (bands, height, width) float64
array, so the flattened C-order layout is all pixels of band 1, then
band 2, and so on, row-major within a band. Band indices in the public
API are 1-based.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DataError, NumericalError


def _as_finite_f64(data, shape, what):
    arr = np.asarray(data, dtype=np.float64)
    if arr.shape != shape:
        raise DataError(f"{what}: expected shape {shape}, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise NumericalError(f"{what}: non-finite samples")
    return arr


@dataclass
class HyperCube:
    """L-band image on an H x W grid, double precision."""

    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.float64)
        if arr.ndim != 3:
            raise DataError(f"cube data must be 3-d (bands, height, width), got ndim={arr.ndim}")
        if not np.all(np.isfinite(arr)):
            raise NumericalError("cube contains non-finite samples")
        self.data = arr

    @property
    def bands(self):
        return self.data.shape[0]

    @property
    def height(self):
        return self.data.shape[1]

    @property
    def width(self):
        return self.data.shape[2]

    @classmethod
    def from_planes(cls, planes):
        """Assemble a cube from a sequence of equally shaped 2-d planes."""
        return cls(np.stack([np.asarray(p, dtype=np.float64) for p in planes], axis=0))

    def band(self, l):
        """Return a copy of the H x W plane of band ``l`` (1-based)."""
        if not 1 <= l <= self.bands:
            raise DataError(f"band index {l} out of range [1, {self.bands}]")
        return self.data[l - 1].copy()

    def copy(self):
        return HyperCube(self.data.copy())


@dataclass
class PanImage:
    """Single-band H x W image, double precision."""

    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.float64)
        if arr.ndim != 2:
            raise DataError(f"pan data must be 2-d (height, width), got ndim={arr.ndim}")
        if not np.all(np.isfinite(arr)):
            raise NumericalError("pan image contains non-finite samples")
        self.data = arr

    @property
    def height(self):
        return self.data.shape[0]

    @property
    def width(self):
        return self.data.shape[1]


@dataclass
class VectorField:
    """Per-pixel 2-vectors stored as a (2, height, width) array.

    Component 0 is the horizontal component, component 1 the vertical one.
    """

    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.float64)
        if arr.ndim != 3 or arr.shape[0] != 2:
            raise DataError(f"vector field must have shape (2, H, W), got {arr.shape}")
        self.data = arr

    @property
    def h(self):
        return self.data[0]

    @property
    def v(self):
        return self.data[1]

    @property
    def height(self):
        return self.data.shape[1]

    @property
    def width(self):
        return self.data.shape[2]

    def norms(self):
        """Per-pixel Euclidean norm, shape (H, W)."""
        return np.hypot(self.data[0], self.data[1])


def axpy(a, x: HyperCube, y: HyperCube) -> HyperCube:
    """Elementwise a*x + y."""
    if x.data.shape != y.data.shape:
        raise DataError(f"axpy shape mismatch: {x.data.shape} vs {y.data.shape}")
    return HyperCube(a * x.data + y.data)


def inner(x: HyperCube, y: HyperCube) -> float:
    """Euclidean inner product over all samples."""
    if x.data.shape != y.data.shape:
        raise DataError(f"inner shape mismatch: {x.data.shape} vs {y.data.shape}")
    return float(np.vdot(x.data, y.data))
