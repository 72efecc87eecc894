"""Closed-form proximal maps and ball projections for the split blocks."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError
from .operators import spatial_downsample, spatial_downsample_adjoint


def prox_tv(z, tau):
    """Vector soft-threshold of per-pixel 2-vectors.

    ``z`` has the 2-vector axis at position -3, i.e. shape (..., 2, H, W).
    Each 2-vector is shrunk toward zero by tau in norm; vectors with
    norm <= tau collapse to zero.
    """
    if tau < 0:
        raise DataError("threshold must be nonnegative")
    z = np.asarray(z, dtype=np.float64)
    norms = np.sqrt(np.sum(z * z, axis=-3, keepdims=True))
    scale = np.zeros_like(norms)
    np.divide(np.maximum(norms - tau, 0.0), norms, out=scale, where=norms > 0)
    return z * scale


def prox_levelline(z, eta, tau):
    """Soft-threshold the component of z along a unit (or zero) direction.

    Minimizes tau * |<y, eta>| + 0.5 * ||y - z||^2 per pixel: the
    coordinate of z along eta is scalar-soft-thresholded by tau, the
    orthogonal part passes through. Where eta is zero the map is the
    identity.

    ``z`` is (..., 2, H, W); ``eta`` is (2, H, W) and broadcasts.
    """
    if tau < 0:
        raise DataError("threshold must be nonnegative")
    z = np.asarray(z, dtype=np.float64)
    eta = np.asarray(eta, dtype=np.float64)
    coef = np.sum(z * eta, axis=-3, keepdims=True)
    shrunk = np.sign(coef) * np.maximum(np.abs(coef) - tau, 0.0)
    # eta has norm 0 or 1, so subtracting (coef - shrunk) * eta leaves the
    # orthogonal component untouched and is a no-op where eta = 0.
    return z - (coef - shrunk) * eta


class IdentitySelector:
    """Trivial selector: measurement space equals block space."""

    def apply(self, z):
        return np.asarray(z, dtype=np.float64)

    def adjoint(self, r, shape=None):
        return np.asarray(r, dtype=np.float64)


class SpatialDecimation:
    """Keeps one pixel per q x q block at a fixed offset."""

    def __init__(self, q, offset=(0, 0)):
        self.q = q
        self.offset = offset

    def apply(self, z):
        return spatial_downsample(z, self.q, self.offset)

    def adjoint(self, r, shape=None):
        return spatial_downsample_adjoint(r, self.q, shape, self.offset)


class SpectralDecimation:
    """Keeps band 0 of a (L, H, W) stack."""

    def __init__(self, bands):
        self.bands = bands

    def apply(self, z):
        return np.asarray(z, dtype=np.float64)[0]

    def adjoint(self, r, shape=None):
        out = np.zeros((self.bands,) + np.asarray(r).shape)
        out[0] = r
        return out


@dataclass
class BallSpec:
    """An L2 ball ||selector(y) - data|| <= radius in measurement space."""

    data: np.ndarray
    radius: float
    selector: object

    def __post_init__(self):
        if self.radius < 0:
            raise DataError("ball radius must be nonnegative")
        self.data = np.asarray(self.data, dtype=np.float64)

    def residual_norm(self, z):
        return float(np.linalg.norm(self.selector.apply(z) - self.data))


def project_ball(z, spec: BallSpec):
    """Exact Euclidean projection onto the ball defined by ``spec``.

    Coordinates annihilated by the selector are returned untouched;
    the selected coordinates are pulled radially onto the boundary when
    infeasible.
    """
    z = np.asarray(z, dtype=np.float64)
    r = spec.selector.apply(z) - spec.data
    nr = np.linalg.norm(r)
    if nr <= spec.radius:
        return z.copy()
    shrink = 1.0 - spec.radius / nr
    return z - spec.selector.adjoint(shrink * r, z.shape)
