"""Linear operators of the fusion model, with exact adjoints.

Everything uses periodic boundary conditions, so each operator is
circulant and the stacked normal equations can be inverted exactly in
the Fourier domain.

Conventions:
  - gradient: forward differences with wrap-around,
    dh u(i, j) = u(i, j+1 mod W) - u(i, j), likewise dv along rows;
  - spatial decimation keeps the pixel at a fixed offset of each q x q
    block (offset (0, 0) by default);
  - spectral mixing: (Hg u)_l = sum_k g[k] u[(l+k) mod L], so that its
    band 0 equals the panchromatic combination sum_l g[l] u_l.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cube import HyperCube, PanImage, VectorField
from .errors import DataError, NumericalError


@dataclass
class SensorModel:
    """Acquisition parameters of the hyperspectral / panchromatic pair.

    psf is a small 2-d kernel on the high-resolution grid with unit sum.
    g holds the nonnegative spectral weights of the panchromatic sensor.
    sigma_x is the per-band noise std (length L), sigma_p the pan noise std.
    """

    q: int
    psf: np.ndarray
    g: np.ndarray
    sigma_x: np.ndarray
    sigma_p: float

    def __post_init__(self):
        if self.q < 1:
            raise DataError(f"resolution factor q must be >= 1, got {self.q}")
        self.psf = np.asarray(self.psf, dtype=np.float64)
        if self.psf.ndim != 2:
            raise DataError("psf must be a 2-d kernel")
        if abs(self.psf.sum() - 1.0) > 1e-12:
            raise DataError(f"psf must have unit sum, got {self.psf.sum()!r}")
        self.g = np.atleast_1d(np.asarray(self.g, dtype=np.float64))
        if np.any(self.g < 0):
            raise DataError("spectral weights g must be nonnegative")
        self.sigma_x = np.atleast_1d(np.asarray(self.sigma_x, dtype=np.float64))
        if self.sigma_x.size == 1:
            self.sigma_x = np.full(self.g.shape, float(self.sigma_x[0]))
        if np.any(self.sigma_x < 0) or self.sigma_p < 0:
            raise DataError("noise levels must be nonnegative")

    @property
    def bands(self):
        return self.g.size


# ---------------------------------------------------------------------------
# gradients

def grad_plane(plane):
    """Forward-difference gradient of a 2-d array with periodic wrap.

    Returns a (2, H, W) array: horizontal then vertical component.
    """
    plane = np.asarray(plane, dtype=np.float64)
    dh = np.roll(plane, -1, axis=1) - plane
    dv = np.roll(plane, -1, axis=0) - plane
    return np.stack([dh, dv])


def div_plane(field):
    """Exact adjoint of :func:`grad_plane` applied to a (2, H, W) array."""
    field = np.asarray(field, dtype=np.float64)
    if field.ndim != 3 or field.shape[0] != 2:
        raise DataError(f"expected a (2, H, W) field, got shape {field.shape}")
    dh, dv = field[0], field[1]
    return (np.roll(dh, 1, axis=1) - dh) + (np.roll(dv, 1, axis=0) - dv)


def gradient(plane) -> VectorField:
    """Periodic forward-difference gradient of a single-band plane."""
    plane = np.asarray(plane, dtype=np.float64)
    if plane.ndim != 2 or plane.size == 0:
        raise DataError("gradient expects a nonempty 2-d plane")
    return VectorField(grad_plane(plane))


def divergence(field: VectorField):
    """Adjoint of :func:`gradient`; returns a single-band plane."""
    return div_plane(field.data)


def eta_field(p: PanImage, eps_rel=1e-8) -> VectorField:
    """Unit vectors tangent to the level lines of the panchromatic image.

    Per pixel, eta = (-dv p, dh p) / |grad p|, zeroed wherever the
    gradient magnitude falls below eps_rel times its maximum over the
    image. Nonzero vectors have unit norm; a constant image yields the
    all-zero field.
    """
    if eps_rel <= 0:
        raise DataError("eps_rel must be positive")
    g = grad_plane(p.data)
    mag = np.hypot(g[0], g[1])
    thresh = eps_rel * mag.max()
    eta = np.zeros_like(g)
    if thresh > 0:
        keep = mag > thresh
        eta[0][keep] = -g[1][keep] / mag[keep]
        eta[1][keep] = g[0][keep] / mag[keep]
    return VectorField(eta)


# ---------------------------------------------------------------------------
# spatial decimation

def spatial_downsample(plane, q, offset=(0, 0)):
    """Keep the pixel at ``offset`` of each q x q block."""
    plane = np.asarray(plane, dtype=np.float64)
    h, w = plane.shape
    if h % q or w % q:
        raise DataError(f"decimation factor {q} does not divide shape {(h, w)}")
    oy, ox = offset
    return plane[oy::q, ox::q].copy()


def spatial_downsample_adjoint(low, q, shape=None, offset=(0, 0)):
    """Zero-filling adjoint of :func:`spatial_downsample`."""
    low = np.asarray(low, dtype=np.float64)
    h, w = low.shape
    if shape is None:
        shape = (h * q, w * q)
    out = np.zeros(shape)
    oy, ox = offset
    out[oy::q, ox::q] = low
    return out


# ---------------------------------------------------------------------------
# spatial convolution

def psf_transfer(psf, height, width):
    """Fourier transfer of a small kernel embedded on an H x W torus.

    The kernel center ((kh-1)//2, (kw-1)//2) is placed at the origin so
    a symmetric kernel gets a real transfer.
    """
    psf = np.asarray(psf, dtype=np.float64)
    kh, kw = psf.shape
    if kh > height or kw > width:
        raise DataError(f"psf {psf.shape} larger than grid {(height, width)}")
    embedded = np.zeros((height, width))
    cy, cx = (kh - 1) // 2, (kw - 1) // 2
    for i in range(kh):
        for j in range(kw):
            embedded[(i - cy) % height, (j - cx) % width] += psf[i, j]
    return np.fft.fft2(embedded)


def spatial_convolve(plane, psf, adjoint=False):
    """Circular convolution of a plane with a unit-sum kernel, via FFT."""
    plane = np.asarray(plane, dtype=np.float64)
    t = psf_transfer(psf, *plane.shape)
    if adjoint:
        t = np.conj(t)
    return np.fft.ifft2(np.fft.fft2(plane) * t).real


def convolve_with_transfer(planes, transfer):
    """Apply a precomputed spatial transfer to one plane or a band stack."""
    return np.fft.ifft2(np.fft.fft2(planes, axes=(-2, -1)) * transfer, axes=(-2, -1)).real


# ---------------------------------------------------------------------------
# spectral mixing

def pan_mix(cube: HyperCube, g) -> PanImage:
    """Weighted combination of the spectral bands."""
    g = np.asarray(g, dtype=np.float64)
    if g.size != cube.bands:
        raise DataError(f"weight vector length {g.size} != bands {cube.bands}")
    return PanImage(np.tensordot(g, cube.data, axes=(0, 0)))


def pan_mix_adjoint(p: PanImage, g) -> HyperCube:
    """Adjoint of :func:`pan_mix`: band l receives g[l] * p."""
    g = np.asarray(g, dtype=np.float64)
    return HyperCube(g[:, None, None] * p.data[None, :, :])


def spectral_transfer(g, bands):
    """Fourier symbol (along the band axis) of the spectral mixing circulant."""
    g = np.asarray(g, dtype=np.float64)
    if g.size != bands:
        raise DataError(f"weight vector length {g.size} != bands {bands}")
    # (Hg u)_l = sum_k g[k] u[l+k] is circular correlation: symbol conj(fft(g))
    return np.conj(np.fft.fft(g))


def spectral_convolve(cube: HyperCube, g, adjoint=False) -> HyperCube:
    """Circular convolution along the band axis with kernel g.

    Band l of the output is sum_k g[k] * band (l+k mod L) of the input,
    so band 0 coincides with :func:`pan_mix`. The adjoint uses the
    reversed kernel.
    """
    t = spectral_transfer(g, cube.bands)
    if adjoint:
        t = np.conj(t)
    spec = np.fft.fft(cube.data, axis=0) * t[:, None, None]
    return HyperCube(np.fft.ifft(spec, axis=0).real)


# ---------------------------------------------------------------------------
# stacked splitting operator

@dataclass
class SplitVector:
    """Range element of the stacked operator: two gradient blocks, one
    blur block and one spectral-mix block.

    Shapes: grad blocks (L, 2, H, W); blur and mix blocks (L, H, W).
    """

    grad1: np.ndarray
    grad2: np.ndarray
    blur: np.ndarray
    mix: np.ndarray

    @classmethod
    def zeros(cls, bands, height, width):
        return cls(
            np.zeros((bands, 2, height, width)),
            np.zeros((bands, 2, height, width)),
            np.zeros((bands, height, width)),
            np.zeros((bands, height, width)),
        )

    def blocks(self):
        return (self.grad1, self.grad2, self.blur, self.mix)

    def copy(self):
        return SplitVector(*(b.copy() for b in self.blocks()))

    def __add__(self, other):
        return SplitVector(*(a + b for a, b in zip(self.blocks(), other.blocks())))

    def __sub__(self, other):
        return SplitVector(*(a - b for a, b in zip(self.blocks(), other.blocks())))

    def __mul__(self, s):
        return SplitVector(*(s * b for b in self.blocks()))

    __rmul__ = __mul__

    def dot(self, other):
        return float(sum(np.vdot(a, b) for a, b in zip(self.blocks(), other.blocks())))

    def norm(self):
        return float(np.sqrt(sum(np.sum(b * b) for b in self.blocks())))

    def isfinite(self):
        return all(np.all(np.isfinite(b)) for b in self.blocks())


@dataclass
class TransferSet:
    """Fourier symbols of the stacked normal operator.

    denom(omega, xi) = 2(|dh|^2 + |dv|^2) + |psf_hat|^2 + |g_hat|^2,
    shaped (L, H, W); strictly positive because the psf has unit DC gain
    exactly where the gradient symbols vanish.
    """

    grad_h2: np.ndarray
    grad_v2: np.ndarray
    psf_hat: np.ndarray
    spec_hat: np.ndarray
    denom: np.ndarray


class StackOperator:
    """The stacked splitting operator M = [grad; grad; Hs; Hg] over all bands.

    Precomputes the spatial and spectral transfers for a fixed grid so
    apply / adjoint / normal-solve all run as batched FFTs.
    """

    def __init__(self, model: SensorModel, height, width):
        self.model = model
        self.height = height
        self.width = width
        self.bands = model.bands
        self.psf_hat = psf_transfer(model.psf, height, width)
        self.spec_hat = spectral_transfer(model.g, model.bands)

    def apply(self, u) -> SplitVector:
        """Stack [grad u_l; grad u_l; Hs u_l; Hg u] for a (L, H, W) cube."""
        u = np.asarray(u, dtype=np.float64)
        if u.shape != (self.bands, self.height, self.width):
            raise DataError(f"expected cube shape {(self.bands, self.height, self.width)}, got {u.shape}")
        g1 = np.stack([grad_plane(b) for b in u])
        blur = convolve_with_transfer(u, self.psf_hat)
        spec = np.fft.ifft(np.fft.fft(u, axis=0) * self.spec_hat[:, None, None], axis=0).real
        return SplitVector(g1, g1.copy(), blur, spec)

    def adjoint(self, sv: SplitVector):
        """Sum of the block adjoints; returns a (L, H, W) cube."""
        out = np.stack([div_plane(f) for f in sv.grad1])
        out += np.stack([div_plane(f) for f in sv.grad2])
        out += convolve_with_transfer(sv.blur, np.conj(self.psf_hat))
        out += np.fft.ifft(np.fft.fft(sv.mix, axis=0) * np.conj(self.spec_hat)[:, None, None], axis=0).real
        return out

    def transfer_set(self) -> TransferSet:
        """Fourier symbols of M^T M on the (bands, H, W) frequency grid."""
        kh = np.arange(self.width)
        kv = np.arange(self.height)
        dh2 = 4.0 * np.sin(np.pi * kh / self.width) ** 2
        dv2 = 4.0 * np.sin(np.pi * kv / self.height) ** 2
        spatial = 2.0 * (dh2[None, :] + dv2[:, None]) + np.abs(self.psf_hat) ** 2
        denom = spatial[None, :, :] + (np.abs(self.spec_hat) ** 2)[:, None, None]
        if denom.min() <= 0:
            raise NumericalError("normal-operator symbol not positive; check psf normalization")
        return TransferSet(dh2, dv2, self.psf_hat, self.spec_hat, denom)


def build_transfer_set(model: SensorModel, height, width) -> TransferSet:
    return StackOperator(model, height, width).transfer_set()


def apply_M(u: HyperCube, model: SensorModel) -> SplitVector:
    return StackOperator(model, u.height, u.width).apply(u.data)


def apply_M_adjoint(sv: SplitVector, model: SensorModel) -> HyperCube:
    bands, _, height, width = sv.grad1.shape
    return HyperCube(StackOperator(model, height, width).adjoint(sv))


# ---------------------------------------------------------------------------
# upsampling

def upsample_nearest(cube: HyperCube, q) -> HyperCube:
    """Nearest-neighbor replication of each pixel into a q x q block."""
    data = np.repeat(np.repeat(cube.data, q, axis=1), q, axis=2)
    return HyperCube(data)
