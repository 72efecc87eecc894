"""Forward sensing simulator: fabricates (x, p) pairs from a reference cube.

Mirrors the synthetic protocol: blur the reference with the spatial PSF,
decimate, add seeded Gaussian noise for the hyperspectral measurements;
mix the bands with the spectral weights and add noise for the
panchromatic image.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cube import HyperCube, PanImage
from .errors import DataError
from .operators import SensorModel, pan_mix, psf_transfer, convolve_with_transfer, spatial_downsample


@dataclass
class SimScenario:
    reference: HyperCube
    model: SensorModel
    seed: int = 0
    offset: tuple = (0, 0)

    def __post_init__(self):
        q = self.model.q
        if self.reference.height % q or self.reference.width % q:
            raise DataError(f"reference dimensions {self.reference.height}x{self.reference.width} not divisible by q={q}")
        if self.reference.bands != self.model.bands:
            raise DataError(f"reference has {self.reference.bands} bands, model expects {self.model.bands}")


def degrade_hx(scenario: SimScenario) -> HyperCube:
    """Blur + decimate each band of the reference, plus per-band noise.

    A fresh generator seeded from (seed, 0) makes the output
    bit-identical across calls with the same scenario.
    """
    ref = scenario.reference
    model = scenario.model
    transfer = psf_transfer(model.psf, ref.height, ref.width)
    blurred = convolve_with_transfer(ref.data, transfer)
    low = np.stack([spatial_downsample(b, model.q, scenario.offset) for b in blurred])
    rng = np.random.default_rng([scenario.seed, 0])
    noise = rng.standard_normal(low.shape) * model.sigma_x[:, None, None]
    return HyperCube(low + noise)


def degrade_pan(scenario: SimScenario) -> PanImage:
    """Spectral mix of the reference plus panchromatic noise."""
    model = scenario.model
    if model.g.sum() <= 0:
        raise DataError("spectral weights must have positive sum")
    p = pan_mix(scenario.reference, model.g)
    rng = np.random.default_rng([scenario.seed, 1])
    return PanImage(p.data + rng.standard_normal(p.data.shape) * model.sigma_p)


def gaussian_psf(q, sigma_rel=None):
    """Isotropic Gaussian kernel, truncated at 4 sigma, unit sum.

    sigma_rel is the standard deviation in high-resolution pixels;
    defaults to 0.5 * q.
    """
    sigma = 0.5 * q if sigma_rel is None else float(sigma_rel)
    if sigma <= 0:
        raise DataError("psf sigma must be positive")
    radius = max(1, int(np.ceil(4.0 * sigma)))
    yy, xx = np.mgrid[-radius : radius + 1, -radius : radius + 1]
    kernel = np.exp(-(xx**2 + yy**2) / (2.0 * sigma**2))
    return kernel / kernel.sum()


def averaging_psf(q):
    """q x q box filter (the average-filter protocol)."""
    return np.full((q, q), 1.0 / (q * q))


def synthetic_scene(seed, bands=3, height=32, width=32, n_shapes=6):
    """Piecewise-constant cube whose bands share the same level lines.

    Random axis-aligned rectangles are stamped onto a label map; each
    label gets a random positive spectrum. Useful for solver tests.
    """
    rng = np.random.default_rng(seed)
    labels = np.zeros((height, width), dtype=int)
    for s in range(1, n_shapes + 1):
        y0, y1 = np.sort(rng.integers(0, height, 2))
        x0, x1 = np.sort(rng.integers(0, width, 2))
        labels[y0 : y1 + 1, x0 : x1 + 1] = s
    spectra = rng.uniform(0.2, 1.0, size=(n_shapes + 1, bands))
    data = spectra[labels].transpose(2, 0, 1)
    return HyperCube(np.ascontiguousarray(data))
