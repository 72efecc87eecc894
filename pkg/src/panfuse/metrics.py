"""Quality measures for pan-sharpened cubes.

Referenced metrics (RMSE, ERGAS, SAM, FCC) compare the estimate against
a ground-truth cube or the panchromatic image; the no-reference QNR
distortion indices (d_s, d_lambda) only need the measured low-resolution
data. The universal image quality index Q is computed globally, not over
sliding windows.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .cube import HyperCube, PanImage
from .errors import DataError


def _check_same_shape(a, b):
    if a.shape != b.shape:
        raise DataError(f"shape mismatch: {a.shape} vs {b.shape}")


def rmse(est: HyperCube, ref: HyperCube) -> float:
    """Root mean square error over all samples."""
    _check_same_shape(est.data, ref.data)
    return float(np.sqrt(np.mean((est.data - ref.data) ** 2)))


def ergas(est: HyperCube, ref: HyperCube, q) -> float:
    """Relative dimensionless global error.

    100/q * sqrt(mean over bands of (band RMSE / band mean)^2).
    """
    _check_same_shape(est.data, ref.data)
    mu = ref.data.mean(axis=(1, 2))
    if np.any(mu == 0):
        raise DataError("ergas undefined: reference band with zero mean")
    band_rmse = np.sqrt(np.mean((est.data - ref.data) ** 2, axis=(1, 2)))
    return float(100.0 / q * np.sqrt(np.mean((band_rmse / mu) ** 2)))


def sam(est: HyperCube, ref: HyperCube) -> float:
    """Mean spectral angle between per-pixel spectra, in degrees."""
    _check_same_shape(est.data, ref.data)
    a = est.data.reshape(est.bands, -1)
    b = ref.data.reshape(ref.bands, -1)
    na = np.linalg.norm(a, axis=0)
    nb = np.linalg.norm(b, axis=0)
    if np.any(na == 0) or np.any(nb == 0):
        raise DataError("sam undefined: zero spectral vector")
    # chord formula: well conditioned near zero angle, unlike arccos
    chord = np.linalg.norm(a / na - b / nb, axis=0)
    angles = 2.0 * np.arcsin(np.clip(0.5 * chord, 0.0, 1.0))
    return float(np.degrees(np.mean(angles)))


def _laplacian_periodic(plane):
    """3x3 high-pass filter (center 8, neighbors -1) with periodic wrap."""
    out = 8.0 * plane
    for dy in (-1, 0, 1):
        for dx in (-1, 0, 1):
            if dy == 0 and dx == 0:
                continue
            out -= np.roll(np.roll(plane, dy, axis=0), dx, axis=1)
    return out


def _correlation(a, b):
    a = a - a.mean()
    b = b - b.mean()
    denom = np.linalg.norm(a) * np.linalg.norm(b)
    if denom == 0:
        raise DataError("correlation undefined: zero variance after filtering")
    return float(np.sum(a * b) / denom)


def fcc(est: HyperCube, p: PanImage) -> float:
    """Filtered correlation coefficient.

    Mean over bands of the correlation between the high-pass filtered
    band and the high-pass filtered panchromatic image.
    """
    if (est.height, est.width) != (p.height, p.width):
        raise DataError(f"shape mismatch: {(est.height, est.width)} vs {(p.height, p.width)}")
    hp = _laplacian_periodic(p.data)
    return float(np.mean([_correlation(_laplacian_periodic(b), hp) for b in est.data]))


def q_index(a, b):
    """Universal image quality index, computed globally."""
    a = np.asarray(a, dtype=np.float64).ravel()
    b = np.asarray(b, dtype=np.float64).ravel()
    if a.shape != b.shape:
        raise DataError(f"shape mismatch: {a.shape} vs {b.shape}")
    ma, mb = a.mean(), b.mean()
    va, vb = a.var(), b.var()
    if va == 0 or vb == 0:
        raise DataError("q index undefined: zero-variance input")
    cov = np.mean((a - ma) * (b - mb))
    return float(4.0 * cov * ma * mb / ((va + vb) * (ma**2 + mb**2)))


def d_lambda(est: HyperCube, x_lr: HyperCube) -> float:
    """QNR spectral distortion: mean |Q(est_l, est_r) - Q(x_l, x_r)| over band pairs."""
    if est.bands != x_lr.bands:
        raise DataError(f"band count mismatch: {est.bands} vs {x_lr.bands}")
    if est.bands < 2:
        raise DataError("d_lambda needs at least 2 bands")
    total = 0.0
    count = 0
    for l in range(est.bands):
        for r in range(est.bands):
            if l == r:
                continue
            total += abs(q_index(est.data[l], est.data[r]) - q_index(x_lr.data[l], x_lr.data[r]))
            count += 1
    return min(total / count, 1.0)


def d_s(est: HyperCube, p: PanImage, p_lr: PanImage, x_lr: HyperCube) -> float:
    """QNR spatial distortion between the two resolution scales.

    d_s = mean over bands of |Q(est_l, p) - Q(x_l, p_lr)| where x_lr is
    the measured low-resolution cube and p_lr the panchromatic image
    degraded to the low-resolution grid by the sensor model.
    """
    if est.bands != x_lr.bands:
        raise DataError(f"band count mismatch: {est.bands} vs {x_lr.bands}")
    total = 0.0
    for l in range(est.bands):
        total += abs(q_index(est.data[l], p.data) - q_index(x_lr.data[l], p_lr.data))
    return min(total / est.bands, 1.0)


@dataclass
class QualityReport:
    """The six evaluation measures; None marks a metric that was not computable."""

    rmse: float | None = None
    ergas: float | None = None
    sam: float | None = None
    fcc: float | None = None
    d_s: float | None = None
    d_lambda: float | None = None

    def to_dict(self):
        return {
            "rmse": self.rmse,
            "rmse_x100": None if self.rmse is None else 100.0 * self.rmse,
            "ergas": self.ergas,
            "sam_degrees": self.sam,
            "fcc": self.fcc,
            "fcc_x100": None if self.fcc is None else 100.0 * self.fcc,
            "d_s": self.d_s,
            "d_s_x100": None if self.d_s is None else 100.0 * self.d_s,
            "d_lambda": self.d_lambda,
            "d_lambda_x100": None if self.d_lambda is None else 100.0 * self.d_lambda,
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2)

    def to_text(self):
        lines = []
        for key, value in self.to_dict().items():
            lines.append(f"{key}: {'n/a' if value is None else format(value, '.6g')}")
        return "\n".join(lines) + "\n"
