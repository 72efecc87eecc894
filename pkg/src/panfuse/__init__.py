"""Constrained variational hyperspectral pan-sharpening.

Fuses a low-resolution hyperspectral cube with a high-resolution
panchromatic image by minimizing a level-line discrepancy plus total
variation subject to noise-aware fit-to-data constraints, solved with an
ADMM scheme whose inner linear systems are inverted exactly in the
Fourier domain.
"""

from .cube import HyperCube, PanImage, VectorField, axpy, inner
from .operators import SensorModel, SplitVector, StackOperator, TransferSet
from .solver import SolverConfig, SplitState, run
from .metrics import QualityReport

__all__ = [
    "HyperCube",
    "PanImage",
    "VectorField",
    "axpy",
    "inner",
    "SensorModel",
    "SplitVector",
    "StackOperator",
    "TransferSet",
    "SolverConfig",
    "SplitState",
    "run",
    "QualityReport",
]

__version__ = "0.1.0"
