"""Kernel-type function estimators (density, Nadaraya-Watson regression,
conditional ECDF) with a uniform-in-bandwidth Monte Carlo verification
harness."""

from .core import backend_name
from .estimators import (
    PairedSample,
    Sample,
    UNDEFINED,
    WeightedProcessSpec,
    cond_ecdf,
    density_estimate,
    is_undefined,
    nw_estimate,
    smoothed_targets,
    truncation_split,
    weighted_process,
)
from .kernels import (
    BandwidthSpec,
    Kernel,
    from_per_axis,
    kernel,
    kernel_constants,
    scaled_evaluate,
    validate_regularity,
)

__all__ = [
    "BandwidthSpec",
    "Kernel",
    "PairedSample",
    "Sample",
    "UNDEFINED",
    "WeightedProcessSpec",
    "backend_name",
    "cond_ecdf",
    "density_estimate",
    "from_per_axis",
    "is_undefined",
    "kernel",
    "kernel_constants",
    "nw_estimate",
    "scaled_evaluate",
    "smoothed_targets",
    "truncation_split",
    "validate_regularity",
    "weighted_process",
]

__version__ = "0.1.0"
