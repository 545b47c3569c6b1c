"""Weighted arithmetic and harmonic means, their prism geometry, and
harmonic-mean midpoint reconstruction."""

__version__ = "0.1.0"

from ._backend import BACKEND
from .errors import (
    HarmonicKitError,
    LengthError,
    NoConvergence,
    NonPositiveArgument,
    NonPositiveWeight,
    UnsupportedDimension,
)
from .means import (
    CLIP,
    MeanGapReport,
    SignPolicy,
    WeightVector,
    gap_closed_form,
    guarded_harmonic,
    mean_gap,
    min_bound,
    scaled_uniform_harmonic,
    uniform_weights,
    validate_sample,
    validate_weights,
    weighted_arithmetic,
    weighted_harmonic,
)
from .geometry import (
    PrismScene,
    build_scene,
    corollary_scene,
    numeric_intersection,
    parabola_pair_2d,
    prism_heights,
    sample_surfaces,
    surface_residuals,
)
from .reconstruction import (
    GridFunction,
    Stencil,
    baseline_midpoint,
    convergence_order,
    decompose,
    overshoot_metric,
    pph_midpoint,
    reconstruct,
)
