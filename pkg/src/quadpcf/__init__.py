"""quadpcf: search, sieve, and certification of quadratic PCF maps over Q."""

from quadpcf.exact_arith import (
    INFINITY,
    ExtendedRational,
    NegativeDiscriminantError,
    QuadFieldElement,
    Rat,
    enumerate_rationals,
    height,
    quad_roots,
)
from quadpcf.projmap import (
    BAD_REDUCTION,
    DegenerateMapError,
    MobiusTransform,
    MultiplierTriple,
    NormalizedQuadMap,
    UnsupportedFieldError,
)

__version__ = "0.1.0"

__all__ = [
    "INFINITY",
    "ExtendedRational",
    "NegativeDiscriminantError",
    "QuadFieldElement",
    "Rat",
    "enumerate_rationals",
    "height",
    "quad_roots",
    "BAD_REDUCTION",
    "DegenerateMapError",
    "MobiusTransform",
    "MultiplierTriple",
    "NormalizedQuadMap",
    "UnsupportedFieldError",
    "__version__",
]
