"""maasskit: Hecke systems of modular functions, weight-2 polar harmonic
Maass forms, generalized Kloosterman sums, Ramanujan-type coefficient
expansions for meromorphic modular forms, and higher Green's functions.

Every headline quantity is computable by at least two independent routes so
the underlying identities are executable as tests; numeric results carry
certificates (tail bounds, spreads, extrapolation residuals).
"""
from .config import (
    DEFAULT_CONFIG,
    DomainError,
    PrecisionConfig,
    PrecisionError,
    StabilizationError,
    UpperHalfPoint,
    as_point,
)

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_CONFIG",
    "DomainError",
    "PrecisionConfig",
    "PrecisionError",
    "StabilizationError",
    "UpperHalfPoint",
    "as_point",
    "__version__",
]
