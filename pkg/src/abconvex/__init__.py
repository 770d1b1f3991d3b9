"""Abstract-convexity primitives over phi_a(x) = a x^2 on the real line.

Conjugates, epsilon-subdifferentials, infimal convolutions and support sets,
all computed by brute force on grids, plus zero-duality-gap certificates for
sums of nonconvex functions.
"""

from .core import (
    PLUS_INF,
    AbconvexError,
    AllInfinite,
    EmptyDomain,
    EmptyIntersection,
    ExtFunction,
    Grid1D,
    Grids,
    NegativeInfinityError,
    OutOfDomainGrid,
    grid_sup,
    sum_functions,
)
from .duality import (
    DualUnboundedError,
    GapReport,
    certify_gap_ladder,
    certify_gap_at_point,
    dual_value,
    primal_value,
)
from .quadspace import QuadAffine, QuadLinear
from .subdiff import SubdiffSet, subdiff_contains, subdiff_enumerate
from .transforms import ConjugateFn, biconjugate, conjugate, inf_convolution, tabulate_conjugate

__version__ = "0.1.0"

__all__ = [
    "PLUS_INF",
    "AbconvexError",
    "AllInfinite",
    "ConjugateFn",
    "DualUnboundedError",
    "EmptyDomain",
    "EmptyIntersection",
    "ExtFunction",
    "GapReport",
    "Grid1D",
    "Grids",
    "NegativeInfinityError",
    "OutOfDomainGrid",
    "QuadAffine",
    "QuadLinear",
    "SubdiffSet",
    "biconjugate",
    "certify_gap_ladder",
    "certify_gap_at_point",
    "conjugate",
    "dual_value",
    "grid_sup",
    "inf_convolution",
    "primal_value",
    "subdiff_contains",
    "subdiff_enumerate",
    "sum_functions",
    "tabulate_conjugate",
]
