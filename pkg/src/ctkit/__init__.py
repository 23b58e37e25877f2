"""Exact computations with finitely generated Z_p[G]-modules for finite p-groups."""

__version__ = "0.1.0"

from .arith import PadicContext, PrecisionError, smith
from .cohomology import CohomologyGroup, ct_definition_scan, is_ct, is_ct_finite, tate
from .errors import BudgetExceeded, InternalContradiction
from .group import PGroup, catalog, from_cayley_table
from .module import FgModule, ranks

__all__ = [
    "BudgetExceeded", "CohomologyGroup", "FgModule", "InternalContradiction", "PGroup",
    "PadicContext", "PrecisionError", "catalog", "ct_definition_scan", "from_cayley_table",
    "is_ct", "is_ct_finite", "ranks", "smith", "tate",
]
