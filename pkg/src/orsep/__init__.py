"""Executable conjugacy separability for one-relator groups with torsion."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    BudgetExceeded,
    NotInSubgroup,
    OrsepError,
    TorsionRequired,
)
from .words import Presentation, Word, parse_presentation, parse_word  # noqa: E402

__all__ = [
    "__version__",
    "BudgetExceeded",
    "NotInSubgroup",
    "OrsepError",
    "TorsionRequired",
    "Presentation",
    "Word",
    "parse_presentation",
    "parse_word",
]
