"""Figure regeneration for the paraest harness CSV schema."""

from .csvio import SchemaError, read_table
from .render import KINDS, FigureSpec, fit_slope, render

__all__ = ["FigureSpec", "KINDS", "SchemaError", "fit_slope", "read_table", "render"]
__version__ = "0.1.0"
