"""Command-line reproduction of the tables and figure data."""
from .config import RunConfig, Sweep
from .report import ValidationReport

__all__ = ["RunConfig", "Sweep", "ValidationReport"]
