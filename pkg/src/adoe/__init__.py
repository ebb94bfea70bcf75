"""Adaptive design-of-experiments toolkit for iterative process tuning."""

__version__ = "0.1.0"

from .domain import DesignSpace, DomainError, Factor, Objective, Trial

__all__ = ["DesignSpace", "DomainError", "Factor", "Objective", "Trial", "__version__"]
