"""Core value types: factors, design spaces, objectives, trials.

Everything here is an immutable value object. Coded units map each factor's
cube levels to -1/+1; the searchable box extends to +/-alpha in coded units.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

__all__ = [
    "Factor",
    "DesignSpace",
    "Objective",
    "Trial",
    "DomainError",
]


class DomainError(ValueError):
    """Invalid domain value or dimension mismatch."""


@dataclass(frozen=True)
class Factor:
    """A controllable process variable with its two-level cube settings.

    ``cube_low`` and ``cube_high`` are the natural-unit values coded to -1
    and +1; axial extremes follow from the owning space's alpha.
    """

    name: str
    unit: str
    cube_low: float
    cube_high: float

    def __post_init__(self):
        if not self.name:
            raise DomainError("factor name must be non-empty")
        if not self.cube_low < self.cube_high:
            raise DomainError(
                f"factor {self.name!r}: cube_low must be < cube_high "
                f"({self.cube_low} >= {self.cube_high})"
            )

    @property
    def center(self) -> float:
        return 0.5 * (self.cube_low + self.cube_high)

    @property
    def half_range(self) -> float:
        return 0.5 * (self.cube_high - self.cube_low)


@dataclass(frozen=True)
class DesignSpace:
    """An ordered set of factors plus the axial distance alpha (coded units).

    The admissible box in natural units is center +/- alpha*half_range per
    factor.
    """

    factors: tuple[Factor, ...]
    alpha: float = 2.0

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))
        if self.alpha < 1:
            raise DomainError(f"alpha must be >= 1, got {self.alpha}")
        names = [f.name for f in self.factors]
        if len(set(names)) != len(names):
            raise DomainError(f"duplicate factor names: {names}")
        if not self.factors:
            raise DomainError("design space needs at least one factor")

    @property
    def dim(self) -> int:
        return len(self.factors)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(f.name for f in self.factors)

    @property
    def centers(self) -> np.ndarray:
        return np.array([f.center for f in self.factors])

    @property
    def half_ranges(self) -> np.ndarray:
        return np.array([f.half_range for f in self.factors])

    @property
    def lower(self) -> np.ndarray:
        """Natural-unit lower box bounds (center - alpha*half_range)."""
        return self.centers - self.alpha * self.half_ranges

    @property
    def upper(self) -> np.ndarray:
        """Natural-unit upper box bounds (center + alpha*half_range)."""
        return self.centers + self.alpha * self.half_ranges

    @property
    def coded_bounds(self) -> tuple[np.ndarray, np.ndarray]:
        a = float(self.alpha)
        return -a * np.ones(self.dim), a * np.ones(self.dim)

    def _check_dim(self, point: Sequence[float]) -> np.ndarray:
        arr = np.asarray(point, dtype=float)
        if arr.shape[-1] != self.dim:
            raise DomainError(
                f"point has {arr.shape[-1]} coordinates, space has {self.dim} factors"
            )
        return arr

    def to_coded(self, point: Sequence[float]) -> np.ndarray:
        """Natural units -> coded units, (x - center) / half_range per axis."""
        arr = self._check_dim(point)
        return (arr - self.centers) / self.half_ranges

    def from_coded(self, coded: Sequence[float]) -> np.ndarray:
        """Coded units -> natural units; exact inverse of :meth:`to_coded`."""
        arr = self._check_dim(coded)
        return arr * self.half_ranges + self.centers

    def validate_point(self, point: Sequence[float]) -> list[str]:
        """Return a list of bound violations (empty when the point is in-box)."""
        arr = self._check_dim(point)
        lo, hi = self.lower, self.upper
        violations = []
        for i, f in enumerate(self.factors):
            if not np.isfinite(arr[i]):
                violations.append(f"{f.name}: non-finite value {arr[i]}")
            elif arr[i] < lo[i] - 1e-9 or arr[i] > hi[i] + 1e-9:
                violations.append(
                    f"{f.name}: {arr[i]} outside [{lo[i]}, {hi[i]}] {f.unit}"
                )
        return violations


@dataclass(frozen=True)
class Objective:
    """A response to be minimised, with optional stopping and desirability anchors.

    ``threshold`` is the campaign stopping bound; ``d_min``/``d_max`` are the
    fully-desirable / unacceptable anchor values of the linear desirability
    ramp; ``weight`` its exponent. Only minimisation is supported: express a
    maximisation by negating the response upstream.
    """

    name: str
    unit: str = ""
    goal: str = "minimize"
    threshold: float | None = None
    weight: float = 1.0
    d_min: float | None = None
    d_max: float | None = None

    def __post_init__(self):
        if not self.name:
            raise DomainError("objective name must be non-empty")
        if self.goal != "minimize":
            raise DomainError(f"only 'minimize' objectives are supported, got {self.goal!r}")
        if not self.weight > 0:
            raise DomainError(f"objective weight must be > 0, got {self.weight}")
        if self.d_min is not None and self.d_max is not None and not self.d_min < self.d_max:
            raise DomainError(
                f"objective {self.name!r}: d_min must be < d_max ({self.d_min} >= {self.d_max})"
            )


PROVENANCES = ("seed", "suggested", "manual")
STATUSES = ("pending", "observed")


@dataclass(frozen=True)
class Trial:
    """One experiment: the proposed settings and, once run, its responses."""

    id: str
    settings: tuple[float, ...]
    provenance: str
    responses: tuple[float, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "settings", tuple(float(v) for v in self.settings))
        if self.responses is not None:
            object.__setattr__(self, "responses", tuple(float(v) for v in self.responses))
        if self.provenance not in PROVENANCES:
            raise DomainError(f"unknown provenance {self.provenance!r}")

    @property
    def status(self) -> str:
        return "observed" if self.responses is not None else "pending"

    def observe(self, responses: Sequence[float]) -> "Trial":
        """Return the observed copy of this trial."""
        vals = tuple(float(v) for v in responses)
        if not all(np.isfinite(v) for v in vals):
            raise DomainError(f"trial {self.id}: responses must be finite, got {vals}")
        return replace(self, responses=vals)
