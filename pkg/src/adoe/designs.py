"""Two-level fractional factorial and central composite design generators.

Designs are produced in coded units; decode through a DesignSpace for
machine settings. Run order randomization is seeded and reproducible.
"""

from __future__ import annotations

import io
import itertools
from dataclasses import dataclass, replace

import numpy as np

from .domain import DesignSpace, DomainError

__all__ = ["DesignMatrix", "fractional_factorial", "ccd", "randomize_order", "design_to_csv"]

# Minimum-aberration generators for the 2^(8-4) resolution IV screen.
DEFAULT_GENERATORS_8_4 = ("ABC", "ABD", "ACD", "BCD")


@dataclass(frozen=True)
class DesignMatrix:
    """Coded design: one row per run."""

    rows: np.ndarray
    kind: str  # "fractional_factorial" | "ccd"
    center_runs: int = 0
    alpha: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "rows", np.asarray(self.rows, dtype=float))

    @property
    def n_runs(self) -> int:
        return self.rows.shape[0]

    @property
    def n_factors(self) -> int:
        return self.rows.shape[1]


def _full_factorial(k: int) -> np.ndarray:
    """2^k design in standard order, columns A, B, C, ... (A slowest)."""
    levels = list(itertools.product((-1.0, 1.0), repeat=k))
    return np.array(levels)


def fractional_factorial(k: int, p: int, generators=None) -> DesignMatrix:
    """2^(k-p) two-level design with the added columns defined by generator words.

    Each generator word ("ABC") names base columns whose row-wise product
    forms one added column; base columns are lettered A.. for the first
    k-p factors. Defaults to the standard resolution-IV choice for (8, 4).
    """
    base = k - p
    if base < 1:
        raise DomainError(f"k - p must be >= 1, got k={k}, p={p}")
    if generators is None:
        if p == 0:
            generators = ()
        elif (k, p) == (8, 4):
            generators = DEFAULT_GENERATORS_8_4
        else:
            raise DomainError(f"no default generators for 2^({k}-{p}); supply them")
    if len(generators) != p:
        raise DomainError(f"need {p} generator words, got {len(generators)}")

    rows = _full_factorial(base)
    cols = [rows[:, i] for i in range(base)]
    for word in generators:
        word = word.split("=")[-1].strip().upper()  # accept "E=ABC" or "ABC"
        col = np.ones(rows.shape[0])
        for letter in word:
            idx = ord(letter) - ord("A")
            if idx < 0 or idx >= base:
                raise DomainError(
                    f"generator {word!r} references column {letter!r}, "
                    f"but only {base} base columns exist"
                )
            col = col * cols[idx]
        cols.append(col)
    return DesignMatrix(rows=np.column_stack(cols), kind="fractional_factorial")


def ccd(f: int, center_runs: int, alpha: float) -> DesignMatrix:
    """Circumscribed central composite design in canonical order.

    2^f factorial cube, then 2f axial points at -alpha/+alpha per factor,
    then the replicated center runs.
    """
    if f < 1:
        raise DomainError(f"factor count must be >= 1, got {f}")
    if center_runs < 0:
        raise DomainError(f"center_runs must be >= 0, got {center_runs}")
    cube = _full_factorial(f)
    axial = np.zeros((2 * f, f))
    for i in range(f):
        axial[2 * i, i] = -alpha
        axial[2 * i + 1, i] = alpha
    centers = np.zeros((center_runs, f))
    rows = np.vstack([cube, axial, centers])
    return DesignMatrix(rows=rows, kind="ccd", center_runs=center_runs, alpha=alpha)


def randomize_order(design: DesignMatrix, seed: int) -> DesignMatrix:
    """Seeded permutation of the run order."""
    rng = np.random.default_rng(seed)
    perm = rng.permutation(design.n_runs)
    return replace(design, rows=design.rows[perm])


def design_to_csv(design: DesignMatrix, space: DesignSpace, path=None) -> str:
    """Render the design in natural units as CSV (factor columns + run_order).

    Writes to ``path`` when given; always returns the CSV text.
    """
    if design.n_factors != space.dim:
        raise DomainError(
            f"design has {design.n_factors} factors, space has {space.dim}"
        )
    buf = io.StringIO()
    buf.write(",".join([*space.names, "run_order"]) + "\n")
    for order, row in enumerate(design.rows, start=1):
        natural = space.from_coded(row)
        buf.write(",".join(f"{v:g}" for v in natural) + f",{order}\n")
    text = buf.getvalue()
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text)
    return text
