"""Simulated injection-moulding process for closed-loop tests and demos.

The ground truth is frozen from the bundled CCD campaign of the clip
moulding study: the part-temperature differential follows the full
second-order surface fitted to those 31 runs, and the cycle time is exactly
7.3 s of machine overhead plus the cooling and holding times. Observation
noise is seeded Gaussian per response.
"""

from __future__ import annotations

import importlib.resources
import itertools
from dataclasses import dataclass

import numpy as np

from .domain import DesignSpace, DomainError, Factor, Objective
from .rsm import ModelSpec, QuadraticModel, fit, predict

__all__ = [
    "PlantOracle",
    "reference_space",
    "reference_objectives",
    "load_reference_runs",
    "build_oracle",
    "evaluate",
    "grid_minimum",
    "CYCLE_OVERHEAD_S",
]

DATA_FILE = "moulding_ccd_v1.csv"
CYCLE_OVERHEAD_S = 7.3
_COOLING, _HOLDING = 1, 2  # factor positions in the reference space


def reference_space() -> DesignSpace:
    """The four tunable machine settings of the reference moulding process."""
    return DesignSpace(
        factors=(
            Factor("mould_temp_C", "degC", 65.0, 85.0),
            Factor("cooling_s", "s", 20.0, 30.0),
            Factor("holding_s", "s", 3.0, 6.0),
            Factor("barrel_temp_C", "degC", 205.0, 225.0),
        ),
        alpha=2.0,
    )


def reference_objectives(
    dt_threshold: float = 7.0, cycle_threshold: float = 33.0
) -> tuple[Objective, Objective]:
    """Temperature differential and cycle time, both minimised."""
    return (
        Objective("dt_C", "degC", threshold=dt_threshold),
        Objective("cycle_s", "s", threshold=cycle_threshold),
    )


def load_reference_runs() -> dict[str, np.ndarray]:
    """The bundled 31-run CCD campaign: settings plus both responses."""
    ref = importlib.resources.files("adoe.data").joinpath(DATA_FILE)
    with ref.open("rb") as fh:
        raw = np.genfromtxt(fh, delimiter=",", names=True)
    settings = np.column_stack(
        [raw["mould_temp_C"], raw["cooling_s"], raw["holding_s"], raw["barrel_temp_C"]]
    )
    return {"settings": settings, "dt_C": np.asarray(raw["dt_C"]),
            "cycle_s": np.asarray(raw["cycle_s"])}


@dataclass(frozen=True)
class PlantOracle:
    """Frozen ground truth plus per-response observation noise."""

    space: DesignSpace
    dt_model: QuadraticModel  # coded-unit full quadratic
    cycle_intercept: float
    noise_sd: tuple[float, float]  # (dt, cycle)

    def predict_dt(self, settings) -> float:
        """Noise-free temperature differential (no box check: extrapolates)."""
        return float(predict(self.dt_model, self.space.to_coded(settings)))

    def predict_cycle(self, settings) -> float:
        s = np.asarray(settings, dtype=float)
        return float(self.cycle_intercept + s[_COOLING] + s[_HOLDING])


def build_oracle(
    runs: dict[str, np.ndarray] | None = None,
    dt_noise_sd: float = 0.1,
    cycle_noise_sd: float = 0.0,
) -> PlantOracle:
    """Fit and freeze the ground truth from a CCD campaign table.

    The temperature-differential surface is the full second-order model in
    coded units; the cycle-time coefficients are fixed analytically (the data
    satisfy cycle = overhead + cooling + holding exactly) and verified.
    """
    runs = runs if runs is not None else load_reference_runs()
    space = reference_space()
    settings = np.asarray(runs["settings"], dtype=float)
    dt = np.asarray(runs["dt_C"], dtype=float)
    cycle = np.asarray(runs["cycle_s"], dtype=float)
    if settings.ndim != 2 or settings.shape[1] != space.dim:
        raise DomainError("campaign table must have one column per factor")
    if not (settings.shape[0] == dt.shape[0] == cycle.shape[0]):
        raise DomainError("campaign table rows are inconsistent")

    resid = cycle - (CYCLE_OVERHEAD_S + settings[:, _COOLING] + settings[:, _HOLDING])
    if np.abs(resid).max() > 0.05:
        raise DomainError(
            f"cycle times deviate from the analytic model by {np.abs(resid).max():.3f} s"
        )

    coded = np.array([space.to_coded(x) for x in settings])
    dt_model = fit(coded, dt, ModelSpec.full_quadratic(space.dim))
    sse = float(((dt - np.asarray(predict(dt_model, coded))) ** 2).sum())
    sst = float(((dt - dt.mean()) ** 2).sum())
    if 1.0 - sse / sst < 0.90:
        raise DomainError("temperature model fits the campaign data too poorly")

    return PlantOracle(
        space=space,
        dt_model=dt_model,
        cycle_intercept=CYCLE_OVERHEAD_S,
        noise_sd=(float(dt_noise_sd), float(cycle_noise_sd)),
    )


def evaluate(oracle: PlantOracle, settings, seed: int | None = None) -> dict[str, float]:
    """Run one simulated experiment at in-box settings.

    Returns the observed temperature differential and cycle time; noise is
    deterministic per seed.
    """
    violations = oracle.space.validate_point(settings)
    if violations:
        raise DomainError("settings outside the machine box: " + "; ".join(violations))
    dt = oracle.predict_dt(settings)
    cycle = oracle.predict_cycle(settings)
    if seed is not None and any(sd > 0 for sd in oracle.noise_sd):
        rng = np.random.default_rng(seed)
        noise = rng.normal(0.0, 1.0, size=2)
        dt += oracle.noise_sd[0] * noise[0]
        cycle += oracle.noise_sd[1] * noise[1]
    return {"dt_C": dt, "cycle_s": cycle}


def grid_minimum(oracle: PlantOracle, points_per_dim: int = 21) -> tuple[np.ndarray, float]:
    """Dense-grid argmin of the noise-free temperature differential."""
    axes = [
        np.linspace(lo, hi, points_per_dim)
        for lo, hi in zip(oracle.space.lower, oracle.space.upper)
    ]
    best_x, best_v = None, np.inf
    # evaluate slabs to keep memory flat
    for x0 in axes[0]:
        rest = np.array(list(itertools.product(*axes[1:])))
        pts = np.column_stack([np.full(rest.shape[0], x0), rest])
        coded = (pts - oracle.space.centers) / oracle.space.half_ranges
        vals = np.asarray(predict(oracle.dt_model, coded))
        i = int(np.argmin(vals))
        if vals[i] < best_v:
            best_v, best_x = float(vals[i]), pts[i]
    return best_x, best_v
