"""Human-in-the-loop campaign state machine.

A campaign starts from a block of seed experiments, then alternates strictly
between proposing a small batch of settings (from a GP surrogate refit on
everything observed so far) and waiting for the operator to report the
measured responses. Single-objective campaigns stop when consecutive
proposal batches agree within tolerance; multi-objective campaigns stop once
any observed trial meets every objective threshold; both stop at the trial
budget.

States are immutable; the three transition operations return new states and
are deterministic given the campaign seed, so a persisted event log replays
to identical suggestions.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from . import acquisition, gp
from .designs import DesignMatrix
from .domain import DesignSpace, DomainError, Objective, Trial
from .sampling import sample_box

__all__ = [
    "CampaignConfig",
    "CampaignState",
    "seed_campaign",
    "record_observation",
    "next_suggestions",
    "add_manual_trial",
    "check_stop",
    "CampaignError",
    "UnknownTrialError",
    "AlreadyObservedError",
    "SequencingError",
    "SurrogateError",
]

TERMINAL_STATUSES = ("converged", "threshold_met", "budget_exhausted")


class CampaignError(RuntimeError):
    pass


class UnknownTrialError(CampaignError):
    pass


class AlreadyObservedError(CampaignError):
    pass


class SequencingError(CampaignError):
    pass


class SurrogateError(CampaignError):
    """Surrogate fitting failed; carries the flagged state."""

    def __init__(self, message, state):
        super().__init__(message)
        self.state = state


@dataclass(frozen=True)
class CampaignConfig:
    space: DesignSpace
    objectives: tuple[Objective, ...]
    mode: str = "single"  # "single" | "multi"
    seed_count: int = 12
    batch_size: int = 2
    max_trials: int = 40
    convergence_tol: float = 0.05  # coded units
    seed: int = 0
    seed_design: DesignMatrix | None = None  # draw seeds from this design

    def __post_init__(self):
        object.__setattr__(self, "objectives", tuple(self.objectives))
        if self.mode not in ("single", "multi"):
            raise DomainError(f"mode must be 'single' or 'multi', got {self.mode!r}")
        if self.mode == "single" and len(self.objectives) != 1:
            raise DomainError("single mode needs exactly one objective")
        if self.mode == "multi":
            if len(self.objectives) < 2:
                raise DomainError("multi mode needs at least two objectives")
            if any(o.threshold is None for o in self.objectives):
                raise DomainError("multi mode needs a threshold on every objective")
        if self.seed_count < 2:
            raise DomainError("seed_count must be >= 2")
        if self.batch_size < 1:
            raise DomainError("batch_size must be >= 1")
        if self.max_trials < self.seed_count:
            raise DomainError("max_trials must cover at least the seed block")
        if self.convergence_tol <= 0:
            raise DomainError("convergence_tol must be > 0")
        if (
            self.seed_design is not None
            and self.seed_design.n_factors != self.space.dim
        ):
            raise DomainError("seed design factor count does not match the space")


@dataclass(frozen=True)
class CampaignState:
    config: CampaignConfig
    trials: tuple[Trial, ...] = ()
    iteration: int = 0
    status: str = "seeding"
    batches: tuple[np.ndarray, ...] = ()  # coded proposal batches, in order
    stop_reasons: tuple[str, ...] = ()
    surrogate_failed: bool = False

    @property
    def pending(self) -> tuple[Trial, ...]:
        return tuple(t for t in self.trials if t.status == "pending")

    @property
    def observed(self) -> tuple[Trial, ...]:
        return tuple(t for t in self.trials if t.status == "observed")

    def trial(self, trial_id: str) -> Trial:
        for t in self.trials:
            if t.id == trial_id:
                return t
        raise UnknownTrialError(f"no trial {trial_id!r} in campaign")

    def observed_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """Coded settings and response matrix of the observed trials."""
        obs = self.observed
        coded = np.array([self.config.space.to_coded(t.settings) for t in obs])
        resp = np.array([t.responses for t in obs])
        return coded, resp


def _next_id(state: CampaignState) -> str:
    return f"t{len(state.trials) + 1:03d}"


def seed_campaign(config: CampaignConfig) -> CampaignState:
    """Create a campaign with its block of pending seed trials.

    Seeds are drawn without replacement from the supplied design, or from a
    space-filling sample of the box when none is given; either way the draw
    is deterministic per campaign seed.
    """
    rng = np.random.default_rng([config.seed, 0])
    if config.seed_design is not None:
        n_rows = config.seed_design.n_runs
        if config.seed_count > n_rows:
            raise DomainError(
                f"seed_count {config.seed_count} exceeds design size {n_rows}"
            )
        picks = rng.choice(n_rows, size=config.seed_count, replace=False)
        settings = [
            config.space.from_coded(config.seed_design.rows[i]) for i in picks
        ]
    else:
        lo, hi = config.space.lower, config.space.upper
        settings = list(sample_box(rng, config.seed_count, lo, hi))

    state = CampaignState(config=config, status="seeding")
    trials = tuple(
        Trial(id=f"t{i + 1:03d}", settings=tuple(x), provenance="seed")
        for i, x in enumerate(settings)
    )
    return replace(state, trials=trials)


def check_stop(state: CampaignState) -> str | None:
    """The stop status the campaign has earned, or None.

    When several criteria fire together the stronger one (converged /
    threshold_met) is reported; all reasons land in ``stop_reasons``.
    """
    reasons = _stop_reasons(state)
    for status in ("converged", "threshold_met", "budget_exhausted"):
        if status in reasons:
            return status
    return None


def _stop_reasons(state: CampaignState) -> tuple[str, ...]:
    cfg = state.config
    reasons = []
    if cfg.mode == "single" and len(state.batches) >= 2:
        a, b = state.batches[-2], state.batches[-1]
        n = min(a.shape[0], b.shape[0])
        dist = max(
            float(np.linalg.norm(a[j] - b[j])) for j in range(n)
        )
        if dist <= cfg.convergence_tol:
            reasons.append("converged")
    if cfg.mode == "multi":
        thresholds = np.array([o.threshold for o in cfg.objectives], dtype=float)
        for t in state.observed:
            if np.all(np.asarray(t.responses) <= thresholds):
                reasons.append("threshold_met")
                break
    if len(state.trials) >= cfg.max_trials:
        reasons.append("budget_exhausted")
    return tuple(reasons)


def record_observation(
    state: CampaignState, trial_id: str, responses: Sequence[float]
) -> CampaignState:
    """Attach measured responses to a pending trial and advance the loop."""
    trial = state.trial(trial_id)
    if trial.status == "observed":
        raise AlreadyObservedError(f"trial {trial_id} already has responses recorded")
    vals = np.asarray(responses, dtype=float)
    if vals.shape[0] != len(state.config.objectives):
        raise DomainError(
            f"{vals.shape[0]} responses for {len(state.config.objectives)} objectives"
        )
    if not np.all(np.isfinite(vals)):
        raise DomainError(f"responses must be finite, got {responses}")

    trials = tuple(
        t.observe(vals) if t.id == trial_id else t for t in state.trials
    )
    new = replace(state, trials=trials)
    if new.pending:
        return new
    stop = check_stop(new)
    if stop is not None:
        return replace(new, status=stop, stop_reasons=_stop_reasons(new))
    return replace(new, status="proposing")


def add_manual_trial(state: CampaignState, settings: Sequence[float]) -> CampaignState:
    """Append an operator-chosen pending trial (allowed even when the
    surrogate is unavailable)."""
    violations = state.config.space.validate_point(settings)
    if violations:
        raise DomainError("manual settings outside the box: " + "; ".join(violations))
    trial = Trial(id=_next_id(state), settings=tuple(settings), provenance="manual")
    return replace(state, trials=(*state.trials, trial))


def _propose_single(state: CampaignState, rng: np.random.Generator, q: int) -> np.ndarray:
    """One GP on the objective, believer batch of q."""
    coded, resp = state.observed_arrays()
    y = resp[:, 0]
    model = gp.fit_hyperparams(coded, y, seed=int(rng.integers(2**31)))
    lo, hi = state.config.space.coded_bounds
    ctx = acquisition.AcquisitionContext(
        surrogate=model,
        incumbent=float(y.min()),
        lower=lo,
        upper=hi,
        seed=int(rng.integers(2**31)),
    )
    return acquisition.propose_batch(ctx, q)


def _propose_multi(state: CampaignState, rng: np.random.Generator, q: int) -> np.ndarray:
    """One GP per objective, then per batch point a fresh scalarization.

    Each batch point draws its own stratified-uniform Chebyshev weights and
    maximises EI of the scalarized posterior; the incumbent is the best
    observed value under that same scalarization.
    """
    cfg = state.config
    coded, resp = state.observed_arrays()
    lo, hi = cfg.space.coded_bounds
    models = [
        gp.fit_hyperparams(coded, resp[:, k], seed=int(rng.integers(2**31)))
        for k in range(resp.shape[1])
    ]
    n_suggested = sum(1 for t in state.trials if t.provenance == "suggested")
    points: list[np.ndarray] = []
    for j in range(q):
        weights = acquisition.parego_weights(
            cfg.seed, n_suggested + j, resp.shape[1], rng
        )
        scalarized = acquisition.scalarize_parego(resp, weights)
        ctx = acquisition.AcquisitionContext(
            surrogate=acquisition.ChebyshevScalarization(models, resp, weights),
            incumbent=float(scalarized.min()),
            lower=lo,
            upper=hi,
            seed=int(rng.integers(2**31)),
        )
        x = acquisition.propose(ctx)
        points.append(acquisition.ensure_spacing(x, points, lo, hi))
    return np.array(points)


def next_suggestions(
    state: CampaignState, count: int | None = None
) -> tuple[CampaignState, tuple[Trial, ...]]:
    """Propose the next batch of pending trials from the refit surrogate.

    Single mode fits one GP on the objective and proposes a believer batch.
    Multi mode draws fresh scalarization weights for every batch point and
    fits a GP on each scalarization. Deterministic per (campaign seed,
    iteration).
    """
    if state.status != "proposing":
        pending_ids = [t.id for t in state.pending]
        raise SequencingError(
            f"cannot suggest while status is {state.status!r}"
            + (f"; pending trials: {pending_ids}" if pending_ids else "")
        )
    q = count if count is not None else state.config.batch_size
    if q < 1:
        raise DomainError("suggestion count must be >= 1")

    rng = np.random.default_rng([state.config.seed, state.iteration + 1])
    try:
        if state.config.mode == "single":
            batch = _propose_single(state, rng, q)
        else:
            batch = _propose_multi(state, rng, q)
    except (gp.GpError, np.linalg.LinAlgError) as exc:
        flagged = replace(state, surrogate_failed=True)
        raise SurrogateError(f"surrogate fit failed: {exc}", flagged) from exc

    trials = list(state.trials)
    new_trials = []
    for row in batch:
        settings = tuple(state.config.space.from_coded(row))
        t = Trial(id=f"t{len(trials) + 1:03d}", settings=settings, provenance="suggested")
        trials.append(t)
        new_trials.append(t)
    new = replace(
        state,
        trials=tuple(trials),
        iteration=state.iteration + 1,
        status="awaiting_observations",
        batches=(*state.batches, batch),
    )
    return new, tuple(new_trials)
