"""Expected Improvement acquisition over a coded box, with batch proposals.

EI here is the minimisation form: improvement is incumbent minus predicted
mean. Batches use believer-style fantasizing: each accepted point is fed back
into a scratch copy of the surrogate at its own posterior mean before the
next point is chosen. Multi-objective campaigns reduce to this single-
objective machinery through randomly weighted augmented-Chebyshev
scalarization of the normalized responses.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import minimize

from . import gp
from .domain import DomainError
from .sampling import latin_hypercube
from .stats import norm_cdf, norm_pdf

__all__ = [
    "AcquisitionContext",
    "ChebyshevScalarization",
    "ei_min",
    "scalarize_parego",
    "propose",
    "propose_batch",
    "uniform_simplex_weights",
    "parego_weights",
    "ensure_spacing",
]

MIN_BATCH_SPACING = 1e-3  # coded units


@dataclass(frozen=True)
class AcquisitionContext:
    """Everything a proposal needs: surrogate, incumbent, box, seeds.

    The surrogate is anything exposing ``posterior_batch(points)`` and
    ``inputs``: a plain GP, or a scalarized bundle of per-objective GPs.
    """

    surrogate: object
    incumbent: float
    lower: np.ndarray  # coded box
    upper: np.ndarray
    restarts: int = 5
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "lower", np.asarray(self.lower, dtype=float))
        object.__setattr__(self, "upper", np.asarray(self.upper, dtype=float))
        if not np.isfinite(self.incumbent):
            raise DomainError("incumbent must be finite")
        if self.restarts < 1:
            raise DomainError("restarts must be >= 1")
        if self.lower.shape != self.upper.shape or np.any(self.lower >= self.upper):
            raise DomainError("invalid acquisition box")


def ei_min(mean, sd, incumbent):
    """Expected improvement below the incumbent for a minimisation problem.

    With z = (f* - mu)/sd: EI = (f* - mu) Phi(z) + sd phi(z); at sd = 0 the
    improvement is deterministic, max(f* - mu, 0).
    """
    mean = np.asarray(mean, dtype=float)
    sd = np.asarray(sd, dtype=float)
    if np.any(sd < 0):
        raise DomainError("sd must be >= 0")
    gap = incumbent - mean
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(sd > 0, gap / np.where(sd > 0, sd, 1.0), 0.0)
    ei = np.where(sd > 0, gap * norm_cdf(z) + sd * norm_pdf(z), np.maximum(gap, 0.0))
    ei = np.maximum(ei, 0.0)
    return float(ei) if ei.ndim == 0 else ei


def uniform_simplex_weights(rng: np.random.Generator, m: int) -> np.ndarray:
    """One uniform draw from the m-simplex."""
    e = rng.exponential(size=m)
    return e / e.sum()


def parego_weights(
    campaign_seed: int, index: int, m: int, rng: np.random.Generator, strata: int = 5
) -> np.ndarray:
    """Scalarization weights for the index-th proposal of a campaign.

    Two-objective campaigns draw stratified-uniform weights: each consecutive
    block of ``strata`` proposals covers all quantile bands of the simplex in
    a seeded random order, so a short campaign cannot get stuck sampling one
    end of the trade-off. Higher objective counts fall back to iid uniform
    simplex draws.
    """
    if m != 2:
        return uniform_simplex_weights(rng, m)
    cycle, position = divmod(int(index), strata)
    perm = np.random.default_rng([campaign_seed, 7919, cycle]).permutation(strata)
    w1 = (perm[position] + rng.uniform()) / strata
    return np.array([w1, 1.0 - w1])


def scalarize_parego(responses, weights, rho: float = 0.05) -> np.ndarray:
    """Augmented Chebyshev scalarization of an (n, m) objective matrix.

    Each objective is first normalized to [0, 1] over its observed range
    (a degenerate range normalizes to 0), then
    s = max_i(w_i * f_i) + rho * sum_i(w_i * f_i).
    """
    F = np.atleast_2d(np.asarray(responses, dtype=float))
    w = np.asarray(weights, dtype=float)
    if w.shape[0] != F.shape[1]:
        raise DomainError(f"{w.shape[0]} weights for {F.shape[1]} objectives")
    if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-9:
        raise DomainError("weights must be nonnegative and sum to 1")
    lo = F.min(axis=0)
    span = F.max(axis=0) - lo
    Fn = np.where(span > 0, (F - lo) / np.where(span > 0, span, 1.0), 0.0)
    wf = Fn * w
    return wf.max(axis=1) + rho * wf.sum(axis=1)


class ChebyshevScalarization:
    """Posterior of the augmented-Chebyshev scalarization of per-objective GPs.

    Mean comes from plugging the objective posterior means into the
    scalarization; the standard deviation propagates the per-objective
    posterior sds through the locally active branch (delta method). Sharing
    smooth per-objective surrogates across weight draws resolves the
    trade-off region far better than refitting one GP on kinked scalarized
    targets.
    """

    def __init__(self, models, responses, weights, rho: float = 0.05):
        if len(models) != np.shape(weights)[0]:
            raise DomainError("one surrogate per objective weight required")
        self.models = tuple(models)
        F = np.atleast_2d(np.asarray(responses, dtype=float))
        self._lo = F.min(axis=0)
        span = F.max(axis=0) - self._lo
        self._wn = np.asarray(weights, dtype=float) / np.where(span > 0, span, 1.0)
        self.rho = float(rho)

    @property
    def inputs(self) -> np.ndarray:
        return self.models[0].inputs

    def posterior_batch(self, points) -> tuple[np.ndarray, np.ndarray]:
        mus, sds = [], []
        for m in self.models:
            mu, var = m.posterior_batch(points)
            mus.append(mu)
            sds.append(np.sqrt(var))
        mus = np.column_stack(mus)
        sds = np.column_stack(sds)
        contrib = (mus - self._lo) * self._wn
        active = np.argmax(contrib, axis=1)
        mean = contrib.max(axis=1) + self.rho * contrib.sum(axis=1)
        gain = self.rho + (np.arange(mus.shape[1])[None, :] == active[:, None])
        var = ((gain * sds * self._wn) ** 2).sum(axis=1)
        return mean, var


def _ei_at(ctx: AcquisitionContext, model, points: np.ndarray) -> np.ndarray:
    mean, var = model.posterior_batch(points)
    return ei_min(mean, np.sqrt(var), ctx.incumbent)


def _propose_one(ctx: AcquisitionContext, model, rng: np.random.Generator) -> np.ndarray:
    d = ctx.lower.shape[0]
    n_cand = max(500 * d, 1000)
    cand = ctx.lower + latin_hypercube(rng, n_cand, d) * (ctx.upper - ctx.lower)
    # corners and training data often host the optimum; include them
    extra = np.vstack([model.inputs, ctx.lower[None, :], ctx.upper[None, :]])
    cand = np.vstack([cand, np.clip(extra, ctx.lower, ctx.upper)])
    scores = _ei_at(ctx, model, cand)
    order = np.argsort(scores)[::-1][: ctx.restarts]

    def neg_ei(x):
        return -_ei_at(ctx, model, np.clip(x, ctx.lower, ctx.upper)[None, :])[0]

    best_x = cand[order[0]]
    best_v = -scores[order[0]]
    for idx in order:
        res = minimize(
            neg_ei,
            cand[idx],
            method="Nelder-Mead",
            options={"maxiter": 120 * d, "xatol": 1e-4, "fatol": 1e-12},
        )
        if res.fun < best_v:
            best_v, best_x = res.fun, res.x
    return np.clip(best_x, ctx.lower, ctx.upper)


def propose(ctx: AcquisitionContext) -> np.ndarray:
    """Approximate argmax of EI over the box, deterministic per seed."""
    rng = np.random.default_rng(ctx.seed)
    return _propose_one(ctx, ctx.surrogate, rng)


def ensure_spacing(point: np.ndarray, taken, lower, upper) -> np.ndarray:
    """Nudge a point until it clears MIN_BATCH_SPACING from all taken points."""
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    out = np.asarray(point, dtype=float).copy()
    for _ in range(50):
        if all(np.linalg.norm(out - t) >= MIN_BATCH_SPACING for t in taken):
            return out
        # deterministic push along the axis with most room toward the box interior
        mid = 0.5 * (lower + upper)
        axis = int(np.argmax(np.abs(mid - out)))
        step = MIN_BATCH_SPACING * (1.0 if mid[axis] >= out[axis] else -1.0)
        out[axis] = np.clip(out[axis] + 2.0 * step, lower[axis], upper[axis])
    return out


def propose_batch(ctx: AcquisitionContext, q: int) -> np.ndarray:
    """q points by sequential fantasizing (believer strategy).

    After each proposal the scratch surrogate is re-conditioned with that
    point at its own posterior mean, which pushes the next proposal away.
    Points are kept pairwise distinct in coded units. Requires a plain GP
    surrogate (fantasizing re-conditions it directly).
    """
    if q < 1:
        raise DomainError("batch size must be >= 1")
    if not isinstance(ctx.surrogate, gp.GpModel):
        raise DomainError("propose_batch fantasizing needs a GpModel surrogate")
    rng = np.random.default_rng(ctx.seed)
    model = ctx.surrogate
    scratch_inputs = model.inputs
    # fantasy targets live in original units: rebuild from the standardized ones
    scratch_targets = model.prior_mean + model.target_scale * model.targets
    points: list[np.ndarray] = []
    incumbent = ctx.incumbent
    working_ctx = ctx
    for _ in range(q):
        x = _propose_one(working_ctx, model, rng)
        x = ensure_spacing(x, points, ctx.lower, ctx.upper)
        points.append(x)
        if len(points) == q:
            break
        mean, _ = gp.posterior_batch(model, x[None, :])
        scratch_inputs = np.vstack([scratch_inputs, x[None, :]])
        scratch_targets = np.append(scratch_targets, mean[0])
        model = gp.condition(
            scratch_inputs, scratch_targets, model.kernel, model.noise_variance
        )
        incumbent = min(incumbent, float(mean[0]))
        working_ctx = replace(ctx, incumbent=incumbent)
    return np.array(points)
