"""Multi-objective optimisation: desirability functions and NSGA-II.

Both optimizers minimise. Desirability maps each predicted response onto a
[0, 1] ramp between its acceptability anchors and maximises the weighted
geometric mean. NSGA-II evolves a population under non-dominated sorting
with crowding-distance diversity, simulated binary crossover and polynomial
mutation, and returns the final non-dominated front.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .domain import DesignSpace, DomainError
from .rsm import QuadraticModel, predict
from .sampling import sample_box

__all__ = [
    "DesirabilitySpec",
    "DesirabilityResult",
    "ParetoFront",
    "Nsga2Config",
    "desirability_min",
    "composite_desirability",
    "maximize_desirability",
    "fast_nondominated_sort",
    "crowding_distance",
    "nsga2",
    "hypervolume_2d",
    "rsm_evaluators",
    "EvaluatorError",
]

# Steers the optimizer across desirability plateaus (D identically 0 or 1)
# toward deeper margin without disturbing meaningful desirability contrasts.
_PLATEAU_TIEBREAK = 1e-6


class EvaluatorError(RuntimeError):
    """An objective evaluator failed; carries the offending settings."""

    def __init__(self, settings, cause):
        super().__init__(f"objective evaluation failed at {settings}: {cause}")
        self.settings = settings


@dataclass(frozen=True)
class DesirabilitySpec:
    """Per-objective acceptability anchors and weights."""

    y_min: tuple[float, ...]
    y_max: tuple[float, ...]
    weights: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "y_min", tuple(float(v) for v in self.y_min))
        object.__setattr__(self, "y_max", tuple(float(v) for v in self.y_max))
        object.__setattr__(self, "weights", tuple(float(v) for v in self.weights))
        if not len(self.y_min) == len(self.y_max) == len(self.weights):
            raise DomainError("anchor and weight lengths differ")
        for lo, hi in zip(self.y_min, self.y_max):
            if not lo < hi:
                raise DomainError(f"y_min must be < y_max ({lo} >= {hi})")
        if any(w <= 0 for w in self.weights):
            raise DomainError("weights must be > 0")

    @property
    def n(self) -> int:
        return len(self.weights)

    @classmethod
    def from_observed(cls, responses, weights=None) -> "DesirabilitySpec":
        """Anchors at the observed per-objective extremes (the default choice)."""
        F = np.atleast_2d(np.asarray(responses, dtype=float))
        if weights is None:
            weights = np.ones(F.shape[1])
        return cls(
            y_min=tuple(F.min(axis=0)),
            y_max=tuple(F.max(axis=0)),
            weights=tuple(weights),
        )


def desirability_min(y, y_min: float, y_max: float):
    """Linear smaller-is-better desirability: 1 at/below y_min, 0 at/above y_max."""
    if not y_min < y_max:
        raise DomainError(f"y_min must be < y_max ({y_min} >= {y_max})")
    y = np.asarray(y, dtype=float)
    d = np.clip((y_max - y) / (y_max - y_min), 0.0, 1.0)
    return float(d) if d.ndim == 0 else d


def composite_desirability(d, w) -> float:
    """Weighted geometric mean D = (prod d_i^w_i)^(1/n)."""
    d = np.asarray(d, dtype=float)
    w = np.asarray(w, dtype=float)
    if d.shape != w.shape:
        raise DomainError("desirability and weight lengths differ")
    if np.any(d < 0) or np.any(d > 1):
        raise DomainError("individual desirabilities must lie in [0, 1]")
    if np.any(w <= 0):
        raise DomainError("weights must be > 0")
    if np.any(d == 0):
        return 0.0
    return float(np.exp((w * np.log(d)).sum() / d.size))


@dataclass(frozen=True)
class DesirabilityResult:
    settings: np.ndarray  # natural units
    predictions: np.ndarray  # one per objective
    desirability: float
    degenerate: bool  # True when D == 0 everywhere searched


def _coded_bounds(space: DesignSpace, bounds) -> tuple[np.ndarray, np.ndarray]:
    """Search box in coded units; ``bounds`` maps factor name -> (lo, hi) natural."""
    lo, hi = space.coded_bounds
    if bounds:
        lo, hi = lo.copy(), hi.copy()
        for name, (blo, bhi) in bounds.items():
            if name not in space.names:
                raise DomainError(f"unknown factor {name!r} in bounds")
            i = space.names.index(name)
            f = space.factors[i]
            lo[i] = max(lo[i], (blo - f.center) / f.half_range)
            hi[i] = min(hi[i], (bhi - f.center) / f.half_range)
            if lo[i] >= hi[i]:
                raise DomainError(f"empty bound interval for factor {name!r}")
    return lo, hi


def maximize_desirability(
    models: list[QuadraticModel],
    spec: DesirabilitySpec,
    space: DesignSpace,
    seed: int = 0,
    bounds: dict | None = None,
    n_starts: int = 32,
) -> DesirabilityResult:
    """Maximise composite desirability of model predictions over the search box.

    Seeded multi-start Nelder-Mead; starts cover a Latin hypercube plus the
    box center and corners. Where D plateaus (every prediction beyond its
    anchor), a tiny margin bonus steers toward the most comfortable settings,
    keeping the returned point deterministic.
    """
    if len(models) != spec.n:
        raise DomainError(f"{len(models)} models for {spec.n} objectives")
    lo, hi = _coded_bounds(space, bounds)
    d_dim = space.dim
    w = np.asarray(spec.weights)
    y_lo = np.asarray(spec.y_min)
    y_hi = np.asarray(spec.y_max)

    def predictions(c: np.ndarray) -> np.ndarray:
        return np.array([predict(m, c) for m in models])

    def desirability_at(c: np.ndarray) -> float:
        y = predictions(c)
        d = np.clip((y_hi - y) / (y_hi - y_lo), 0.0, 1.0)
        return composite_desirability(d, w)

    def score(c: np.ndarray) -> float:
        c = np.clip(c, lo, hi)
        y = predictions(c)
        ramp = (y_hi - y) / (y_hi - y_lo)  # unclamped margin
        d = np.clip(ramp, 0.0, 1.0)
        D = composite_desirability(d, w)
        return D + _PLATEAU_TIEBREAK * float(ramp.mean())

    rng = np.random.default_rng(seed)
    starts = [np.zeros(d_dim)]
    if d_dim <= 6:
        corners = np.array(
            np.meshgrid(*[(l, h) for l, h in zip(lo, hi)], indexing="ij")
        ).reshape(d_dim, -1).T
        starts.extend(corners)
    starts.extend(sample_box(rng, max(n_starts, 32), lo, hi))

    best_x, best_s = None, -np.inf
    probed: list[float] = []
    for x0 in starts:
        probed.append(desirability_at(np.clip(x0, lo, hi)))
        res = minimize(
            lambda c: -score(c),
            x0,
            method="Nelder-Mead",
            options={"maxiter": 200 * d_dim, "xatol": 1e-6, "fatol": 1e-12},
        )
        if -res.fun > best_s:
            best_s, best_x = -res.fun, np.clip(res.x, lo, hi)

    y = predictions(best_x)
    d = np.clip((y_hi - y) / (y_hi - y_lo), 0.0, 1.0)
    D = composite_desirability(d, w)
    # degenerate: zero everywhere, or no contrast anywhere we looked
    flat = max(probed + [D]) - min(probed + [D]) <= 1e-12
    return DesirabilityResult(
        settings=space.from_coded(best_x),
        predictions=y,
        desirability=D,
        degenerate=bool(D == 0.0 or flat),
    )


def _dominates(a: np.ndarray, b: np.ndarray) -> bool:
    return bool(np.all(a <= b) and np.any(a < b))


def fast_nondominated_sort(points) -> list[list[int]]:
    """Deb's fast non-dominated sort; returns fronts as lists of row indices."""
    F = np.atleast_2d(np.asarray(points, dtype=float))
    n = F.shape[0]
    if n == 0:
        raise DomainError("need at least one point")
    # pairwise dominance matrix: dom[i, j] = i dominates j
    le = np.all(F[:, None, :] <= F[None, :, :], axis=2)
    lt = np.any(F[:, None, :] < F[None, :, :], axis=2)
    dom = le & lt
    n_dominators = dom.sum(axis=0)
    fronts = []
    remaining = n_dominators.copy()
    assigned = np.zeros(n, dtype=bool)
    current = list(np.flatnonzero(remaining == 0))
    while current:
        fronts.append(current)
        assigned[current] = True
        nxt = []
        for p in current:
            for q in np.flatnonzero(dom[p]):
                remaining[q] -= 1
                if remaining[q] == 0 and not assigned[q]:
                    nxt.append(int(q))
        current = sorted(set(nxt))
    return fronts


def crowding_distance(front_points) -> np.ndarray:
    """Crowding distance of each solution within one front.

    Boundary solutions per objective get +inf; interior ones accumulate the
    normalized gap to their neighbours. A degenerate objective (no spread)
    contributes nothing.
    """
    F = np.atleast_2d(np.asarray(front_points, dtype=float))
    n, m = F.shape
    if n == 0:
        raise DomainError("front must be non-empty")
    dist = np.zeros(n)
    if n <= 2:
        return np.full(n, np.inf)
    for j in range(m):
        order = np.argsort(F[:, j], kind="stable")
        span = F[order[-1], j] - F[order[0], j]
        dist[order[0]] = dist[order[-1]] = np.inf
        if span <= 0:
            continue
        gaps = (F[order[2:], j] - F[order[:-2], j]) / span
        dist[order[1:-1]] += gaps
    return dist


@dataclass(frozen=True)
class Nsga2Config:
    population: int = 100
    generations: int = 100
    crossover_prob: float = 0.8
    crossover_eta: float = 15.0
    mutation_prob: float | None = None  # default 1/d per variable
    mutation_eta: float = 20.0
    seed: int = 0

    def __post_init__(self):
        if self.population < 4 or self.population % 2:
            raise DomainError("population must be even and >= 4")
        for p in (self.crossover_prob, self.mutation_prob):
            if p is not None and not 0.0 <= p <= 1.0:
                raise DomainError(f"probability {p} outside [0, 1]")
        if self.generations < 1:
            raise DomainError("generations must be >= 1")


@dataclass(frozen=True)
class ParetoFront:
    """Mutually non-dominated solutions in natural units."""

    settings: np.ndarray  # (n, d)
    objectives: np.ndarray  # (n, m)
    hypervolume_log: tuple[tuple[int, float], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "settings", np.atleast_2d(np.asarray(self.settings, dtype=float)))
        object.__setattr__(self, "objectives", np.atleast_2d(np.asarray(self.objectives, dtype=float)))
        F = self.objectives
        for i in range(F.shape[0]):
            for j in range(F.shape[0]):
                if i != j and _dominates(F[i], F[j]):
                    raise DomainError(
                        f"front is not mutually non-dominated: row {i} dominates row {j}"
                    )

    def __len__(self) -> int:
        return self.settings.shape[0]

    def to_csv(self, names, objective_names, path=None) -> str:
        lines = [",".join([*names, *objective_names])]
        for x, f in zip(self.settings, self.objectives):
            lines.append(",".join(f"{v:.6g}" for v in (*x, *f)))
        text = "\n".join(lines) + "\n"
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text)
        return text


def hypervolume_2d(points, reference) -> float:
    """Dominated area between a 2-objective front and a reference point."""
    F = np.atleast_2d(np.asarray(points, dtype=float))
    ref = np.asarray(reference, dtype=float)
    if F.shape[1] != 2:
        raise DomainError("hypervolume_2d needs exactly two objectives")
    keep = np.all(F <= ref, axis=1)
    F = F[keep]
    if F.shape[0] == 0:
        return 0.0
    fronts = fast_nondominated_sort(F)
    F = F[fronts[0]]
    order = np.argsort(F[:, 0], kind="stable")
    F = F[order]
    hv = 0.0
    for i in range(F.shape[0]):
        x_next = F[i + 1, 0] if i + 1 < F.shape[0] else ref[0]
        hv += (x_next - F[i, 0]) * (ref[1] - F[i, 1])
    return float(hv)


def rsm_evaluators(models: list[QuadraticModel], space: DesignSpace):
    """Wrap fitted response-surface models as natural-unit objective functions."""

    def make(model):
        def evaluate(settings):
            return float(predict(model, space.to_coded(settings)))

        return evaluate

    return [make(m) for m in models]


def _evaluate_population(evaluators, X: np.ndarray) -> np.ndarray:
    out = np.empty((X.shape[0], len(evaluators)))
    for i, x in enumerate(X):
        for j, ev in enumerate(evaluators):
            try:
                out[i, j] = ev(x)
            except Exception as exc:  # surface which settings broke the evaluator
                raise EvaluatorError(x, exc) from exc
    return out


def _tournament(rng, rank, crowd) -> int:
    i, j = rng.integers(0, rank.size, size=2)
    if rank[i] != rank[j]:
        return int(i if rank[i] < rank[j] else j)
    if crowd[i] != crowd[j]:
        return int(i if crowd[i] > crowd[j] else j)
    return int(i)


def _sbx(rng, p1, p2, lo, hi, prob, eta):
    """Simulated binary crossover, per-variable, bounded."""
    c1, c2 = p1.copy(), p2.copy()
    if rng.uniform() > prob:
        return c1, c2
    for k in range(p1.size):
        if rng.uniform() > 0.5 or abs(p1[k] - p2[k]) < 1e-14:
            continue
        y1, y2 = sorted((p1[k], p2[k]))
        u = rng.uniform()
        beta = 1.0 + 2.0 * (y1 - lo[k]) / (y2 - y1)
        alpha = 2.0 - beta ** -(eta + 1.0)
        bq = (u * alpha) ** (1.0 / (eta + 1.0)) if u <= 1.0 / alpha else (
            1.0 / (2.0 - u * alpha)
        ) ** (1.0 / (eta + 1.0))
        child1 = 0.5 * ((y1 + y2) - bq * (y2 - y1))
        beta = 1.0 + 2.0 * (hi[k] - y2) / (y2 - y1)
        alpha = 2.0 - beta ** -(eta + 1.0)
        bq = (u * alpha) ** (1.0 / (eta + 1.0)) if u <= 1.0 / alpha else (
            1.0 / (2.0 - u * alpha)
        ) ** (1.0 / (eta + 1.0))
        child2 = 0.5 * ((y1 + y2) + bq * (y2 - y1))
        if rng.uniform() < 0.5:
            child1, child2 = child2, child1
        c1[k] = np.clip(child1, lo[k], hi[k])
        c2[k] = np.clip(child2, lo[k], hi[k])
    return c1, c2


def _polynomial_mutation(rng, x, lo, hi, prob, eta):
    y = x.copy()
    for k in range(x.size):
        if rng.uniform() > prob:
            continue
        span = hi[k] - lo[k]
        u = rng.uniform()
        if u < 0.5:
            rel = (y[k] - lo[k]) / span
            delta = (2.0 * u + (1.0 - 2.0 * u) * (1.0 - rel) ** (eta + 1.0)) ** (
                1.0 / (eta + 1.0)
            ) - 1.0
        else:
            rel = (hi[k] - y[k]) / span
            delta = 1.0 - (
                2.0 * (1.0 - u) + 2.0 * (u - 0.5) * (1.0 - rel) ** (eta + 1.0)
            ) ** (1.0 / (eta + 1.0))
        y[k] = np.clip(y[k] + delta * span, lo[k], hi[k])
    return y


def _rank_and_crowd(F: np.ndarray) -> tuple[np.ndarray, np.ndarray, list[list[int]]]:
    fronts = fast_nondominated_sort(F)
    rank = np.empty(F.shape[0], dtype=int)
    crowd = np.empty(F.shape[0])
    for r, front in enumerate(fronts):
        rank[front] = r
        crowd[front] = crowding_distance(F[front])
    return rank, crowd, fronts


def nsga2(
    evaluators,
    space: DesignSpace,
    config: Nsga2Config,
    bounds: dict | None = None,
    hv_every: int = 10,
) -> ParetoFront:
    """Elitist NSGA-II over the design box; returns the final first front.

    For two-objective problems the hypervolume of the archive of everything
    evaluated so far (reference fixed at the per-objective maxima of
    generation zero) is logged every ``hv_every`` generations; unlike the
    population front, which crowding truncation can thin, the archive's
    hypervolume never decreases.
    """
    clo, chi = _coded_bounds(space, bounds)
    lo, hi = space.from_coded(clo), space.from_coded(chi)
    d = space.dim
    m = len(evaluators)
    mut_prob = config.mutation_prob if config.mutation_prob is not None else 1.0 / d

    rng = np.random.default_rng(config.seed)
    X = sample_box(rng, config.population, lo, hi)
    F = _evaluate_population(evaluators, X)
    reference = F.max(axis=0)
    rank, crowd, fronts = _rank_and_crowd(F)
    archive = F[fronts[0]]
    hv_log = []
    if m == 2:
        hv_log.append((0, hypervolume_2d(archive, reference)))

    for gen in range(1, config.generations + 1):
        children = np.empty_like(X)
        for i in range(0, config.population, 2):
            p1 = X[_tournament(rng, rank, crowd)]
            p2 = X[_tournament(rng, rank, crowd)]
            c1, c2 = _sbx(rng, p1, p2, lo, hi, config.crossover_prob, config.crossover_eta)
            children[i] = _polynomial_mutation(rng, c1, lo, hi, mut_prob, config.mutation_eta)
            children[i + 1] = _polynomial_mutation(rng, c2, lo, hi, mut_prob, config.mutation_eta)
        Fc = _evaluate_population(evaluators, children)

        pool_X = np.vstack([X, children])
        pool_F = np.vstack([F, Fc])
        pool_rank, pool_crowd, pool_fronts = _rank_and_crowd(pool_F)
        chosen: list[int] = []
        for front in pool_fronts:
            if len(chosen) + len(front) <= config.population:
                chosen.extend(front)
            else:
                need = config.population - len(chosen)
                order = np.argsort(pool_crowd[front])[::-1]
                chosen.extend(int(front[k]) for k in order[:need])
                break
        X, F = pool_X[chosen], pool_F[chosen]
        rank, crowd, fronts = _rank_and_crowd(F)
        pool = np.unique(np.vstack([archive, Fc]), axis=0)
        archive = pool[fast_nondominated_sort(pool)[0]]
        if m == 2 and (gen % hv_every == 0 or gen == config.generations):
            hv_log.append((gen, hypervolume_2d(archive, reference)))

    first = fronts[0]
    Xf, Ff = X[first], F[first]
    _, unique_idx = np.unique(np.hstack([Xf, Ff]).round(12), axis=0, return_index=True)
    keep = sorted(unique_idx)
    return ParetoFront(
        settings=Xf[keep], objectives=Ff[keep], hypervolume_log=tuple(hv_log)
    )
