"""Second-order response-surface fitting, ANOVA and screening diagnostics.

Fitting happens in coded units via SVD-based least squares. ANOVA uses
adjusted (type-III) sums of squares, so per-term p-values remain meaningful
on reduced, non-orthogonal models. For saturated two-level screens with no
error degrees of freedom, Lenth's pseudo standard error takes over.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from .domain import DomainError
from .stats import f_sf, t_quantile

__all__ = [
    "ModelSpec",
    "QuadraticModel",
    "TermStat",
    "AnovaReport",
    "LenthEffect",
    "fit",
    "predict",
    "anova",
    "lenth_effects",
    "anova_to_text",
    "anova_to_csv",
    "FitError",
]


class FitError(ValueError):
    """Degenerate regression problem (rank deficiency, too few runs)."""


@dataclass(frozen=True)
class ModelSpec:
    """Which polynomial terms enter the model, as factor indices."""

    n_factors: int
    include_intercept: bool = True
    linear: tuple[int, ...] = ()
    interactions: tuple[tuple[int, int], ...] = ()
    squares: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "linear", tuple(self.linear))
        object.__setattr__(self, "interactions", tuple(tuple(p) for p in self.interactions))
        object.__setattr__(self, "squares", tuple(self.squares))
        seen = set()
        for i in self.linear:
            self._check_index(i)
            key = ("lin", i)
            if key in seen:
                raise DomainError(f"duplicate linear term {i}")
            seen.add(key)
        for i, j in self.interactions:
            self._check_index(i)
            self._check_index(j)
            key = ("int", *sorted((i, j)))
            if key in seen:
                raise DomainError(f"duplicate interaction term {(i, j)}")
            seen.add(key)
        for i in self.squares:
            self._check_index(i)
            key = ("sq", i)
            if key in seen:
                raise DomainError(f"duplicate square term {i}")
            seen.add(key)

    def _check_index(self, i: int):
        if not 0 <= i < self.n_factors:
            raise DomainError(f"term index {i} outside 0..{self.n_factors - 1}")

    @classmethod
    def linear_model(cls, n_factors: int) -> "ModelSpec":
        return cls(n_factors=n_factors, linear=tuple(range(n_factors)))

    @classmethod
    def full_quadratic(cls, n_factors: int) -> "ModelSpec":
        pairs = tuple(
            (i, j) for i in range(n_factors) for j in range(i + 1, n_factors)
        )
        return cls(
            n_factors=n_factors,
            linear=tuple(range(n_factors)),
            interactions=pairs,
            squares=tuple(range(n_factors)),
        )

    @property
    def n_terms(self) -> int:
        return (
            int(self.include_intercept)
            + len(self.linear)
            + len(self.interactions)
            + len(self.squares)
        )

    def term_names(self, factor_names=None) -> list[str]:
        def name(i):
            return factor_names[i] if factor_names is not None else f"x{i + 1}"

        out = ["intercept"] if self.include_intercept else []
        out += [name(i) for i in self.linear]
        out += [f"{name(i)}*{name(j)}" for i, j in self.interactions]
        out += [f"{name(i)}^2" for i in self.squares]
        return out

    def build_matrix(self, points: np.ndarray) -> np.ndarray:
        """Model matrix for points given as an (n, n_factors) array."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if pts.shape[1] != self.n_factors:
            raise DomainError(
                f"points have {pts.shape[1]} coordinates, spec expects {self.n_factors}"
            )
        cols = []
        if self.include_intercept:
            cols.append(np.ones(pts.shape[0]))
        for i in self.linear:
            cols.append(pts[:, i])
        for i, j in self.interactions:
            cols.append(pts[:, i] * pts[:, j])
        for i in self.squares:
            cols.append(pts[:, i] ** 2)
        return np.column_stack(cols)


@dataclass(frozen=True)
class QuadraticModel:
    """Fitted response surface; coefficients follow ``ModelSpec`` term order."""

    spec: ModelSpec
    coefficients: np.ndarray
    residual_variance: float
    training_size: int

    def __post_init__(self):
        object.__setattr__(
            self, "coefficients", np.asarray(self.coefficients, dtype=float)
        )
        if self.coefficients.shape[0] != self.spec.n_terms:
            raise DomainError("coefficient count does not match term count")
        if self.residual_variance < 0:
            raise DomainError("residual variance must be >= 0")


def _lstsq(X: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, float]:
    """Least-squares solve returning (coefficients, SSE); raises on rank deficiency."""
    beta, _, rank, _ = np.linalg.lstsq(X, y, rcond=None)
    if rank < X.shape[1]:
        raise FitError(
            f"model matrix is rank deficient (rank {rank} < {X.shape[1]} terms)"
        )
    resid = y - X @ beta
    return beta, float(resid @ resid)


def fit(design: np.ndarray, responses, spec: ModelSpec) -> QuadraticModel:
    """Least-squares fit of ``spec`` to coded design points."""
    X = spec.build_matrix(design)
    y = np.asarray(responses, dtype=float)
    n, p = X.shape
    if y.shape[0] != n:
        raise DomainError(f"{y.shape[0]} responses for {n} runs")
    if n < p:
        raise FitError(f"{n} runs cannot identify {p} terms")
    beta, sse = _lstsq(X, y)
    resid_var = sse / (n - p) if n > p else 0.0
    return QuadraticModel(
        spec=spec, coefficients=beta, residual_variance=resid_var, training_size=n
    )


def predict(model: QuadraticModel, points) -> np.ndarray | float:
    """Evaluate the fitted surface at coded point(s)."""
    pts = np.asarray(points, dtype=float)
    single = pts.ndim == 1
    out = model.spec.build_matrix(pts) @ model.coefficients
    return float(out[0]) if single else out


@dataclass(frozen=True)
class TermStat:
    name: str
    adj_ss: float
    df: int
    f_stat: float | None
    p_value: float | None


@dataclass(frozen=True)
class AnovaReport:
    terms: tuple[TermStat, ...]
    model_f: float | None
    model_p: float | None
    r2: float
    r2_adj: float
    r2_pred: float
    sse: float
    sst: float
    error_df: int
    p_values_available: bool = True


def anova(design: np.ndarray, responses, spec: ModelSpec, factor_names=None) -> AnovaReport:
    """Type-III ANOVA of the fitted model.

    Adjusted SS per term is the SSE increase from dropping that term from the
    full spec. Predicted R-squared comes from PRESS with leave-one-out
    residuals e_i / (1 - h_ii). When no error degrees of freedom remain,
    p-values are flagged unavailable (use :func:`lenth_effects` instead).
    """
    X = spec.build_matrix(design)
    y = np.asarray(responses, dtype=float)
    n, p = X.shape
    beta, sse = _lstsq(X, y)
    error_df = n - p
    sst = float(((y - y.mean()) ** 2).sum()) if spec.include_intercept else float(y @ y)
    mse = sse / error_df if error_df > 0 else np.nan

    # hat diagonal via the thin-QR factor
    q, _ = np.linalg.qr(X)
    hat = (q**2).sum(axis=1)
    loo = (y - X @ beta) / np.maximum(1.0 - hat, 1e-12)
    press = float((loo**2).sum())
    r2 = 1.0 - sse / sst if sst > 0 else 1.0
    r2_adj = (
        1.0 - (sse / error_df) / (sst / (n - 1)) if error_df > 0 and sst > 0 else r2
    )
    r2_pred = 1.0 - press / sst if sst > 0 else 1.0

    # an exact fit (mse == 0) makes F statistics infinite; flag p unavailable
    have_p = error_df > 0 and mse > 0
    names = spec.term_names(factor_names)
    terms = []
    start = 1 if spec.include_intercept else 0
    for k in range(start, p):
        keep = [c for c in range(p) if c != k]
        _, sse_drop = _lstsq(X[:, keep], y)
        adj_ss = max(sse_drop - sse, 0.0)
        if have_p:
            f_stat = adj_ss / mse
            p_val = f_sf(f_stat, 1, error_df)
        else:
            f_stat = p_val = None
        terms.append(TermStat(names[k], adj_ss, 1, f_stat, p_val))

    model_df = p - start
    ss_model = sst - sse
    if have_p and model_df > 0 and mse > 0:
        model_f = (ss_model / model_df) / mse
        model_p = f_sf(model_f, model_df, error_df)
    else:
        model_f = model_p = None

    return AnovaReport(
        terms=tuple(terms),
        model_f=model_f,
        model_p=model_p,
        r2=r2,
        r2_adj=r2_adj,
        r2_pred=r2_pred,
        sse=sse,
        sst=sst,
        error_df=error_df,
        p_values_available=have_p,
    )


@dataclass(frozen=True)
class LenthEffect:
    name: str
    estimate: float
    pseudo_t: float
    significant: bool


def lenth_effects(design: np.ndarray, responses, names=None) -> list[LenthEffect]:
    """Effect estimates for an unreplicated two-level design, judged by Lenth's PSE.

    Effects are twice the coded regression slopes. s0 = 1.5 * median|effect|;
    PSE = 1.5 * median of the effects with |effect| < 2.5 * s0; the margin of
    error is t(0.975, m/3) * PSE for m effects.
    """
    X = np.atleast_2d(np.asarray(design, dtype=float))
    y = np.asarray(responses, dtype=float)
    n, m = X.shape
    if m < 3:
        raise FitError(f"Lenth's method needs >= 3 effects, got {m}")
    if not np.all(np.isin(X, (-1.0, 1.0))):
        raise DomainError("Lenth's method expects a two-level (+/-1) design")
    full = np.column_stack([np.ones(n), X])
    beta, _, rank, _ = np.linalg.lstsq(full, y, rcond=None)
    if rank < full.shape[1]:
        raise FitError("aliased columns: effects are not separately estimable")
    effects = 2.0 * beta[1:]

    abs_eff = np.abs(effects)
    s0 = 1.5 * float(np.median(abs_eff))
    trimmed = abs_eff[abs_eff < 2.5 * s0]
    pse = 1.5 * float(np.median(trimmed)) if trimmed.size else 0.0
    margin = t_quantile(0.975, m / 3.0) * pse

    if names is None:
        names = [f"x{i + 1}" for i in range(m)]
    out = []
    for name, e in zip(names, effects):
        pt = e / pse if pse > 0 else 0.0
        out.append(LenthEffect(name, float(e), float(pt), bool(abs(e) > margin)))
    return out


def anova_to_text(report: AnovaReport, response: str = "response") -> str:
    """Fixed-width ANOVA table."""
    buf = io.StringIO()
    buf.write(f"ANOVA for {response}\n")
    buf.write(f"{'term':<28}{'adj SS':>12}{'df':>5}{'F':>12}{'p':>10}\n")
    for t in report.terms:
        f_s = f"{t.f_stat:.4g}" if t.f_stat is not None else "-"
        p_s = f"{t.p_value:.4f}" if t.p_value is not None else "-"
        buf.write(f"{t.name:<28}{t.adj_ss:>12.4f}{t.df:>5}{f_s:>12}{p_s:>10}\n")
    if report.model_f is not None:
        buf.write(f"{'model':<28}{report.sst - report.sse:>12.4f}{'':>5}"
                  f"{report.model_f:>12.4g}{report.model_p:>10.4f}\n")
    buf.write(f"error df {report.error_df}, SSE {report.sse:.4f}, SST {report.sst:.4f}\n")
    buf.write(
        f"R-sq {100 * report.r2:.2f}%  R-sq(adj) {100 * report.r2_adj:.2f}%  "
        f"R-sq(pred) {100 * report.r2_pred:.2f}%\n"
    )
    if not report.p_values_available:
        buf.write("p-values unavailable: no error degrees of freedom\n")
    return buf.getvalue()


def anova_to_csv(report: AnovaReport) -> str:
    buf = io.StringIO()
    buf.write("term,adj_ss,df,f,p\n")
    for t in report.terms:
        f_s = f"{t.f_stat:.6g}" if t.f_stat is not None else ""
        p_s = f"{t.p_value:.6g}" if t.p_value is not None else ""
        buf.write(f"{t.name},{t.adj_ss:.6g},{t.df},{f_s},{p_s}\n")
    buf.write(f"r2,{report.r2:.6g},,,\n")
    buf.write(f"r2_adj,{report.r2_adj:.6g},,,\n")
    buf.write(f"r2_pred,{report.r2_pred:.6g},,,\n")
    return buf.getvalue()
