"""Gaussian-process regression with Matern kernels.

The surrogate models observed responses y = f(x) + eps over coded inputs.
Targets are standardized internally (zero mean, unit variance), so the prior
mean is the data mean and the kernel signal variance is expressed in
standardized units. The posterior at a query point x is Gaussian:

    mu(x)    = m + k(x, X) (K + s2 I)^-1 (y - m)
    sigma2(x) = k(x, x) - k(x, X) (K + s2 I)^-1 k(X, x)

computed through a cached Cholesky factor, never an explicit inverse.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_solve, cholesky, solve_triangular
from scipy.optimize import minimize

from .domain import DomainError
from .sampling import latin_hypercube

__all__ = [
    "KernelSpec",
    "GpModel",
    "Posterior",
    "kernel_eval",
    "kernel_matrix",
    "condition",
    "posterior",
    "posterior_batch",
    "log_marginal_likelihood",
    "fit_hyperparams",
    "GpError",
]

_JITTERS = tuple(1e-10 * 10.0**k for k in range(5))  # 1e-10 .. 1e-6


class GpError(RuntimeError):
    """Kernel matrix could not be factorized (after jitter escalation)."""


@dataclass(frozen=True)
class KernelSpec:
    """Matern covariance: smoothness nu in {1/2, 3/2, 5/2}, signal variance,
    one lengthscale per input dimension (ARD)."""

    nu: float
    signal_variance: float
    lengthscales: np.ndarray

    def __post_init__(self):
        object.__setattr__(
            self, "lengthscales", np.atleast_1d(np.asarray(self.lengthscales, dtype=float))
        )
        if self.nu not in (0.5, 1.5, 2.5):
            raise DomainError(f"nu must be one of 1/2, 3/2, 5/2; got {self.nu}")
        if not self.signal_variance > 0:
            raise DomainError("signal variance must be > 0")
        if not np.all(self.lengthscales > 0):
            raise DomainError("all lengthscales must be > 0")


def _scaled_dist(spec: KernelSpec, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    diff = (X[:, None, :] - Y[None, :, :]) / spec.lengthscales
    return np.sqrt(np.maximum((diff**2).sum(axis=-1), 0.0))


def _matern(spec: KernelSpec, r: np.ndarray) -> np.ndarray:
    a0 = spec.signal_variance
    if spec.nu == 0.5:
        return a0 * np.exp(-r)
    if spec.nu == 1.5:
        s = math.sqrt(3.0) * r
        return a0 * (1.0 + s) * np.exp(-s)
    s = math.sqrt(5.0) * r
    return a0 * (1.0 + s + (5.0 / 3.0) * r**2) * np.exp(-s)


def kernel_eval(spec: KernelSpec, x, y) -> float:
    """Covariance between two points."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if x.shape != y.shape or x.shape[0] != spec.lengthscales.shape[0]:
        raise DomainError("point dimensions must match the kernel lengthscales")
    r = np.sqrt((((x - y) / spec.lengthscales) ** 2).sum())
    return float(_matern(spec, np.array(r)))


def kernel_matrix(spec: KernelSpec, X: np.ndarray, Y: np.ndarray | None = None) -> np.ndarray:
    X = np.atleast_2d(X)
    Y = X if Y is None else np.atleast_2d(Y)
    return _matern(spec, _scaled_dist(spec, X, Y))


@dataclass(frozen=True)
class GpModel:
    """Conditioned GP: training data plus the cached Cholesky factor of K + s2 I.

    ``prior_mean`` and the posterior are reported in original target units;
    ``noise_variance`` applies to the standardized targets.
    """

    inputs: np.ndarray
    targets: np.ndarray  # standardized
    kernel: KernelSpec
    noise_variance: float
    prior_mean: float  # original units (= target mean)
    target_scale: float  # original units per standardized unit
    chol: np.ndarray  # lower triangular
    alpha: np.ndarray  # (K + s2 I)^-1 targets

    @property
    def n(self) -> int:
        return self.inputs.shape[0]

    def posterior_batch(self, points) -> tuple[np.ndarray, np.ndarray]:
        return posterior_batch(self, points)


def _cholesky_with_jitter(K: np.ndarray, noise_variance: float) -> tuple[np.ndarray, float]:
    n = K.shape[0]
    A = K + noise_variance * np.eye(n)
    jitter_used = 0.0
    for jitter in (0.0, *_JITTERS):
        try:
            L = cholesky(A + jitter * np.eye(n), lower=True)
            return L, jitter
        except np.linalg.LinAlgError:
            jitter_used = jitter
            continue
    raise GpError(
        f"kernel matrix not positive definite after jitter escalation to {jitter_used:g}"
    )


def condition(inputs, targets, kernel: KernelSpec, noise_variance: float) -> GpModel:
    """Build the conditioned model: standardize targets, factorize K + s2 I."""
    X = np.atleast_2d(np.asarray(inputs, dtype=float))
    y = np.asarray(targets, dtype=float)
    if X.shape[0] != y.shape[0]:
        raise DomainError(f"{y.shape[0]} targets for {X.shape[0]} inputs")
    if X.shape[0] < 1:
        raise DomainError("need at least one observation")
    if noise_variance < 0:
        raise DomainError("noise variance must be >= 0")
    mean = float(y.mean())
    scale = float(y.std())
    if scale <= 0:
        scale = 1.0
    z = (y - mean) / scale
    K = kernel_matrix(kernel, X)
    L, _ = _cholesky_with_jitter(K, noise_variance)
    alpha = cho_solve((L, True), z)
    return GpModel(
        inputs=X,
        targets=z,
        kernel=kernel,
        noise_variance=noise_variance,
        prior_mean=mean,
        target_scale=scale,
        chol=L,
        alpha=alpha,
    )


@dataclass(frozen=True)
class Posterior:
    mean: float
    variance: float


def posterior_batch(model: GpModel, points) -> tuple[np.ndarray, np.ndarray]:
    """Posterior mean and variance (original units) at many coded points."""
    Xq = np.atleast_2d(np.asarray(points, dtype=float))
    Ks = kernel_matrix(model.kernel, Xq, model.inputs)  # (m, n)
    mean = model.prior_mean + model.target_scale * (Ks @ model.alpha)
    V = solve_triangular(model.chol, Ks.T, lower=True)  # (n, m)
    var_std = model.kernel.signal_variance - (V**2).sum(axis=0)
    var_std = np.where(var_std > -1e-10, np.maximum(var_std, 0.0), var_std)
    if np.any(var_std < 0):
        raise GpError(f"posterior variance fell below round-off tolerance: {var_std.min()}")
    return mean, model.target_scale**2 * var_std


def posterior(model: GpModel, point) -> Posterior:
    mean, var = posterior_batch(model, np.atleast_2d(point))
    return Posterior(mean=float(mean[0]), variance=float(var[0]))


def log_marginal_likelihood(model: GpModel) -> float:
    """Log evidence of the standardized targets under the model."""
    n = model.n
    data_fit = -0.5 * float(model.targets @ model.alpha)
    log_det = -float(np.log(np.diag(model.chol)).sum())
    return data_fit + log_det - 0.5 * n * math.log(2.0 * math.pi)


def fit_hyperparams(
    inputs,
    targets,
    nu: float = 2.5,
    bounds: dict | None = None,
    seed: int = 0,
    n_starts: int = 8,
) -> GpModel:
    """Maximize the log marginal likelihood over (signal variance, lengthscales,
    noise variance) by multi-start Nelder-Mead in log space.

    Starts come from a seeded Latin hypercube over the log-bounds box, so the
    result is deterministic per seed. Default bounds (standardized targets):
    lengthscales in [0.05, 20] coded units, signal variance in [1e-3, 1e3],
    noise variance in [1e-8, 1].
    """
    X = np.atleast_2d(np.asarray(inputs, dtype=float))
    y = np.asarray(targets, dtype=float)
    n, d = X.shape
    if n < 2:
        raise DomainError("hyperparameter fitting needs at least 2 observations")

    bounds = bounds or {}
    ls_lo, ls_hi = bounds.get("lengthscale", (0.05, 20.0))
    sv_lo, sv_hi = bounds.get("signal_variance", (1e-3, 1e3))
    nv_lo, nv_hi = bounds.get("noise_variance", (1e-8, 1.0))
    log_lo = np.log(np.array([sv_lo] + [ls_lo] * d + [nv_lo]))
    log_hi = np.log(np.array([sv_hi] + [ls_hi] * d + [nv_hi]))

    def build(log_theta: np.ndarray) -> GpModel:
        theta = np.exp(np.clip(log_theta, log_lo, log_hi))
        kern = KernelSpec(nu=nu, signal_variance=theta[0], lengthscales=theta[1 : 1 + d])
        return condition(X, y, kern, noise_variance=theta[-1])

    def neg_lml(log_theta: np.ndarray) -> float:
        try:
            return -log_marginal_likelihood(build(log_theta))
        except (GpError, np.linalg.LinAlgError):
            return 1e12

    rng = np.random.default_rng(seed)
    n_starts = max(int(n_starts), 8)
    starts = log_lo + latin_hypercube(rng, n_starts, log_lo.size) * (log_hi - log_lo)

    best_val, best_theta = np.inf, None
    for x0 in starts:
        res = minimize(
            neg_lml,
            x0,
            method="Nelder-Mead",
            options={"maxiter": 120 * log_lo.size, "xatol": 1e-3, "fatol": 1e-6},
        )
        if res.fun < best_val:
            best_val, best_theta = res.fun, res.x
    if best_theta is None or best_val >= 1e12:
        raise GpError("all hyperparameter starts failed to factorize")
    return build(best_theta)
