"""Small distribution helpers shared by the regression and acquisition code."""

from __future__ import annotations

import math

import numpy as np
from scipy import special

__all__ = ["norm_cdf", "norm_pdf", "f_sf", "t_quantile"]

_SQRT2 = math.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


def norm_cdf(z):
    """Standard normal CDF, Phi(z) = erfc(-z/sqrt(2)) / 2."""
    return 0.5 * special.erfc(-np.asarray(z, dtype=float) / _SQRT2)


def norm_pdf(z):
    """Standard normal density."""
    z = np.asarray(z, dtype=float)
    return _INV_SQRT_2PI * np.exp(-0.5 * z * z)


def f_sf(f_stat: float, df1: float, df2: float) -> float:
    """Upper tail P(F > f) of the F distribution.

    Computed through the regularized incomplete beta function:
    P(F > f) = I_x(df2/2, df1/2) with x = df2 / (df2 + df1*f).
    """
    if f_stat <= 0:
        return 1.0
    x = df2 / (df2 + df1 * f_stat)
    return float(special.betainc(df2 / 2.0, df1 / 2.0, x))


def t_quantile(p: float, df: float) -> float:
    """Student-t quantile; fractional degrees of freedom allowed."""
    return float(special.stdtrit(df, p))
