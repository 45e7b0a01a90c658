"""Asymptotic variances, standard errors and chi-square trend tests.

The variance formulas refer to the limit law of sqrt(k) * (estimate - c); the
standard error of the c2 estimate divides the plug-in variance by k.  They
assume an undersmoothed tail size (no second-order bias term); this is noted
in serialized output metadata.

The chi-square distribution functions are self-contained (regularized
incomplete gamma), accurate to about 1e-10 in probability.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, replace

import numpy as np

from . import evt
from .errors import IndexSignError
from .panel import SamplePanel
from .trend import EPS_GAMMA, TrendFit, _exceedance_counts, _log_thresholds

__all__ = [
    "TestReport", "sigma_gamma", "sigma_a0", "var_c1", "var_c2", "var_c3",
    "se_c2", "attach_se", "test_q1", "test_q2", "chisq_cdf", "chisq_quantile",
]


# ---------------------------------------------------------------------------
# pieces of the c2 variance

def sigma_gamma(gamma: float) -> float:
    """Asymptotic variance of the moment index estimator, as a function of gamma."""
    g = float(gamma)
    if g >= 0.0:
        return 1.0 + g * g
    return ((1 - g) ** 2 * (1 - 2 * g) * (1 - g + 6 * g * g)) / ((1 - 3 * g) * (1 - 4 * g))


def sigma_a0(gamma: float) -> float:
    """Asymptotic variance of the moment scale estimator, as a function of gamma."""
    g = float(gamma)
    if g >= 0.0:
        return 2.0 + g * g
    num = 2 - 16 * g + 51 * g ** 2 - 69 * g ** 3 + 50 * g ** 4 - 24 * g ** 5
    return num / ((1 - 2 * g) * (1 - 3 * g) * (1 - 4 * g))


# (1 - e^-u - u)/u^2 and (1 - e^-u)/u, stable near u = 0.  Direct evaluation
# loses all significance for small |u|; the series keeps relative error at
# double precision through the crossover.
_PHI_SWITCH = 1e-3


def _phi1(u: np.ndarray) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    out = np.empty_like(u)
    small = np.abs(u) < _PHI_SWITCH
    us = u[small]
    out[small] = -0.5 + us / 6.0 - us ** 2 / 24.0 + us ** 3 / 120.0 - us ** 4 / 720.0
    ub = u[~small]
    out[~small] = (-np.expm1(-ub) - ub) / (ub * ub)
    return out


def _phi2(u: np.ndarray) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    out = np.empty_like(u)
    small = np.abs(u) < _PHI_SWITCH
    us = u[small]
    out[small] = 1.0 - us / 2.0 + us ** 2 / 6.0 - us ** 3 / 24.0 + us ** 4 / 120.0
    ub = u[~small]
    out[~small] = -np.expm1(-ub) / ub
    return out


def _check_s(s) -> np.ndarray:
    s = np.asarray(s, dtype=float)
    if s.ndim != 1 or s.size < 1:
        raise ValueError("s must be a nonempty 1-d array of time points")
    if np.any(s <= 0.0) or np.any(np.diff(s) <= 0.0):
        raise ValueError("time points must be strictly increasing and positive")
    return s


def var_c1(c: float, gamma_plus: float, s) -> float:
    """Limit variance of sqrt(k) * (c1 estimate - c)."""
    if gamma_plus <= 0.0:
        raise ValueError(f"gamma_plus must be positive, got {gamma_plus}")
    s = _check_s(s)
    ss2 = float((s * s).sum())
    ss1 = float(s.sum())
    m = s.size
    return (ss2 + ss1 * ss1) / (ss2 * ss2 * gamma_plus * gamma_plus) + c * c / m


def var_c2(c: float, gamma: float, s) -> float:
    """Limit variance of sqrt(k) * (c2 estimate - c).

    Continuous in gamma at 0 and in c at 0; the gamma -> 0 coefficients are
    evaluated by series.
    """
    s = _check_s(s)
    m = s.size
    u = c * gamma * s
    g1 = c * c * s * s * _phi1(u)          # (1 - e^-u - u)/gamma^2
    g2 = c * s * _phi2(u)                  # (1 - e^-u)/gamma
    w = np.exp(-u)
    ss2 = float((s * s).sum())
    num = ((s * g1).sum() ** 2 * sigma_gamma(gamma) / m
           + ss2
           + (s * w).sum() ** 2
           + (s * g2).sum() ** 2 * sigma_a0(gamma))
    return float(num) / (ss2 * ss2)


def var_c3(c: float, s) -> float:
    """Limit variance of sqrt(k) * (c3 estimate - c)."""
    s = _check_s(s)
    ss1 = float(s.sum())
    return float((1.0 + np.exp(-c * s)).sum()) / (ss1 * ss1)


def se_c2(c: float, gamma: float, s, k: int) -> float:
    """Plug-in standard error of the c2 trend estimate at tail size k."""
    if k < 1:
        raise ValueError(f"k must be positive, got {k}")
    return math.sqrt(var_c2(c, gamma, s) / k)


def attach_se(fit: TrendFit, s) -> TrendFit:
    """Return a copy of a c2 fit with its plug-in standard error filled in."""
    if fit.estimator != "c2":
        raise ValueError(f"standard errors are defined for the c2 estimator, not {fit.estimator!r}")
    return replace(fit, se_hat=se_c2(fit.c_hat, fit.gamma_hat, s, fit.k))


# ---------------------------------------------------------------------------
# trend tests

@dataclass(frozen=True)
class TestReport:
    """Outcome of a no-trend test against the chi-square reference."""

    statistic: float
    df: int
    alpha: float
    critical_value: float
    p_value: float
    reject: bool

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)


def _report(statistic: float, m: int, alpha: float) -> TestReport:
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    crit = chisq_quantile(1.0 - alpha, m)
    return TestReport(
        statistic=float(statistic),
        df=m,
        alpha=float(alpha),
        critical_value=crit,
        p_value=1.0 - chisq_cdf(statistic, m),
        reject=bool(statistic > crit),
    )


def test_q1(panel: SamplePanel, k: int, alpha: float = 0.05,
            gamma: float | None = None) -> TestReport:
    """No-trend test from log threshold differences (positive index required).

    Every term compares against the same baseline-group threshold, which
    correlates the terms and makes the chi-square reference anticonservative;
    nominal levels understate the true size (see README).
    """
    slices = evt.panel_slices(panel, k)
    logt = _log_thresholds(slices)
    gamma_plus = evt.combined_index(slices[1:], "hill") if gamma is None else float(gamma)
    if gamma_plus <= EPS_GAMMA:
        raise IndexSignError(
            f"combined Hill estimate {gamma_plus:.3g} is not positive; "
            "this statistic requires a positive tail index"
        )
    q = (k / 2.0) * (((logt[1:] - logt[0]) / gamma_plus) ** 2).sum()
    return _report(q, panel.m, alpha)


def test_q2(panel: SamplePanel, k: int, alpha: float = 0.05) -> TestReport:
    """No-trend test from exceedance counts over the baseline threshold.

    Same caveat as :func:`test_q1`: the shared baseline threshold makes the
    chi-square reference anticonservative.
    """
    counts = _exceedance_counts(panel, k)
    q = (k / 2.0) * ((counts / k - 1.0) ** 2).sum()
    return _report(q, panel.m, alpha)


# ---------------------------------------------------------------------------
# chi-square distribution functions via the regularized incomplete gamma

_GAM_EPS = 1e-15
_GAM_ITMAX = 500


def _gamma_p_series(a: float, x: float) -> float:
    """Lower regularized incomplete gamma by power series (x < a + 1)."""
    ap = a
    term = 1.0 / a
    total = term
    for _ in range(_GAM_ITMAX):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * _GAM_EPS:
            break
    return total * math.exp(-x + a * math.log(x) - math.lgamma(a))


def _gamma_q_contfrac(a: float, x: float) -> float:
    """Upper regularized incomplete gamma by continued fraction (x >= a + 1)."""
    tiny = 1e-300
    b = x + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, _GAM_ITMAX + 1):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _GAM_EPS:
            break
    return h * math.exp(-x + a * math.log(x) - math.lgamma(a))


def _gamma_p(a: float, x: float) -> float:
    if x <= 0.0:
        return 0.0
    if x < a + 1.0:
        return min(_gamma_p_series(a, x), 1.0)
    return max(1.0 - _gamma_q_contfrac(a, x), 0.0)


def chisq_cdf(x: float, df: int) -> float:
    """Chi-square CDF with ``df`` degrees of freedom."""
    if df < 1:
        raise ValueError(f"df must be a positive integer, got {df}")
    if x <= 0.0:
        return 0.0
    return _gamma_p(df / 2.0, x / 2.0)


def chisq_quantile(p: float, df: int) -> float:
    """Chi-square quantile, by bisection-safeguarded Newton to ~1e-10."""
    if df < 1:
        raise ValueError(f"df must be a positive integer, got {df}")
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must lie in (0, 1), got {p}")
    a = df / 2.0
    # bracket the root
    lo, hi = 0.0, float(df)
    while chisq_cdf(hi, df) < p:
        lo = hi
        hi *= 2.0
    x = 0.5 * (lo + hi)
    log_norm = -a * math.log(2.0) - math.lgamma(a)
    for _ in range(200):
        f = chisq_cdf(x, df) - p
        if f > 0.0:
            hi = x
        else:
            lo = x
        pdf = math.exp((a - 1.0) * math.log(x) - x / 2.0 + log_norm) if x > 0 else 0.0
        if pdf > 0.0:
            step = f / pdf
            x_new = x - step
        else:
            x_new = 0.5 * (lo + hi)
        if not lo < x_new < hi:
            x_new = 0.5 * (lo + hi)
        if abs(x_new - x) <= 1e-12 * max(x, 1.0) and abs(f) < 1e-10:
            x = x_new
            break
        x = x_new
    return x
