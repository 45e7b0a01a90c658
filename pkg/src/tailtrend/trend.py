"""Least-squares estimators of the tail trend parameter c.

The model: exceedance probabilities at time s are e^{c s} times those at time
0, for any high threshold.  Three closed-form estimators are provided:

* ``estimate_c1``: regression of log threshold differences, valid for a
  strictly positive tail index (uses the combined Hill estimate).
* ``estimate_c2``: regression of the Box-Cox-type transform of threshold
  differences, valid for any tail index (uses the combined moment estimate and
  the baseline-group scale estimate).
* ``estimate_c3``: regression of log relative exceedance counts over the
  baseline threshold; needs no index or scale estimate at all and is invariant
  under any strictly increasing transform of the data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import evt
from .errors import IndexSignError, LogDomainError, NonPositiveDataError, ZeroExceedanceError
from .panel import SamplePanel

#: below this magnitude a tail-index estimate is treated as zero: c2 switches
#: to its continuity branch and c1 refuses to divide.
EPS_GAMMA = 1e-8


@dataclass(frozen=True)
class TrendFit:
    """Result of one trend estimation at a fixed tail size k."""

    estimator: str
    k: int
    c_hat: float
    gamma_hat: float | None = None
    a0_hat: float | None = None
    se_hat: float | None = None

    def __post_init__(self):
        if self.estimator not in ("c1", "c2", "c3"):
            raise ValueError(f"unknown estimator tag {self.estimator!r}")
        if self.se_hat is not None and not (math.isfinite(self.se_hat) and self.se_hat >= 0):
            raise ValueError("se_hat must be finite and nonnegative")


def _thresholds(slices) -> np.ndarray:
    return np.array([t.threshold for t in slices])


def _log_thresholds(slices) -> np.ndarray:
    thr = _thresholds(slices)
    bad = np.nonzero(thr <= 0.0)[0]
    if bad.size:
        j = int(bad[0])
        raise NonPositiveDataError(
            f"group {j}: threshold {thr[j]} is not strictly positive"
        )
    return np.log(thr)


def _exceedance_counts(panel: SamplePanel, k: int) -> np.ndarray:
    """Per-group counts of observations above the baseline threshold."""
    t0 = evt.tail_slice(panel.groups[0], k).threshold
    return np.array([int((g > t0).sum()) for g in panel.groups[1:]])


def estimate_c1(panel: SamplePanel, k: int, gamma: float | None = None) -> TrendFit:
    """Trend estimate from log threshold differences (positive index only).

    ``gamma`` overrides the combined Hill estimate, for sensitivity checks.
    """
    slices = evt.panel_slices(panel, k)
    logt = _log_thresholds(slices)
    gamma_plus = evt.combined_index(slices[1:], "hill") if gamma is None else float(gamma)
    if gamma_plus <= EPS_GAMMA:
        raise IndexSignError(
            f"combined Hill estimate {gamma_plus:.3g} is not positive; "
            "this estimator requires a positive tail index"
        )
    sj = panel.s[1:]
    c = float((sj * (logt[1:] - logt[0])).sum() / (gamma_plus * (sj * sj).sum()))
    return TrendFit("c1", k, c, gamma_hat=gamma_plus)


def estimate_c2(panel: SamplePanel, k: int, gamma: float | None = None,
                a0: float | None = None) -> TrendFit:
    """Trend estimate from scale-normalized threshold differences (any index).

    ``gamma`` and ``a0`` override the combined moment estimate and the
    baseline-group scale estimate.
    """
    slices = evt.panel_slices(panel, k)
    gamma_hat = evt.combined_index(slices[1:], "moment") if gamma is None else float(gamma)
    if a0 is None:
        try:
            a0_hat = evt.moment_scale(slices[0])
        except ValueError as exc:
            raise type(exc)(f"group 0: {exc}") from exc
    else:
        a0_hat = float(a0)
    if not a0_hat > 0.0:
        raise ValueError(f"scale estimate must be positive, got {a0_hat}")

    thr = _thresholds(slices)
    dx = (thr[1:] - thr[0]) / a0_hat
    sj = panel.s[1:]
    if abs(gamma_hat) < EPS_GAMMA:
        # gamma -> 0 limit of (1/gamma) log(1 + gamma x) is x exactly
        summand = dx
    else:
        arg = gamma_hat * dx
        bad = np.nonzero(1.0 + arg <= 0.0)[0]
        if bad.size:
            j = int(bad[0]) + 1
            raise LogDomainError(
                f"group {j}: 1 + gamma*(threshold difference)/scale = "
                f"{1.0 + arg[bad[0]]:.3g} <= 0; try a larger k"
            )
        summand = np.log1p(arg) / gamma_hat
    c = float((sj * summand).sum() / (sj * sj).sum())
    return TrendFit("c2", k, c, gamma_hat=gamma_hat, a0_hat=a0_hat)


def estimate_c3(panel: SamplePanel, k: int) -> TrendFit:
    """Trend estimate from relative exceedance counts over the baseline threshold.

    Shift and scale free: depends on the data only through ranks against the
    baseline group's threshold.  k is constrained by the baseline group alone.
    """
    counts = _exceedance_counts(panel, k)
    zero = np.nonzero(counts == 0)[0]
    if zero.size:
        j = int(zero[0]) + 1
        raise ZeroExceedanceError(
            f"group {j}: no observations above the baseline threshold; try a larger k"
        )
    sj = panel.s[1:]
    c = float(np.log(counts / k).sum() / sj.sum())
    return TrendFit("c3", k, c)


def relative_risk_path(panel: SamplePanel, k: int) -> np.ndarray:
    """Empirical log relative risk per time point, for plotting against s.

    Returns an (m+1, 2) array of rows (s_j, log of the relative exceedance
    frequency over the baseline threshold); the j=0 row is (0, 0) by
    construction.
    """
    counts = _exceedance_counts(panel, k)
    zero = np.nonzero(counts == 0)[0]
    if zero.size:
        j = int(zero[0]) + 1
        raise ZeroExceedanceError(
            f"group {j}: no observations above the baseline threshold; try a larger k"
        )
    out = np.zeros((panel.m + 1, 2))
    out[:, 0] = panel.s
    out[1:, 1] = np.log(counts / k)
    return out


def risk_change_per_period(fit, delta_s: float) -> float:
    """Relative change of the exceedance probability over a time span.

    ``fit`` may be a :class:`TrendFit` or a bare trend value c.  Returns
    e^{c * delta_s} - 1, e.g. +0.125 means the probability of exceeding any
    high threshold grows by 12.5% per ``delta_s`` time units.
    """
    if delta_s < 0:
        raise ValueError(f"delta_s must be nonnegative, got {delta_s}")
    c = getattr(fit, "c_hat", fit)
    return math.expm1(c * delta_s)


_ESTIMATORS = {"c1": estimate_c1, "c2": estimate_c2, "c3": estimate_c3}


def k_sweep(panel: SamplePanel, k_grid, estimators=("c1", "c2", "c3")) -> list:
    """Evaluate the trend estimators over a grid of tail sizes.

    Returns one dict per k with keys k, c1, c2, c3, gamma_plus, gamma_moment,
    a0; entries are None where an estimator raised a domain error (a sweep
    never aborts on per-k failures).
    """
    unknown = set(estimators) - set(_ESTIMATORS)
    if unknown:
        raise ValueError(f"unknown estimators: {sorted(unknown)}")
    rows = []
    for k in k_grid:
        row = {"k": int(k), "c1": None, "c2": None, "c3": None,
               "gamma_plus": None, "gamma_moment": None, "a0": None}
        for name in estimators:
            try:
                fit = _ESTIMATORS[name](panel, int(k))
            except ValueError:
                continue
            row[name] = fit.c_hat
            if name == "c1":
                row["gamma_plus"] = fit.gamma_hat
            elif name == "c2":
                row["gamma_moment"] = fit.gamma_hat
                row["a0"] = fit.a0_hat
        rows.append(row)
    return rows
