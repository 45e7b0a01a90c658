"""scikit-learn style wrappers around the trend estimators and tests.

``X`` is a panel: a 2-d array with one row per time-point group, or a sequence
of 1-d arrays of possibly different lengths.  Row 0 is the baseline group at
time 0; time points default to the equally spaced grid j/m and can be passed
via ``s``.
"""

from __future__ import annotations

import math

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from . import inference, trend
from .panel import as_panel

_METHODS = {"c1": trend.estimate_c1, "c2": trend.estimate_c2, "c3": trend.estimate_c3}


def _default_k(panel) -> int:
    return max(1, int(math.isqrt(min(panel.group_sizes))))


class TailTrendEstimator(BaseEstimator):
    """Estimate the trend in tail exceedance probabilities from panel data.

    Parameters
    ----------
    method : {"c2", "c1", "c3"}
        Which of the three closed-form estimators to use.  "c1" needs a
        positive tail index, "c2" works for any index, "c3" uses exceedance
        counts only.
    k : int or None
        Number of upper order statistics per group.  Defaults to
        floor(sqrt(smallest group size)).
    gamma, a0 : float or None
        Optional overrides of the internally estimated tail index and scale
        (ignored by "c3").

    Attributes
    ----------
    c_ : float
        Estimated trend: exceedance probabilities scale as e^{c_ * s}.
    gamma_ : float or None
        Tail index estimate used (combined Hill for "c1", combined moment for
        "c2", None for "c3").
    a0_ : float or None
        Baseline scale estimate ("c2" only).
    se_ : float or None
        Plug-in asymptotic standard error ("c2" only).
    k_ : int
        Tail size actually used.
    fit_result_ : TrendFit
        The full fit record.
    """

    def __init__(self, method: str = "c2", k: int | None = None,
                 gamma: float | None = None, a0: float | None = None):
        self.method = method
        self.k = k
        self.gamma = gamma
        self.a0 = a0

    def fit(self, X, s=None):
        if self.method not in _METHODS:
            raise ValueError(f"method must be one of {sorted(_METHODS)}, got {self.method!r}")
        panel = as_panel(X, s)
        k = self.k if self.k is not None else _default_k(panel)
        if self.method == "c1":
            fit = trend.estimate_c1(panel, k, gamma=self.gamma)
        elif self.method == "c2":
            fit = trend.estimate_c2(panel, k, gamma=self.gamma, a0=self.a0)
            fit = inference.attach_se(fit, panel.s[1:])
        else:
            fit = trend.estimate_c3(panel, k)
        self.fit_result_ = fit
        self.c_ = fit.c_hat
        self.gamma_ = fit.gamma_hat
        self.a0_ = fit.a0_hat
        self.se_ = fit.se_hat
        self.k_ = fit.k
        self.s_ = panel.s.copy()
        return self

    def _check_fitted(self):
        if not hasattr(self, "c_"):
            raise NotFittedError("this estimator is not fitted yet; call fit first")

    def predict(self, s):
        """Predicted log relative risk c_ * s at time offsets ``s``."""
        self._check_fitted()
        return self.c_ * np.asarray(s, dtype=float)

    def risk_change(self, delta_s: float) -> float:
        """Relative change e^{c_ * delta_s} - 1 of the exceedance probability."""
        self._check_fitted()
        return trend.risk_change_per_period(self.c_, delta_s)


class ExceedanceTrendTest(BaseEstimator):
    """Chi-square-calibrated test of the no-trend hypothesis c = 0.

    Parameters
    ----------
    statistic : {"q2", "q1"}
        "q1" compares log thresholds (positive tail index required), "q2"
        compares exceedance counts over the baseline threshold.
    k : int or None
        Tail size; defaults to floor(sqrt(smallest group size)).
    alpha : float
        Significance level for the rejection decision.

    Attributes
    ----------
    statistic_, df_, critical_value_, p_value_, reject_ : test outcome
    report_ : TestReport
    """

    def __init__(self, statistic: str = "q2", k: int | None = None, alpha: float = 0.05):
        self.statistic = statistic
        self.k = k
        self.alpha = alpha

    def fit(self, X, s=None):
        if self.statistic not in ("q1", "q2"):
            raise ValueError(f"statistic must be 'q1' or 'q2', got {self.statistic!r}")
        panel = as_panel(X, s)
        k = self.k if self.k is not None else _default_k(panel)
        fn = inference.test_q1 if self.statistic == "q1" else inference.test_q2
        report = fn(panel, k, alpha=self.alpha)
        self.report_ = report
        self.statistic_ = report.statistic
        self.df_ = report.df
        self.critical_value_ = report.critical_value
        self.p_value_ = report.p_value
        self.reject_ = report.reject
        self.k_ = k
        return self
