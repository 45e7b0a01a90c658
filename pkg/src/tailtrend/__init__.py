"""Semi-parametric estimation and testing of trends in tail exceedance probabilities.

Given repeated independent samples at time points s_0 = 0 < s_1 < ... < s_m,
the package estimates the constant c for which the probability of exceeding
any high threshold at time s is e^{c s} times the probability at time 0,
attaches asymptotic standard errors, tests c = 0, reproduces the estimators'
sampling behavior by Monte Carlo, and ingests daily precipitation records into
declustered panels.
"""

__version__ = "0.1.0"

from .errors import (DegenerateTailError, EstimationError, IndexSignError,
                     LogDomainError, NonPositiveDataError, ZeroExceedanceError)
from .estimators import ExceedanceTrendTest, TailTrendEstimator
from .evt import (TailSlice, combined_index, hill_estimator, moment_estimator,
                  moment_scale, panel_slices, tail_slice)
from .inference import (TestReport, attach_se, chisq_cdf, chisq_quantile,
                        se_c2, sigma_a0, sigma_gamma, test_q1, test_q2,
                        var_c1, var_c2, var_c3)
from .ingest import (BlockPanel, DailySeries, build_panel, completeness_filter,
                     decluster, parse_daily, serialize_daily, write_rain_day_table)
from .panel import SamplePanel, as_panel
from .simulate import (SimDesign, SimResult, inject_trend, replication_panel,
                       run_design, sample_base)
from .trend import (EPS_GAMMA, TrendFit, estimate_c1, estimate_c2, estimate_c3,
                    k_sweep, relative_risk_path, risk_change_per_period)

__all__ = [
    "__version__",
    "EstimationError", "NonPositiveDataError", "DegenerateTailError",
    "IndexSignError", "LogDomainError", "ZeroExceedanceError",
    "SamplePanel", "as_panel",
    "TailSlice", "tail_slice", "hill_estimator", "moment_estimator",
    "moment_scale", "combined_index", "panel_slices",
    "TrendFit", "EPS_GAMMA", "estimate_c1", "estimate_c2", "estimate_c3",
    "relative_risk_path", "risk_change_per_period", "k_sweep",
    "TestReport", "sigma_gamma", "sigma_a0", "var_c1", "var_c2", "var_c3",
    "se_c2", "attach_se", "test_q1", "test_q2", "chisq_cdf", "chisq_quantile",
    "SimDesign", "SimResult", "sample_base", "inject_trend",
    "replication_panel", "run_design",
    "DailySeries", "BlockPanel", "parse_daily", "serialize_daily",
    "completeness_filter", "decluster", "build_panel", "write_rain_day_table",
    "TailTrendEstimator", "ExceedanceTrendTest",
]
