"""Order-statistics extraction and extreme-value index/scale estimators.

The estimators work on the k+1 largest observations of a sample.  With the
slice sorted ascending, ``order_stats[0]`` is the random threshold (the
(n-k)-th smallest observation) and ``order_stats[1:]`` are the k exceedances.

All functions here are pure and safe to call concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DegenerateTailError, NonPositiveDataError
from .panel import SamplePanel


@dataclass(frozen=True)
class TailSlice:
    """Top k+1 order statistics of one sample, sorted ascending."""

    order_stats: np.ndarray
    n: int

    def __post_init__(self):
        arr = np.asarray(self.order_stats, dtype=float)
        if arr.ndim != 1 or arr.size < 2:
            raise ValueError("order_stats must be a 1-d array of length k+1 >= 2")
        if np.any(np.diff(arr) < 0.0):
            raise ValueError("order_stats must be sorted ascending")
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "order_stats", arr)

    @property
    def k(self) -> int:
        return self.order_stats.size - 1

    @property
    def threshold(self) -> float:
        """The random threshold X_{n-k,n}."""
        return float(self.order_stats[0])


def tail_slice(values, k: int) -> TailSlice:
    """Extract the k+1 largest values of a sample, sorted ascending.

    Duplicates are retained.  Raises ``ValueError`` unless 1 <= k <= n-1.
    """
    arr = np.asarray(values, dtype=float)
    n = arr.size
    if not 1 <= k <= n - 1:
        raise ValueError(f"k must satisfy 1 <= k <= n-1; got k={k}, n={n}")
    top = np.partition(arr, n - k - 1)[n - k - 1:]
    top.sort()
    return TailSlice(top, n)


def _check_positive(tail: TailSlice) -> np.ndarray:
    os_ = tail.order_stats
    if os_[0] <= 0.0:
        raise NonPositiveDataError(
            f"order statistic {os_[0]} is not strictly positive; "
            "log-based tail estimators need positive data"
        )
    return os_


def _log_moments(tail: TailSlice):
    """Moments of the log-spacings over the threshold: M1, M2, centered M2.

    The centered second moment equals M2 - M1^2 but is computed without the
    cancellation, which matters when the spacings are nearly constant.
    """
    os_ = _check_positive(tail)
    d = np.log(os_[1:]) - np.log(os_[0])
    m1 = float(d.mean())
    m2 = float((d * d).mean())
    dev = d - m1
    return m1, m2, float((dev * dev).mean())


def hill_estimator(tail: TailSlice) -> float:
    """Hill's estimator: mean log-spacing of the top k values over the threshold.

    Estimates max(gamma, 0); nonnegative by construction.
    """
    m1, _, _ = _log_moments(tail)
    return m1


def _moment_correction(tail: TailSlice) -> tuple:
    """Return (M1, 1/(1 - M1^2/M2)) with the degenerate cases rejected."""
    m1, m2, var = _log_moments(tail)
    if m2 <= 0.0:
        raise DegenerateTailError("all top order statistics are tied; tail index undefined")
    if var <= 0.0:
        raise DegenerateTailError(
            "degenerate log-spacing moments (k too small or constant spacings)"
        )
    # 1/(1 - M1^2/M2) = M2/(M2 - M1^2), with the difference taken centered
    return m1, m2 / var


def moment_estimator(tail: TailSlice) -> float:
    """Moment (second log-moment corrected) estimator of the tail index.

    Valid for gamma of any sign.  Raises :class:`DegenerateTailError` when the
    top values are all tied or when the log-spacings carry no spread
    (k=1 always degenerates).
    """
    m1, corr = _moment_correction(tail)
    return m1 + 1.0 - 0.5 * corr


def moment_scale(tail: TailSlice) -> float:
    """Scale estimator associated with the moment estimator.

    Returns X_{n-k,n} * M1 * (1 - gamma_minus) > 0, where gamma_minus is the
    negative part of the moment estimator.
    """
    m1, corr = _moment_correction(tail)
    return tail.threshold * m1 * (0.5 * corr)


_VARIANTS = {"hill": hill_estimator, "moment": moment_estimator}


def combined_index(slices: Sequence[TailSlice], variant: str = "moment",
                   first_group: int = 1) -> float:
    """Average the per-group index estimates over the non-baseline groups.

    ``slices`` are the tail slices of groups j = first_group, ..., m, all at
    the same k.  Per-group failures are re-raised annotated with the group
    index.
    """
    try:
        fn = _VARIANTS[variant]
    except KeyError:
        raise ValueError(f"unknown variant {variant!r}; expected 'hill' or 'moment'") from None
    slices = list(slices)
    if not slices:
        raise ValueError("need at least one tail slice")
    ks = {t.k for t in slices}
    if len(ks) > 1:
        raise ValueError(f"all slices must share the same k; got {sorted(ks)}")
    total = 0.0
    for j, t in enumerate(slices, start=first_group):
        try:
            total += fn(t)
        except ValueError as exc:
            raise type(exc)(f"group {j}: {exc}") from exc
    return total / len(slices)


def panel_slices(panel: SamplePanel, k: int) -> list:
    """Tail slices of every group of a panel at a shared k."""
    out = []
    for j, g in enumerate(panel.groups):
        try:
            out.append(tail_slice(g, k))
        except ValueError as exc:
            raise ValueError(f"group {j}: {exc}") from exc
    return out
