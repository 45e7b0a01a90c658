"""Panels of repeated samples observed at increasing time points.

A panel holds m+1 independent groups of observations.  Group j was observed at
time point ``s[j]``; group 0 is the baseline at ``s[0] == 0``.  Group sizes may
differ.  The time points default to the equally spaced grid ``j/m``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np


def _as_group(values, j: int) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1:
        raise ValueError(f"group {j}: expected a 1-d array of observations")
    if arr.size < 2:
        raise ValueError(f"group {j}: need at least 2 observations, got {arr.size}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"group {j}: non-finite values are not allowed")
    arr = arr.copy()
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class SamplePanel:
    """m+1 sample groups indexed by strictly increasing time points.

    Groups are assumed to be independently sampled; that contract cannot be
    checked here and is the caller's responsibility (the rainfall ingestion
    pipeline earns it by declustering).
    """

    groups: tuple
    s: np.ndarray

    def __post_init__(self):
        groups = tuple(_as_group(g, j) for j, g in enumerate(self.groups))
        if len(groups) < 2:
            raise ValueError("a panel needs a baseline group and at least one later group")
        s = np.asarray(self.s, dtype=float)
        if s.shape != (len(groups),):
            raise ValueError(f"expected {len(groups)} time points, got shape {s.shape}")
        if not np.all(np.isfinite(s)):
            raise ValueError("time points must be finite")
        if s[0] != 0.0:
            raise ValueError(f"the baseline time point must be 0, got {s[0]}")
        if np.any(np.diff(s) <= 0.0):
            raise ValueError("time points must be strictly increasing")
        s = s.copy()
        s.flags.writeable = False
        object.__setattr__(self, "groups", groups)
        object.__setattr__(self, "s", s)

    @property
    def m(self) -> int:
        """Number of non-baseline time points."""
        return len(self.groups) - 1

    @property
    def group_sizes(self) -> tuple:
        return tuple(g.size for g in self.groups)

    @classmethod
    def from_groups(cls, groups: Sequence, s=None) -> "SamplePanel":
        """Build a panel; ``s`` defaults to the equally spaced grid j/m."""
        groups = list(groups)
        if s is None:
            m = len(groups) - 1
            if m < 1:
                raise ValueError("a panel needs at least 2 groups")
            s = np.arange(m + 1) / m
        return cls(tuple(groups), np.asarray(s, dtype=float))


def as_panel(X, s=None) -> SamplePanel:
    """Coerce ``X`` into a :class:`SamplePanel`.

    ``X`` may already be a panel, a 2-d array with one row per group, or a
    sequence of 1-d arrays of possibly different lengths.
    """
    if isinstance(X, SamplePanel):
        if s is not None:
            return SamplePanel.from_groups(X.groups, s)
        return X
    X = list(np.asarray(X)) if hasattr(X, "ndim") and getattr(X, "ndim", 1) == 2 else list(X)
    return SamplePanel.from_groups(X, s)
