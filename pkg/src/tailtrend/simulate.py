"""Monte Carlo engine: trended samplers, replication sweeps, mean paths.

Panels are built from three base families with a multiplicative trend injected
in the exceedance probabilities, so the relative risk at time s over time 0 is
exactly e^{c s} in the far tail (exactly at every threshold for the
generalized Pareto family):

* gpd: F(x) = 1 - (1 + gamma x)^(-1/gamma), trend x -> e^{c s gamma} x +
  (e^{c s gamma} - 1)/gamma (additive limit x + c s when gamma = 0),
* pareto: F(x) = 1 - x^(-1/gamma), gamma > 0, trend x -> e^{c s gamma} x,
* cauchy: standard Cauchy (tail index 1), trend x -> e^{c s} x.

Reproducibility contract: every (replication, group) pair draws from its own
substream derived from (seed, replication index, group index), so results are
bit-identical for a given design and independent of evaluation order.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from .errors import EstimationError
from .panel import SamplePanel
from .trend import estimate_c1, estimate_c2, estimate_c3

FAMILIES = ("gpd", "pareto", "cauchy")
ESTIMATOR_NAMES = ("c1", "c2", "c3")

DEFAULT_K_GRID = tuple(range(5, 101, 5))


def gpd_inverse_cdf(u, gamma: float):
    """Quantile transform of the generalized Pareto law."""
    u = np.asarray(u, dtype=float)
    if gamma == 0.0:
        return -np.log1p(-u)
    return ((1.0 - u) ** (-gamma) - 1.0) / gamma


def pareto_inverse_cdf(u, gamma: float):
    """Quantile transform of the Pareto law on [1, inf)."""
    u = np.asarray(u, dtype=float)
    return (1.0 - u) ** (-gamma)


def cauchy_inverse_cdf(u):
    """Quantile transform of the standard Cauchy law."""
    u = np.asarray(u, dtype=float)
    return np.tan(np.pi * (u - 0.5))


def sample_base(family: str, gamma: float, n: int, rng: np.random.Generator) -> np.ndarray:
    """Draw n untrended observations by inverse transform."""
    u = rng.random(n)
    if family == "gpd":
        return gpd_inverse_cdf(u, gamma)
    if family == "pareto":
        if gamma <= 0.0:
            raise ValueError("the Pareto family needs gamma > 0")
        return pareto_inverse_cdf(u, gamma)
    if family == "cauchy":
        return cauchy_inverse_cdf(u)
    raise ValueError(f"unknown family {family!r}; expected one of {FAMILIES}")


def inject_trend(family: str, gamma: float, c: float, s: float, draws) -> np.ndarray:
    """Transform base draws so the exceedance probability scales by e^{c s}."""
    x = np.asarray(draws, dtype=float)
    if family == "gpd":
        if gamma == 0.0:
            return x + c * s
        f = math.exp(c * s * gamma)
        return f * x + (f - 1.0) / gamma
    if family == "pareto":
        return math.exp(c * s * gamma) * x
    if family == "cauchy":
        return math.exp(c * s) * x
    raise ValueError(f"unknown family {family!r}; expected one of {FAMILIES}")


@dataclass(frozen=True)
class SimDesign:
    """One Monte Carlo experiment: family, trend, sizes, k grid, seed."""

    family: str
    gamma: float
    c: float
    n: int
    m: int
    replications: int
    k_grid: tuple = field(default=DEFAULT_K_GRID)
    seed: int = 0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}; expected one of {FAMILIES}")
        if self.family == "pareto" and self.gamma <= 0.0:
            raise ValueError("the Pareto family needs gamma > 0")
        if self.family == "cauchy":
            object.__setattr__(self, "gamma", 1.0)  # fixed tail index
        if self.n < 2:
            raise ValueError("n must be at least 2")
        if self.m < 1:
            raise ValueError("m must be at least 1")
        if self.replications < 1:
            raise ValueError("replications must be positive")
        k_grid = tuple(int(k) for k in self.k_grid)
        if not k_grid:
            raise ValueError("k_grid must be nonempty")
        if any(not 1 <= k < self.n for k in k_grid):
            raise ValueError(f"every k must satisfy 1 <= k < n={self.n}")
        object.__setattr__(self, "k_grid", k_grid)
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must fit in 64 unsigned bits")

    @classmethod
    def from_dict(cls, d: dict) -> "SimDesign":
        known = {"family", "gamma", "c", "n", "m", "replications", "k_grid", "seed"}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown design fields: {sorted(unknown)}")
        missing = {"family", "gamma", "c", "n", "m", "replications"} - set(d)
        if missing:
            raise ValueError(f"missing design fields: {sorted(missing)}")
        d = dict(d)
        if "k_grid" in d:
            d["k_grid"] = tuple(d["k_grid"])
        return cls(**d)

    @classmethod
    def from_file(cls, path) -> "SimDesign":
        """Load a design from a JSON or TOML document."""
        with open(path, "rb") as fh:
            text = fh.read()
        if str(path).endswith(".toml"):
            try:
                import tomllib
            except ModuleNotFoundError:
                import tomli as tomllib
            return cls.from_dict(tomllib.loads(text.decode()))
        return cls.from_dict(json.loads(text))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["k_grid"] = list(d["k_grid"])
        return d


def replication_panel(design: SimDesign, rep: int) -> SamplePanel:
    """Build the panel of one replication: m+1 independent groups at s_j = j/m.

    Group j of replication ``rep`` uses the substream
    ``SeedSequence(seed, spawn_key=(rep, j))``.
    """
    m = design.m
    groups = []
    for j in range(m + 1):
        rng = np.random.default_rng(np.random.SeedSequence(design.seed, spawn_key=(rep, j)))
        base = sample_base(design.family, design.gamma, design.n, rng)
        groups.append(inject_trend(design.family, design.gamma, design.c, j / m, base))
    return SamplePanel.from_groups(groups, np.arange(m + 1) / m)


@dataclass(frozen=True)
class SimResult:
    """Replication means, SDs and error counts per (k, estimator)."""

    design: SimDesign
    means: np.ndarray     # (len(k_grid), 3), NaN where every replication failed
    sds: np.ndarray       # ddof=1, NaN when fewer than 2 successes
    errors: np.ndarray    # (len(k_grid), 3) int

    def mean(self, k: int, estimator: str) -> float:
        return float(self.means[self.design.k_grid.index(k), ESTIMATOR_NAMES.index(estimator)])

    def sd(self, k: int, estimator: str) -> float:
        return float(self.sds[self.design.k_grid.index(k), ESTIMATOR_NAMES.index(estimator)])

    def error_count(self, k: int, estimator: str) -> int:
        return int(self.errors[self.design.k_grid.index(k), ESTIMATOR_NAMES.index(estimator)])

    def rows(self) -> list:
        out = []
        for ik, k in enumerate(self.design.k_grid):
            for ie, name in enumerate(ESTIMATOR_NAMES):
                mean = self.means[ik, ie]
                sd = self.sds[ik, ie]
                out.append({
                    "k": k,
                    "estimator": name,
                    "mean": None if np.isnan(mean) else float(mean),
                    "sd": None if np.isnan(sd) else float(sd),
                    "errors": int(self.errors[ik, ie]),
                })
        return out

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["k", "estimator", "mean", "sd", "errors"])
            for r in self.rows():
                w.writerow([r["k"], r["estimator"],
                            "" if r["mean"] is None else f"{r['mean']:.6g}",
                            "" if r["sd"] is None else f"{r['sd']:.6g}",
                            r["errors"]])

    def to_json(self, **kwargs) -> str:
        payload = {
            "design": self.design.to_dict(),
            "note": "standard errors assume an undersmoothed k (no bias term)",
            "results": self.rows(),
        }
        return json.dumps(payload, **kwargs)


def run_design(design: SimDesign,
               progress: Callable[[int, int], None] | None = None) -> SimResult:
    """Run the full replication sweep of a design.

    Per-replication estimator failures are counted per (k, estimator), never
    fatal.  Deterministic for a given design, independent of evaluation order.
    """
    nk = len(design.k_grid)
    reps = design.replications
    values = np.full((reps, nk, 3), np.nan)
    fns = (estimate_c1, estimate_c2, estimate_c3)
    for rep in range(reps):
        panel = replication_panel(design, rep)
        for ik, k in enumerate(design.k_grid):
            for ie, fn in enumerate(fns):
                try:
                    values[rep, ik, ie] = fn(panel, k).c_hat
                except (EstimationError, ValueError):
                    pass
        if progress is not None:
            progress(rep + 1, reps)
    failed = np.isnan(values)
    ok_counts = (~failed).sum(axis=0)
    with np.errstate(invalid="ignore"):
        sums = np.nansum(values, axis=0)
        means = np.where(ok_counts > 0, sums / np.maximum(ok_counts, 1), np.nan)
        centered = np.where(failed, 0.0, values - means[None, :, :])
        ssq = (centered ** 2).sum(axis=0)
        sds = np.where(ok_counts > 1, np.sqrt(ssq / np.maximum(ok_counts - 1, 1)), np.nan)
    return SimResult(design=design, means=means, sds=sds, errors=failed.sum(axis=0))
