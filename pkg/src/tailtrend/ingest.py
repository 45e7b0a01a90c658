"""Daily precipitation ingestion, quality filtering, declustering, paneling.

Input format (ECA&D-style RR files): header lines starting with a non-digit
are skipped; data lines are comma-separated STAID, SOUID, DATE (YYYYMMDD),
RR (integer, tenths of mm, -9999 = missing), Q_RR (0 valid, 1 suspect,
9 missing).  Suspect and missing are both treated as missing.

The pipeline: parse -> completeness filter (keep years with fewer than
``max_missing`` missing days) -> split into calendar blocks -> decluster each
block (greedy highest-first selection removing adjacent days) -> panel of
blocks with time points j/m.
"""

from __future__ import annotations

import calendar
import csv
import datetime as dt
import json
import os
from dataclasses import dataclass

import numpy as np

from .panel import SamplePanel

MISSING_RR = -9999
QUALITY_OK = 0
RAIN_DAY_MM = 1.0


class DailyParseError(ValueError):
    """A daily input file could not be parsed."""


class DegenerateBlockError(ValueError):
    """A block retained too few observations to estimate anything."""


@dataclass(frozen=True)
class DailySeries:
    """Date-stamped daily measurements of one station, with quality flags."""

    station_id: int
    station_name: str
    souid: np.ndarray        # per-record source id
    dates: np.ndarray        # datetime64[D], strictly increasing
    rr_tenths: np.ndarray    # raw integer tenths of mm, -9999 = missing
    quality: np.ndarray      # 0 = valid, 1 = suspect, 9 = missing

    def __post_init__(self):
        for name in ("souid", "rr_tenths", "quality"):
            arr = np.asarray(getattr(self, name), dtype=np.int64)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        dates = np.asarray(self.dates, dtype="datetime64[D]")
        dates.flags.writeable = False
        object.__setattr__(self, "dates", dates)

    def __eq__(self, other):
        if not isinstance(other, DailySeries):
            return NotImplemented
        return (self.station_id == other.station_id
                and self.station_name == other.station_name
                and np.array_equal(self.souid, other.souid)
                and np.array_equal(self.dates, other.dates)
                and np.array_equal(self.rr_tenths, other.rr_tenths)
                and np.array_equal(self.quality, other.quality))

    @property
    def valid(self) -> np.ndarray:
        """Mask of records that carry a usable measurement."""
        return (self.rr_tenths != MISSING_RR) & (self.quality == QUALITY_OK)

    @property
    def values_mm(self) -> np.ndarray:
        """Rainfall in mm; NaN where missing or flagged."""
        out = self.rr_tenths / 10.0
        out[~self.valid] = np.nan
        return out

    @property
    def years(self) -> np.ndarray:
        return self.dates.astype("datetime64[Y]").astype(int) + 1970


def parse_daily(source, station_name: str = "") -> DailySeries:
    """Parse an ECA&D-style daily rainfall file.

    ``source`` may be a path, a string of file contents, or bytes.  Raises
    :class:`DailyParseError` naming the offending line on malformed rows,
    non-monotone dates or inconsistent station ids.
    """
    if isinstance(source, bytes):
        text = source.decode("utf-8", errors="replace")
    elif isinstance(source, os.PathLike) or (isinstance(source, str) and "\n" not in source):
        with open(source, "r", encoding="utf-8", errors="replace") as fh:
            text = fh.read()
    elif hasattr(source, "read"):
        text = source.read()
        if isinstance(text, bytes):
            text = text.decode("utf-8", errors="replace")
    else:
        text = source

    souids, dates, rrs, quals = [], [], [], []
    station_id = None
    prev_date = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or not line[0].isdigit():
            continue  # header / blank
        fields = [f.strip() for f in line.split(",")]
        if len(fields) != 5:
            raise DailyParseError(f"line {lineno}: expected 5 comma-separated fields, got {len(fields)}")
        try:
            staid, souid = int(fields[0]), int(fields[1])
            date = dt.datetime.strptime(fields[2], "%Y%m%d").date()
            rr, q = int(fields[3]), int(fields[4])
        except ValueError as exc:
            raise DailyParseError(f"line {lineno}: {exc}") from None
        if station_id is None:
            station_id = staid
        elif staid != station_id:
            raise DailyParseError(f"line {lineno}: station id {staid} != {station_id}")
        if prev_date is not None and date <= prev_date:
            raise DailyParseError(f"line {lineno}: dates must be strictly increasing")
        prev_date = date
        souids.append(souid)
        dates.append(date)
        rrs.append(rr)
        quals.append(q)
    if station_id is None:
        raise DailyParseError("no data lines found")
    return DailySeries(
        station_id=station_id,
        station_name=station_name,
        souid=np.array(souids, dtype=np.int64),
        dates=np.array(dates, dtype="datetime64[D]"),
        rr_tenths=np.array(rrs, dtype=np.int64),
        quality=np.array(quals, dtype=np.int64),
    )


def serialize_daily(series: DailySeries) -> str:
    """Render a series back into the parseable comma-separated format."""
    lines = ["# STAID, SOUID,     DATE,    RR, Q_RR"]
    for souid, date, rr, q in zip(series.souid, series.dates, series.rr_tenths, series.quality):
        ymd = str(date).replace("-", "")
        lines.append(f"{series.station_id:6d},{souid:7d}, {ymd},{rr:6d},{q:5d}")
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class CompletenessReport:
    """Per-year missing-day counts and the compliance verdict."""

    missing_by_year: dict
    flagged_years: tuple
    max_missing: int


def completeness_filter(series: DailySeries, window: tuple = (1918, 2007),
                        max_missing: int = 10):
    """Select the maximal contiguous span of sufficiently complete years.

    A year is compliant when it has fewer than ``max_missing`` missing days
    (absent records count as missing, as do flagged ones).  Returns
    ``((first_year, last_year), report)`` for the longest compliant run inside
    ``window``; ties break toward the most recent run.
    """
    y0, y1 = int(window[0]), int(window[1])
    if y1 < y0:
        raise ValueError(f"bad window {window}")
    valid_years = series.years[series.valid]
    counts = dict(zip(*np.unique(valid_years, return_counts=True)))
    missing = {}
    for y in range(y0, y1 + 1):
        days = 366 if calendar.isleap(y) else 365
        missing[y] = days - int(counts.get(y, 0))
    flagged = tuple(y for y in range(y0, y1 + 1) if missing[y] >= max_missing)
    report = CompletenessReport(missing, flagged, max_missing)

    best = None  # (length, start)
    start = None
    for y in range(y0, y1 + 2):
        ok = y <= y1 and missing[y] < max_missing
        if ok and start is None:
            start = y
        elif not ok and start is not None:
            run = (y - start, start)
            if best is None or run[0] >= best[0]:
                best = run
            start = None
    if best is None:
        raise ValueError(
            f"no year in {y0}-{y1} has fewer than {max_missing} missing days"
        )
    length, first = best
    return (first, first + length - 1), report


def decluster(dates, values, max_select: int = 70, min_value: float = RAIN_DAY_MM) -> np.ndarray:
    """Greedy selection of high values separated by at least one calendar day.

    Repeatedly picks the highest remaining observation (ties: earliest date)
    and discards the day before and after, until ``max_select`` values are
    chosen or only values below ``min_value`` remain.  Returns the selected
    values in decreasing order.
    """
    dates = np.asarray(dates, dtype="datetime64[D]").astype(np.int64)
    values = np.asarray(values, dtype=float)
    if dates.shape != values.shape:
        raise ValueError("dates and values must have equal length")
    eligible = values >= min_value
    order = np.lexsort((dates[eligible], -values[eligible]))
    cand_dates = dates[eligible][order]
    cand_values = values[eligible][order]
    blocked = set()
    out = []
    for d, v in zip(cand_dates, cand_values):
        if len(out) >= max_select:
            break
        if d in blocked:
            continue
        out.append(v)
        blocked.update((d - 1, d, d + 1))
    return np.array(out)


@dataclass(frozen=True)
class BlockPanel:
    """Declustered rainfall panel: one group per calendar block of years."""

    station_id: int
    station_name: str
    window: tuple            # (first_year, last_year)
    block_years: int
    s: np.ndarray            # time points j/m
    blocks: tuple            # declustered values per block, decreasing
    rain_days_per_block: tuple
    rain_days_total: int

    @property
    def m(self) -> int:
        return len(self.blocks) - 1

    def to_sample_panel(self) -> SamplePanel:
        return SamplePanel.from_groups(self.blocks, self.s)

    def to_dict(self) -> dict:
        return {
            "station_id": self.station_id,
            "station_name": self.station_name,
            "window": list(self.window),
            "block_years": self.block_years,
            "s": [float(x) for x in self.s],
            "blocks": [[float(v) for v in b] for b in self.blocks],
            "rain_days_per_block": list(self.rain_days_per_block),
            "rain_days_total": self.rain_days_total,
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_dict(cls, d: dict) -> "BlockPanel":
        return cls(
            station_id=int(d["station_id"]),
            station_name=str(d.get("station_name", "")),
            window=tuple(d["window"]),
            block_years=int(d["block_years"]),
            s=np.asarray(d["s"], dtype=float),
            blocks=tuple(np.asarray(b, dtype=float) for b in d["blocks"]),
            rain_days_per_block=tuple(int(x) for x in d["rain_days_per_block"]),
            rain_days_total=int(d["rain_days_total"]),
        )

    @classmethod
    def from_json(cls, text: str) -> "BlockPanel":
        return cls.from_dict(json.loads(text))


def build_panel(series: DailySeries, window: tuple, block_years: int = 5,
                max_select: int = 70, min_value: float = RAIN_DAY_MM) -> BlockPanel:
    """Split a series into calendar blocks, decluster each, count rain days.

    ``window`` spans whole years and must divide evenly into blocks of
    ``block_years``.  Declustering is applied independently per block (block
    boundaries fall on Jan 1 and adjacency removal never crosses them).
    """
    y0, y1 = int(window[0]), int(window[1])
    nyears = y1 - y0 + 1
    if nyears <= 0 or nyears % block_years != 0:
        raise ValueError(
            f"window {y0}-{y1} spans {nyears} years, not divisible into {block_years}-year blocks"
        )
    nblocks = nyears // block_years
    if nblocks < 2:
        raise ValueError("need at least two blocks to estimate a trend")
    m = nblocks - 1

    valid = series.valid
    years = series.years
    mm = series.rr_tenths / 10.0

    blocks = []
    rain_days = []
    for b in range(nblocks):
        lo, hi = y0 + b * block_years, y0 + (b + 1) * block_years - 1
        sel = valid & (years >= lo) & (years <= hi)
        vals = decluster(series.dates[sel], mm[sel], max_select=max_select, min_value=min_value)
        if vals.size < 2:
            raise DegenerateBlockError(
                f"block {b} ({lo}-{hi}) retained {vals.size} values; cannot form a group"
            )
        blocks.append(vals)
        rain_days.append(int((mm[sel] >= RAIN_DAY_MM).sum()))

    return BlockPanel(
        station_id=series.station_id,
        station_name=series.station_name,
        window=(y0, y1),
        block_years=block_years,
        s=np.arange(nblocks) / m,
        blocks=tuple(blocks),
        rain_days_per_block=tuple(rain_days),
        rain_days_total=sum(rain_days),
    )


def write_rain_day_table(panels, path, metadata: dict | None = None) -> None:
    """Write the per-station rain-day summary as CSV.

    ``metadata`` may map station ids to dicts with optional keys country, lat,
    lon; unknown fields are left empty.
    """
    metadata = metadata or {}
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["STN", "NAME", "COUNTRY", "LAT", "LON", "RAIN_DAYS"])
        for p in panels:
            meta = metadata.get(p.station_id, {})
            w.writerow([p.station_id, p.station_name, meta.get("country", ""),
                        meta.get("lat", ""), meta.get("lon", ""), p.rain_days_total])
