"""Scalar-content metrics around peaks and over hot-spots.

regional_aot averages the raw grid samples within a fixed radius of a peak
(the per-peak regional value). hotspot_average then averages those regional
values over a hot-spot's member peaks within one reporting period, and
temporal_delta compares two periods. Missing data is propagated as None,
never coerced to 0: averaging zeros into cloudy periods would bias the
result downward.
"""

import datetime as dt
from dataclasses import dataclass

import numpy as np

from .grid import ScalarGrid
from .hotspots import HotSpot
from .peaks import Peak

PERIOD_GRANULARITIES = ("year", "quarter", "month")


@dataclass(frozen=True)
class RegionalAverage:
    """Mean of valid samples within `radius` of a peak; m is the count."""

    peak: Peak
    radius: float
    m: int
    value: float | None


def regional_aot(peak: Peak, grid: ScalarGrid, radius: float = 0.05) -> RegionalAverage:
    """Average the valid cells whose centers lie within radius of the peak.

    The distance test is inclusive (<= radius). Cells masked missing are
    excluded from both the sum and the count; when nothing qualifies the
    result is a no-data RegionalAverage (value None, m 0), distinct from an
    average of 0. The caller is responsible for pairing the peak with the
    grid of the same date.
    """
    if radius <= 0:
        raise ValueError(f"radius must be > 0, got {radius}")
    lons, lats = grid.cell_centers()
    # window of candidate rows/cols, then exact distance test inside it
    c_lo = int(np.searchsorted(lons, peak.lon - radius, side="left"))
    c_hi = int(np.searchsorted(lons, peak.lon + radius, side="right"))
    lat_asc = lats[::-1]
    r_lo_asc = int(np.searchsorted(lat_asc, peak.lat - radius, side="left"))
    r_hi_asc = int(np.searchsorted(lat_asc, peak.lat + radius, side="right"))
    r_lo = grid.n_rows - r_hi_asc
    r_hi = grid.n_rows - r_lo_asc
    if c_lo >= c_hi or r_lo >= r_hi:
        return RegionalAverage(peak, radius, 0, None)

    sub_lon = lons[c_lo:c_hi]
    sub_lat = lats[r_lo:r_hi]
    dx = sub_lon[None, :] - peak.lon
    dy = sub_lat[:, None] - peak.lat
    within = (dx * dx + dy * dy) <= radius * radius
    valid = grid.mask[r_lo:r_hi, c_lo:c_hi] & within
    m = int(valid.sum())
    if m == 0:
        return RegionalAverage(peak, radius, 0, None)
    value = float(grid.values[r_lo:r_hi, c_lo:c_hi][valid].mean())
    return RegionalAverage(peak, radius, m, value)


def period_label(date: dt.date, granularity: str = "year") -> str:
    """Reporting-period label: '2017', '2017Q3' or '2017-07'."""
    if granularity == "year":
        return f"{date.year}"
    if granularity == "quarter":
        return f"{date.year}Q{(date.month - 1) // 3 + 1}"
    if granularity == "month":
        return f"{date.year}-{date.month:02d}"
    raise ValueError(f"granularity must be one of {PERIOD_GRANULARITIES}, got {granularity!r}")


def period_members(hotspot: HotSpot, period: str, granularity: str = "year") -> list[Peak]:
    """Member peaks inside the period that carry a regional value."""
    return [
        p for p in hotspot.member_peaks
        if p.regional_value is not None and period_label(p.date, granularity) == period
    ]


def hotspot_average(hotspot: HotSpot, period: str, granularity: str = "year") -> float | None:
    """Unweighted mean of member peaks' regional values within the period.

    Peaks without a regional value (no-data regions) are excluded; None when
    no member qualifies.
    """
    members = period_members(hotspot, period, granularity)
    if not members:
        return None
    # summation over sorted values so member ordering can never move the
    # result by an ulp
    return float(np.mean(sorted(p.regional_value for p in members)))


def temporal_delta(hotspot: HotSpot, period_a: str, period_b: str,
                   granularity: str = "year") -> float | None:
    """hotspot_average(period_b) - hotspot_average(period_a); None if either
    period has no data. Positive means an increase from a to b."""
    a = hotspot_average(hotspot, period_a, granularity)
    b = hotspot_average(hotspot, period_b, granularity)
    if a is None or b is None:
        return None
    return b - a
