"""Per-day peak extraction from a converged swarm.

After the optimizer runs, glowworms pile up around the field's local
maxima. Single-linkage clustering of the final positions turns those piles
into Peak records: the cluster centroid is the reported location, the
cluster size its support. Small components (strays that never joined a
pile) are dropped by the support threshold.
"""

import datetime as dt
from dataclasses import dataclass

import numpy as np

from .gso import SwarmState
from .linkage import link_components


@dataclass
class Peak:
    """One local-maximum location for one day."""

    date: dt.date
    lon: float
    lat: float
    support: int
    regional_value: float | None = None


def extract_peaks(state: SwarmState, date: dt.date, link_radius: float = 0.03,
                  min_support: int = 3) -> list[Peak]:
    """Cluster final worm positions into peaks.

    Two worms are linked when within link_radius of each other; connected
    components with at least min_support members become Peaks at the mean
    member position. Output is sorted by support descending, ties by
    longitude then latitude ascending, so downstream files are byte-stable.
    """
    if link_radius <= 0:
        raise ValueError(f"link_radius must be > 0, got {link_radius}")
    if min_support < 1:
        raise ValueError(f"min_support must be >= 1, got {min_support}")
    labels = link_components(state.positions, link_radius)
    peaks = []
    for label in range(labels.max() + 1 if len(labels) else 0):
        members = state.positions[labels == label]
        if len(members) < min_support:
            continue
        lon, lat = members.mean(axis=0)
        peaks.append(Peak(date=date, lon=float(lon), lat=float(lat), support=len(members)))
    peaks.sort(key=lambda p: (-p.support, p.lon, p.lat))
    return peaks
