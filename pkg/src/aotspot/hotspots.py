"""Pooling peaks across days into recurring hot-spots.

Peaks from every day of the analysis are pooled spatially (single linkage
at hotspot_radius) and a cluster is promoted to a HotSpot only when its
member peaks span enough distinct dates. That recurrence filter separates
persistent sources from one-off retrieval artifacts. Optional user-supplied
region polygons give hot-spots human names.
"""

import json
from dataclasses import dataclass, field

import numpy as np
from shapely.geometry import Point, shape

from .linkage import link_components
from .peaks import Peak


class RegionParseError(Exception):
    """Region polygon file is not the expected GeoJSON structure."""


@dataclass
class HotSpot:
    """A labeled group of peaks recurring across days."""

    id: int
    member_peaks: list[Peak]
    centroid: tuple[float, float]
    name: str = ""
    per_period_avg: dict[str, float] = field(default_factory=dict)

    @property
    def n_days(self) -> int:
        return len({p.date for p in self.member_peaks})

    @property
    def total_support(self) -> int:
        return sum(p.support for p in self.member_peaks)


def form_hotspots(peaks: list[Peak], hotspot_radius: float = 0.05,
                  min_days: int = 5) -> list[HotSpot]:
    """Cluster pooled peak locations; keep clusters spanning >= min_days.

    Hot-spots are numbered 1..k by descending total support (sum of member
    supports), ties broken by centroid longitude then latitude ascending,
    so identical peak sets always produce identical labels.
    """
    if hotspot_radius <= 0:
        raise ValueError(f"hotspot_radius must be > 0, got {hotspot_radius}")
    if min_days < 1:
        raise ValueError(f"min_days must be >= 1, got {min_days}")
    if not peaks:
        return []
    pts = np.array([[p.lon, p.lat] for p in peaks])
    labels = link_components(pts, hotspot_radius)
    clusters: list[list[Peak]] = [[] for _ in range(labels.max() + 1)]
    for p, label in zip(peaks, labels):
        clusters[label].append(p)

    spots = []
    for members in clusters:
        if len({p.date for p in members}) < min_days:
            continue
        # canonical member order: peak-set identity, not input order, decides
        # every downstream byte (centroid summation, CSV rows, averages)
        members.sort(key=lambda p: (p.date, p.lon, p.lat, p.support))
        lon = float(np.mean([p.lon for p in members]))
        lat = float(np.mean([p.lat for p in members]))
        spots.append(HotSpot(id=0, member_peaks=members, centroid=(lon, lat)))
    spots.sort(key=lambda h: (-h.total_support, h.centroid[0], h.centroid[1]))
    for i, h in enumerate(spots, start=1):
        h.id = i
    return spots


def load_regions(path) -> list[tuple[str, object]]:
    """Parse a GeoJSON FeatureCollection of named Polygons."""
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as e:
        raise RegionParseError(f"region file is not valid JSON: {e}") from None
    if not isinstance(doc, dict) or doc.get("type") != "FeatureCollection":
        raise RegionParseError("region file must be a GeoJSON FeatureCollection")
    if not isinstance(doc.get("features"), list):
        raise RegionParseError("FeatureCollection is missing its 'features' array")
    regions = []
    for i, feat in enumerate(doc["features"]):
        try:
            name = feat["properties"]["name"]
            geom = shape(feat["geometry"])
        except (KeyError, TypeError, AttributeError, ValueError) as e:
            raise RegionParseError(f"feature {i}: {e!r}") from None
        if geom.geom_type not in ("Polygon", "MultiPolygon"):
            raise RegionParseError(f"feature {i}: geometry must be Polygon, got {geom.geom_type}")
        regions.append((str(name), geom))
    return regions


def assign_names(hotspots: list[HotSpot], regions_path=None) -> list[HotSpot]:
    """Name each hot-spot by the region polygon containing its centroid.

    Containment includes the boundary. When polygons overlap, the smallest
    area wins; a centroid outside every polygon keeps an empty name. No
    polygon file means all names stay empty.
    """
    if regions_path is None:
        return hotspots
    regions = load_regions(regions_path)
    for h in hotspots:
        pt = Point(h.centroid)
        containing = [(geom.area, name) for name, geom in regions if geom.covers(pt)]
        if containing:
            containing.sort()  # area, then name for exact-area ties
            h.name = containing[0][1]
    return hotspots
