"""Result serialization: CSV, GeoJSON, deterministic SVG, run manifest.

Everything written here is byte-stable: float fields use repr() (shortest
round-trip form), CSV rows use plain \\n endings, JSON keys are sorted, and
the SVG emitter formats pixel coordinates with a fixed precision. Identical
results always serialize to identical bytes.
"""

import csv
import json
from dataclasses import dataclass

from .hotspots import HotSpot
from .peaks import Peak
from .quantify import RegionalAverage

LAYERS = ("peaks-by-hotspot-color", "peaks-by-regional-value", "hotspot-centroids")

# 11-class qualitative palette: hotspot id k keeps color PALETTE[(k-1) % 11]
# across runs and across renders
PALETTE = (
    "#e6194b", "#3cb44b", "#ffe119", "#4363d8", "#f58231", "#911eb4",
    "#46f0f0", "#f032e6", "#bcf60c", "#9a6324", "#008080",
)

# continuous ramp stops for value coloring (dark blue -> yellow)
_RAMP = ((68, 1, 84), (59, 82, 139), (33, 145, 140), (94, 201, 98), (253, 231, 37))


@dataclass(frozen=True)
class RenderSpec:
    """What to draw: a lon/lat box projected onto a pixel box, one layer."""

    bounds: tuple[float, float, float, float]  # lon_min, lon_max, lat_min, lat_max
    width: int = 800
    height: int = 800
    layer: str = "peaks-by-hotspot-color"
    color_map: str = "default"

    def __post_init__(self):
        lon_min, lon_max, lat_min, lat_max = self.bounds
        if not (lon_min < lon_max and lat_min < lat_max):
            raise ValueError(f"degenerate render bounds {self.bounds}")
        if self.width < 64 or self.height < 64:
            raise ValueError(f"width and height must be >= 64, got {self.width}x{self.height}")
        if self.layer not in LAYERS:
            raise ValueError(f"layer must be one of {LAYERS}, got {self.layer!r}")


def project(spec: RenderSpec, lon: float, lat: float) -> tuple[float, float]:
    """Equirectangular affine map of bounds onto the pixel box.

    Corners map to pixel corners exactly; y grows downward (north at top).
    """
    lon_min, lon_max, lat_min, lat_max = spec.bounds
    x = (lon - lon_min) / (lon_max - lon_min) * spec.width
    y = (lat_max - lat) / (lat_max - lat_min) * spec.height
    return x, y


def hotspot_color(hotspot_id: int) -> str:
    return PALETTE[(hotspot_id - 1) % len(PALETTE)]


def ramp_color(t: float) -> str:
    """Linear interpolation along the ramp stops, t clamped to [0, 1]."""
    t = min(max(t, 0.0), 1.0)
    seg = t * (len(_RAMP) - 1)
    i = min(int(seg), len(_RAMP) - 2)
    f = seg - i
    rgb = tuple(round(a + (b - a) * f) for a, b in zip(_RAMP[i], _RAMP[i + 1]))
    return "#{:02x}{:02x}{:02x}".format(*rgb)


def peak_assignment(hotspots: list[HotSpot]) -> dict[int, int]:
    """Map id(peak) -> hotspot id for membership lookups."""
    out: dict[int, int] = {}
    for h in hotspots:
        for p in h.member_peaks:
            out[id(p)] = h.id
    return out


def _xml_escape(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def render_svg(spec: RenderSpec, peaks: list[Peak], hotspots: list[HotSpot], path) -> None:
    """Deterministic SVG scatter of peaks and/or hot-spot centroids.

    Peaks outside the render bounds are omitted. Unassigned peaks (no
    hot-spot) draw in black. A legend block lists hotspot ids/names, or the
    value ramp for the regional-value layer.
    """
    assignment = peak_assignment(hotspots)
    lon_min, lon_max, lat_min, lat_max = spec.bounds

    def visible(lon, lat):
        return lon_min <= lon <= lon_max and lat_min <= lat <= lat_max

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{spec.width}" '
        f'height="{spec.height}" viewBox="0 0 {spec.width} {spec.height}">',
        f'<rect width="{spec.width}" height="{spec.height}" fill="#ffffff"/>',
    ]

    legend: list[str] = []
    if spec.layer == "peaks-by-regional-value":
        finite = [p.regional_value for p in peaks if p.regional_value is not None]
        vmin = min(finite) if finite else 0.0
        vmax = max(finite) if finite else 1.0
        parts.append('<g stroke="none">')
        for p in peaks:
            if not visible(p.lon, p.lat):
                continue
            x, y = project(spec, p.lon, p.lat)
            if p.regional_value is None:
                fill = "#000000"
            elif vmax > vmin:
                fill = ramp_color((p.regional_value - vmin) / (vmax - vmin))
            else:
                fill = ramp_color(0.5)
            parts.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="3" fill="{fill}"/>')
        parts.append("</g>")
        # ramp legend: 32 swatches plus end labels
        for k in range(32):
            color = ramp_color(k / 31.0)
            legend.append(
                f'<rect x="{8 + k * 4}" y="8" width="4" height="10" fill="{color}"/>'
            )
        legend.append(
            f'<text x="8" y="30" font-family="sans-serif" font-size="11">{vmin!r}</text>'
        )
        legend.append(
            f'<text x="{8 + 32 * 4}" y="30" font-family="sans-serif" font-size="11" '
            f'text-anchor="end">{vmax!r}</text>'
        )
    elif spec.layer == "peaks-by-hotspot-color":
        parts.append('<g stroke="none">')
        for p in peaks:
            if not visible(p.lon, p.lat):
                continue
            x, y = project(spec, p.lon, p.lat)
            hid = assignment.get(id(p))
            fill = hotspot_color(hid) if hid is not None else "#000000"
            parts.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="3" fill="{fill}"/>')
        parts.append("</g>")
        for i, h in enumerate(hotspots):
            label = f"{h.id} {h.name}".rstrip()
            legend.append(
                f'<rect x="8" y="{8 + i * 16}" width="10" height="10" '
                f'fill="{hotspot_color(h.id)}"/>'
            )
            legend.append(
                f'<text x="22" y="{17 + i * 16}" font-family="sans-serif" '
                f'font-size="11">{_xml_escape(label)}</text>'
            )
    else:  # hotspot-centroids
        parts.append('<g stroke="#000000" stroke-width="1">')
        for h in hotspots:
            lon, lat = h.centroid
            if not visible(lon, lat):
                continue
            x, y = project(spec, lon, lat)
            parts.append(
                f'<circle cx="{x:.2f}" cy="{y:.2f}" r="5" fill="{hotspot_color(h.id)}"/>'
            )
            parts.append(
                f'<text x="{x + 7:.2f}" y="{y + 4:.2f}" font-family="sans-serif" '
                f'font-size="11" stroke="none">{h.id}</text>'
            )
        parts.append("</g>")
        for i, h in enumerate(hotspots):
            label = f"{h.id} {h.name}".rstrip()
            legend.append(
                f'<rect x="8" y="{8 + i * 16}" width="10" height="10" '
                f'fill="{hotspot_color(h.id)}"/>'
            )
            legend.append(
                f'<text x="22" y="{17 + i * 16}" font-family="sans-serif" '
                f'font-size="11">{_xml_escape(label)}</text>'
            )

    parts.append('<g id="legend">')
    parts.extend(legend)
    parts.append("</g>")
    parts.append("</svg>")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(parts) + "\n")


def write_geojson(hotspots: list[HotSpot], peaks: list[Peak], path) -> None:
    """FeatureCollection of peak Points plus hot-spot centroid Points.

    Peak features carry date/support/regional_value and their hotspot_id
    (null when the peak belongs to no hot-spot); centroid features carry
    id/name/member counts and the per-period averages. Feature order is
    peaks (caller order) then centroids by id.
    """
    assignment = peak_assignment(hotspots)
    features = []
    for p in peaks:
        features.append({
            "type": "Feature",
            "geometry": {"type": "Point", "coordinates": [p.lon, p.lat]},
            "properties": {
                "kind": "peak",
                "date": p.date.isoformat(),
                "support": p.support,
                "regional_value": p.regional_value,
                "hotspot_id": assignment.get(id(p)),
            },
        })
    for h in hotspots:
        features.append({
            "type": "Feature",
            "geometry": {"type": "Point", "coordinates": [h.centroid[0], h.centroid[1]]},
            "properties": {
                "kind": "hotspot",
                "id": h.id,
                "name": h.name,
                "n_peaks": len(h.member_peaks),
                "n_days": h.n_days,
                "per_period_avg": h.per_period_avg,
            },
        })
    doc = {"type": "FeatureCollection", "features": features}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(float(v))  # plain float repr even for numpy scalars
    return str(v)


def _csv_writer(fh):
    return csv.writer(fh, lineterminator="\n")


def write_peaks_csv(peaks: list[Peak], path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = _csv_writer(fh)
        w.writerow(["date", "lon", "lat", "support", "regional_value"])
        for p in peaks:
            w.writerow([p.date.isoformat(), _fmt(p.lon), _fmt(p.lat),
                        p.support, _fmt(p.regional_value)])


def write_hotspots_csv(hotspots: list[HotSpot], path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = _csv_writer(fh)
        w.writerow(["id", "name", "centroid_lon", "centroid_lat", "n_peaks", "n_days"])
        for h in hotspots:
            w.writerow([h.id, h.name, _fmt(h.centroid[0]), _fmt(h.centroid[1]),
                        len(h.member_peaks), h.n_days])


def write_quantification_csv(rows: list[tuple[int, str, float | None, int]], path) -> None:
    """Rows are (hotspot_id, period, avg_value, n_peaks)."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = _csv_writer(fh)
        w.writerow(["hotspot_id", "period", "avg_value", "n_peaks"])
        for hid, period, avg, n in rows:
            w.writerow([hid, period, _fmt(avg), n])


def write_peak_regional_csv(regionals: list[RegionalAverage], path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = _csv_writer(fh)
        w.writerow(["date", "lon", "lat", "regional_value", "m"])
        for ra in regionals:
            w.writerow([ra.peak.date.isoformat(), _fmt(ra.peak.lon), _fmt(ra.peak.lat),
                        _fmt(ra.value), ra.m])


def write_trace_csv(history, path) -> None:
    """One row per worm per recorded iteration (iteration 0 = initial)."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = _csv_writer(fh)
        w.writerow(["iteration", "worm_id", "lon", "lat", "luciferin", "range"])
        for state in history:
            for i in range(len(state.positions)):
                w.writerow([
                    state.iteration, i,
                    repr(float(state.positions[i, 0])), repr(float(state.positions[i, 1])),
                    repr(float(state.luciferin[i])), repr(float(state.ranges[i])),
                ])


def write_manifest(payload: dict, path) -> None:
    """Run manifest: config hash, seed, per-day peak counts. No timestamps,
    so whole output directories stay byte-comparable."""
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
