"""Pooling peaks across days into recurring hot-spots, plus region naming."""

import datetime as dt
import json
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aotspot import Peak, assign_names, form_hotspots
from aotspot.hotspots import RegionParseError, load_regions


def pk(lon, lat, day, support=5, rv=None, year=2017):
    return Peak(date=dt.date(year, 1, day), lon=lon, lat=lat,
                support=support, regional_value=rv)


def test_recurring_site_forms_one_hotspot():
    peaks = [pk(0.5, 0.5, d) for d in range(1, 11)]
    spots = form_hotspots(peaks, hotspot_radius=0.05, min_days=5)
    assert len(spots) == 1
    h = spots[0]
    assert h.id == 1
    assert len(h.member_peaks) == 10
    assert h.n_days == 10
    assert h.centroid == (0.5, 0.5)
    assert h.name == ""


def test_single_day_site_is_transient():
    assert form_hotspots([pk(0.5, 0.5, 1)], 0.05, min_days=5) == []


def test_min_days_counts_distinct_dates_not_peaks():
    # six peaks but only three distinct days
    peaks = [pk(0.5 + 0.001 * k, 0.5, 1 + k % 3) for k in range(6)]
    assert form_hotspots(peaks, 0.05, min_days=5) == []
    spots = form_hotspots(peaks, 0.05, min_days=3)
    assert len(spots) == 1
    assert spots[0].n_days == 3
    assert len(spots[0].member_peaks) == 6


def test_separated_sites_stay_distinct():
    peaks = [pk(0.2, 0.2, d) for d in range(1, 7)]
    peaks += [pk(1.2, 0.2, d) for d in range(1, 7)]
    spots = form_hotspots(peaks, hotspot_radius=0.1, min_days=5)
    assert len(spots) == 2
    assert sorted(h.centroid[0] for h in spots) == pytest.approx([0.2, 1.2], abs=1e-12)


def test_empty_input_is_empty_output():
    assert form_hotspots([], 0.05, 5) == []


def test_numbering_by_descending_total_support():
    light = [pk(0.2, 0.2, d, support=3) for d in range(1, 7)]
    heavy = [pk(0.8, 0.8, d, support=9) for d in range(1, 7)]
    spots = form_hotspots(light + heavy, 0.05, min_days=5)
    assert [h.id for h in spots] == [1, 2]
    assert spots[0].centroid == pytest.approx((0.8, 0.8), abs=1e-12)   # 54 beats 18
    assert spots[0].total_support == 54


def test_equal_support_ties_break_west_to_east():
    a = [pk(0.7, 0.2, d, support=4) for d in range(1, 7)]
    b = [pk(0.1, 0.2, d, support=4) for d in range(1, 7)]
    spots = form_hotspots(a + b, 0.05, min_days=5)
    assert spots[0].centroid[0] == pytest.approx(0.1, abs=1e-12)
    assert spots[1].centroid[0] == pytest.approx(0.7, abs=1e-12)


def test_input_order_never_changes_labeling():
    rng = random.Random(3)
    base = [pk(0.2, 0.2, d, support=3 + d % 2) for d in range(1, 9)]
    base += [pk(0.8, 0.6, d, support=5) for d in range(1, 7)]
    base += [pk(0.5, 0.9, d, support=2) for d in range(1, 12)]
    expected = {h.id: (h.centroid, len(h.member_peaks))
                for h in form_hotspots(list(base), 0.05, 5)}
    for _ in range(5):
        shuffled = list(base)
        rng.shuffle(shuffled)
        got = {h.id: (h.centroid, len(h.member_peaks))
               for h in form_hotspots(shuffled, 0.05, 5)}
        assert got == expected


def test_chain_connectivity_merges_sites():
    # three sites 0.04 apart pairwise chain into one hotspot at radius 0.05
    peaks = [pk(0.5 + 0.04 * k, 0.5, d) for k in range(3) for d in range(1, 6)]
    spots = form_hotspots(peaks, hotspot_radius=0.05, min_days=5)
    assert len(spots) == 1
    assert len(spots[0].member_peaks) == 15


def _regions_file(tmp_path, features):
    doc = {"type": "FeatureCollection", "features": features}
    p = tmp_path / "regions.geojson"
    p.write_text(json.dumps(doc), encoding="utf-8")
    return p


def _poly_feature(name, lon0, lat0, size):
    ring = [[lon0, lat0], [lon0 + size, lat0], [lon0 + size, lat0 + size],
            [lon0, lat0 + size], [lon0, lat0]]
    return {"type": "Feature", "properties": {"name": name},
            "geometry": {"type": "Polygon", "coordinates": [ring]}}


def test_assign_names_inside_polygon(tmp_path):
    regions = _regions_file(tmp_path, [_poly_feature("downtown", 0.4, 0.4, 0.2)])
    spots = form_hotspots([pk(0.5, 0.5, d) for d in range(1, 6)], 0.05, 5)
    assign_names(spots, regions)
    assert spots[0].name == "downtown"


def test_assign_names_outside_all_polygons(tmp_path):
    regions = _regions_file(tmp_path, [_poly_feature("downtown", 0.0, 0.0, 0.1)])
    spots = form_hotspots([pk(0.5, 0.5, d) for d in range(1, 6)], 0.05, 5)
    assign_names(spots, regions)
    assert spots[0].name == ""


def test_assign_names_without_file_leaves_names_empty():
    spots = form_hotspots([pk(0.5, 0.5, d) for d in range(1, 6)], 0.05, 5)
    assign_names(spots, None)
    assert spots[0].name == ""


def test_overlapping_polygons_resolve_to_smallest(tmp_path):
    regions = _regions_file(tmp_path, [
        _poly_feature("district", 0.0, 0.0, 1.0),
        _poly_feature("block", 0.45, 0.45, 0.1),
    ])
    spots = form_hotspots([pk(0.5, 0.5, d) for d in range(1, 6)], 0.05, 5)
    assign_names(spots, regions)
    assert spots[0].name == "block"


def test_centroid_on_polygon_boundary_is_covered(tmp_path):
    regions = _regions_file(tmp_path, [_poly_feature("edge", 0.5, 0.4, 0.2)])
    spots = form_hotspots([pk(0.5, 0.5, d) for d in range(1, 6)], 0.05, 5)
    assign_names(spots, regions)
    assert spots[0].name == "edge"


def test_multipolygon_regions_supported(tmp_path):
    feature = {
        "type": "Feature", "properties": {"name": "twin"},
        "geometry": {"type": "MultiPolygon", "coordinates": [
            [[[0.0, 0.0], [0.1, 0.0], [0.1, 0.1], [0.0, 0.1], [0.0, 0.0]]],
            [[[0.4, 0.4], [0.6, 0.4], [0.6, 0.6], [0.4, 0.6], [0.4, 0.4]]],
        ]},
    }
    regions = _regions_file(tmp_path, [feature])
    spots = form_hotspots([pk(0.5, 0.5, d) for d in range(1, 6)], 0.05, 5)
    assign_names(spots, regions)
    assert spots[0].name == "twin"


def test_malformed_region_file_raises(tmp_path):
    p = tmp_path / "bad.geojson"
    p.write_text('{"type": "FeatureCollection"}', encoding="utf-8")
    with pytest.raises(RegionParseError):
        load_regions(p)
    p.write_text("not json at all", encoding="utf-8")
    with pytest.raises(RegionParseError):
        load_regions(p)


def test_region_feature_without_name_raises(tmp_path):
    feature = _poly_feature("x", 0, 0, 1)
    del feature["properties"]["name"]
    p = _regions_file(tmp_path, [feature])
    with pytest.raises(RegionParseError):
        load_regions(p)


@given(
    n_sites=st.integers(1, 5),
    n_days=st.integers(5, 12),
    seed=st.integers(0, 2**31 - 1),
)
@settings(max_examples=150, deadline=None)
def test_fixed_sites_yield_exactly_that_many_hotspots(n_sites, n_days, seed):
    rng = np.random.default_rng(seed)
    sites = [(0.5 + 0.5 * k, 0.5) for k in range(n_sites)]   # 0.5 degrees apart
    peaks = []
    for day in range(1, n_days + 1):
        for lon, lat in sites:
            jitter = rng.uniform(-0.01, 0.01, 2)
            peaks.append(pk(lon + jitter[0], lat + jitter[1], day,
                            support=int(rng.integers(3, 12))))
    spots = form_hotspots(peaks, hotspot_radius=0.05, min_days=5)
    assert len(spots) == n_sites
    for h in spots:
        assert h.n_days == n_days
        assert len(h.member_peaks) == n_days
        # every emitted hotspot spans at least min_days distinct dates
        assert len({p.date for p in h.member_peaks}) >= 5
