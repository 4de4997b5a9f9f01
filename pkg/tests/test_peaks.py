"""Per-day peak extraction: single-linkage clustering of converged worms."""

import datetime as dt

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from shapely.geometry import MultiPoint, Point

from aotspot import SwarmState, extract_peaks
from aotspot.linkage import link_components

DAY = dt.date(2017, 6, 1)


def swarm_at(points):
    pts = np.asarray(points, dtype=np.float64)
    n = len(pts)
    return SwarmState(pts, np.ones(n), np.full(n, 0.2), 200, (0.0, 1.0, 0.0, 1.0))


def ring(center, n, radius=0.002, seed=0):
    ang = np.linspace(0.0, 2 * np.pi, n, endpoint=False)
    rng = np.random.default_rng(seed)
    r = radius * (0.5 + 0.5 * rng.random(n))
    return np.column_stack([center[0] + r * np.cos(ang), center[1] + r * np.sin(ang)])


def test_all_worms_at_one_point_single_peak():
    state = swarm_at([[0.5, 0.5]] * 10)
    peaks = extract_peaks(state, DAY, link_radius=0.03, min_support=3)
    assert len(peaks) == 1
    assert (peaks[0].lon, peaks[0].lat) == (0.5, 0.5)
    assert peaks[0].support == 10
    assert peaks[0].date == DAY
    assert peaks[0].regional_value is None


def test_two_clumps_give_two_peaks_at_their_centroids():
    a = ring((0.2, 0.2), 50, seed=1)
    b = ring((0.7, 0.7), 50, seed=2)
    state = swarm_at(np.vstack([a, b]))
    peaks = extract_peaks(state, DAY, link_radius=0.05, min_support=3)
    assert len(peaks) == 2
    got = sorted((p.lon, p.lat) for p in peaks)
    for (lon, lat), clump in zip(got, (a, b)):
        assert lon == pytest.approx(clump[:, 0].mean(), abs=1e-15)
        assert lat == pytest.approx(clump[:, 1].mean(), abs=1e-15)
    assert all(p.support == 50 for p in peaks)


def test_strays_below_min_support_are_dropped():
    state = swarm_at([[0.1, 0.1], [0.9, 0.9]])
    assert extract_peaks(state, DAY, link_radius=0.03, min_support=3) == []


def test_clump_with_strays_keeps_only_the_clump():
    pts = np.vstack([ring((0.5, 0.5), 20), [[0.05, 0.05], [0.95, 0.95]]])
    peaks = extract_peaks(swarm_at(pts), DAY, link_radius=0.03, min_support=3)
    assert len(peaks) == 1
    assert peaks[0].support == 20


def test_chain_links_into_one_component():
    # consecutive points 0.02 apart spanning 0.08: single-linkage chains
    pts = [[0.5 + 0.02 * k, 0.5] for k in range(5)]
    peaks = extract_peaks(swarm_at(pts), DAY, link_radius=0.025, min_support=3)
    assert len(peaks) == 1
    assert peaks[0].support == 5


def test_output_ordering_support_then_lon_then_lat():
    clumps = [
        ring((0.8, 0.2), 5, seed=3),
        ring((0.2, 0.2), 5, seed=4),
        ring((0.5, 0.5), 7, seed=5),
    ]
    peaks = extract_peaks(swarm_at(np.vstack(clumps)), DAY,
                          link_radius=0.05, min_support=3)
    assert [p.support for p in peaks] == [7, 5, 5]
    assert peaks[1].lon < peaks[2].lon   # equal support ordered west to east


def test_argument_validation():
    state = swarm_at([[0.5, 0.5]])
    with pytest.raises(ValueError):
        extract_peaks(state, DAY, link_radius=0.0, min_support=3)
    with pytest.raises(ValueError):
        extract_peaks(state, DAY, link_radius=0.03, min_support=0)


def test_link_components_labels_are_dense_and_consistent():
    pts = np.array([[0.0, 0.0], [0.01, 0.0], [0.5, 0.5], [0.52, 0.5], [0.9, 0.9]])
    labels = link_components(pts, 0.03)
    assert labels[0] == labels[1]
    assert labels[2] == labels[3]
    assert len({labels[0], labels[2], labels[4]}) == 3
    assert sorted(set(labels)) == [0, 1, 2]


@st.composite
def point_cloud(draw):
    seed = draw(st.integers(0, 2**31 - 1))
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 40))
    pts = rng.uniform(0.0, 1.0, (n, 2))
    radius = float(rng.uniform(0.01, 0.3))
    return pts, radius


@given(point_cloud())
@settings(max_examples=200, deadline=None)
def test_components_partition_the_swarm(cloud):
    pts, radius = cloud
    labels = link_components(pts, radius)
    n = len(pts)
    assert len(labels) == n
    k = labels.max() + 1
    assert sorted(set(labels.tolist())) == list(range(k))
    # linked pairs always share a component
    d = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=2)
    close = np.argwhere((d <= radius) & (d > 0))
    for i, j in close:
        assert labels[i] == labels[j]
    sizes = np.bincount(labels)
    assert sizes.sum() == n


@given(point_cloud())
@settings(max_examples=200, deadline=None)
def test_peak_centroids_lie_in_member_hulls(cloud):
    pts, radius = cloud
    labels = link_components(pts, radius)
    peaks = extract_peaks(swarm_at(pts), DAY, link_radius=radius, min_support=1)
    assert len(peaks) == labels.max() + 1
    for p in peaks:
        members = None
        for lbl in range(labels.max() + 1):
            group = pts[labels == lbl]
            if (abs(group[:, 0].mean() - p.lon) <= 1e-12
                    and abs(group[:, 1].mean() - p.lat) <= 1e-12):
                members = group
                break
        assert members is not None
        hull = MultiPoint(members.tolist()).convex_hull.buffer(1e-9)
        assert hull.covers(Point(p.lon, p.lat))
        assert p.support == len(members)


@given(point_cloud())
@settings(max_examples=200, deadline=None)
def test_growing_link_radius_never_splits_components(cloud):
    pts, radius = cloud
    small = link_components(pts, radius).max() + 1
    big = link_components(pts, radius * 1.7).max() + 1
    assert big <= small
