"""Grid loading, serialization, and masked bilinear interpolation."""

import datetime as dt

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aotspot import (
    EmptyGridError,
    GridDomainError,
    GridError,
    GridGeometry,
    GridParseError,
    ScalarGrid,
    load_grid,
    value_at,
    values_at,
    write_dense_grid,
)
from conftest import make_grid

DENSE_2X2 = """\
ncols 2
nrows 2
lonmin 0.0
lonmax 1.0
latmin 0.0
latmax 1.0
missing -9999.0
date 2017-03-05
0.1 0.2
0.3 0.4
"""


def _write(tmp_path, text, name="grid.txt"):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return p


def test_dense_parse_round_trip_values(tmp_path):
    grid = load_grid(_write(tmp_path, DENSE_2X2), "dense-grid")
    assert grid.n_cols == 2 and grid.n_rows == 2
    assert grid.mask.all()
    assert grid.mask.sum() == 4
    np.testing.assert_array_equal(grid.values, [[0.1, 0.2], [0.3, 0.4]])
    assert grid.date == dt.date(2017, 3, 5)
    assert (grid.lon_min, grid.lon_max, grid.lat_min, grid.lat_max) == (0.0, 1.0, 0.0, 1.0)


def test_dense_sentinel_marks_missing(tmp_path):
    text = DENSE_2X2.replace("0.3 0.4", "-9999.0 0.4")
    grid = load_grid(_write(tmp_path, text), "dense-grid")
    assert not grid.mask[1, 0]
    assert grid.mask.sum() == 3


def test_dense_all_sentinel_is_empty_grid_error(tmp_path):
    text = DENSE_2X2.replace("0.1 0.2", "-9999.0 -9999.0").replace(
        "0.3 0.4", "-9999.0 -9999.0")
    with pytest.raises(EmptyGridError):
        load_grid(_write(tmp_path, text), "dense-grid")


def test_dense_header_typo_reports_line(tmp_path):
    text = DENSE_2X2.replace("latmin 0.0", "latmni 0.0")
    with pytest.raises(GridParseError) as exc:
        load_grid(_write(tmp_path, text), "dense-grid")
    assert exc.value.line == 5


def test_dense_short_row_reports_line(tmp_path):
    text = DENSE_2X2.replace("0.3 0.4", "0.3")
    with pytest.raises(GridParseError) as exc:
        load_grid(_write(tmp_path, text), "dense-grid")
    assert exc.value.line == 10


def test_dense_non_numeric_cell_reports_line(tmp_path):
    text = DENSE_2X2.replace("0.1 0.2", "0.1 oops")
    with pytest.raises(GridParseError) as exc:
        load_grid(_write(tmp_path, text), "dense-grid")
    assert exc.value.line == 9


def test_dense_bad_date_reports_line(tmp_path):
    text = DENSE_2X2.replace("date 2017-03-05", "date 2017-13-05")
    with pytest.raises(GridParseError) as exc:
        load_grid(_write(tmp_path, text), "dense-grid")
    assert exc.value.line == 8


def test_dense_negative_value_is_domain_error(tmp_path):
    text = DENSE_2X2.replace("0.3 0.4", "-0.3 0.4")
    with pytest.raises(GridDomainError):
        load_grid(_write(tmp_path, text), "dense-grid")


def test_unknown_format_rejected(tmp_path):
    with pytest.raises(GridError):
        load_grid(_write(tmp_path, DENSE_2X2), "netcdf")


def test_dense_write_then_load_bit_identical(tmp_path):
    grid = make_grid([[0.1, 0.2, None], [1e-17, 123456.789, 0.30000000000000004]])
    p = tmp_path / "g.txt"
    write_dense_grid(grid, p)
    back = load_grid(p, "dense-grid")
    np.testing.assert_array_equal(back.mask, grid.mask)
    np.testing.assert_array_equal(back.values[back.mask], grid.values[grid.mask])
    assert back.date == grid.date
    # writing the reloaded grid reproduces the file byte for byte
    p2 = tmp_path / "g2.txt"
    write_dense_grid(back, p2)
    assert p.read_bytes() == p2.read_bytes()


def test_grid_arrays_are_frozen_copies():
    vals = np.array([[0.5, 0.5]])
    mask = np.array([[True, True]])
    grid = ScalarGrid(0.0, 1.0, 0.0, 1.0, 2, 1, vals, mask, dt.date(2017, 1, 1))
    with pytest.raises(ValueError):
        grid.values[0, 0] = 9.0
    vals[0, 0] = 9.0  # caller's array stays writable; the grid keeps a copy
    assert grid.values[0, 0] == 0.5


def test_point_list_bins_and_averages_duplicates(tmp_path):
    geom = GridGeometry(0.0, 1.0, 0.0, 1.0, 2, 2)
    text = (
        "date,lon,lat,value\n"
        "2017-03-05,0.2,0.8,0.2\n"
        "2017-03-05,0.3,0.7,0.4\n"
        "2017-03-05,0.8,0.2,0.9\n"
    )
    grid = load_grid(_write(tmp_path, text, "pts.csv"), "point-list", geom)
    assert grid.values[0, 0] == pytest.approx(0.3)  # mean of the two co-binned points
    assert grid.values[1, 1] == 0.9
    assert grid.mask.sum() == 2
    assert grid.date == dt.date(2017, 3, 5)


def test_point_list_requires_geometry(tmp_path):
    p = _write(tmp_path, "date,lon,lat,value\n2017-01-01,0.5,0.5,0.1\n", "pts.csv")
    with pytest.raises(GridError):
        load_grid(p, "point-list")


def test_point_list_mixed_dates_rejected(tmp_path):
    geom = GridGeometry(0.0, 1.0, 0.0, 1.0, 2, 2)
    text = "date,lon,lat,value\n2017-01-01,0.5,0.5,0.1\n2017-01-02,0.6,0.6,0.1\n"
    with pytest.raises(GridParseError) as exc:
        load_grid(_write(tmp_path, text, "pts.csv"), "point-list", geom)
    assert exc.value.line == 3


def test_point_list_out_of_bounds_point_rejected(tmp_path):
    geom = GridGeometry(0.0, 1.0, 0.0, 1.0, 2, 2)
    text = "date,lon,lat,value\n2017-01-01,1.5,0.5,0.1\n"
    with pytest.raises(GridParseError):
        load_grid(_write(tmp_path, text, "pts.csv"), "point-list", geom)


def test_point_list_bad_header(tmp_path):
    geom = GridGeometry(0.0, 1.0, 0.0, 1.0, 2, 2)
    with pytest.raises(GridParseError) as exc:
        load_grid(_write(tmp_path, "lon,lat,value\n", "pts.csv"), "point-list", geom)
    assert exc.value.line == 1


def test_point_list_negative_value_is_domain_error(tmp_path):
    geom = GridGeometry(0.0, 1.0, 0.0, 1.0, 2, 2)
    text = "date,lon,lat,value\n2017-01-01,0.5,0.5,-0.1\n"
    with pytest.raises(GridDomainError):
        load_grid(_write(tmp_path, text, "pts.csv"), "point-list", geom)


def test_degenerate_bounds_rejected():
    with pytest.raises(GridError):
        make_grid([[0.1]], lon_min=1.0, lon_max=1.0)


def test_grid_needs_one_valid_cell():
    with pytest.raises(EmptyGridError):
        make_grid([[None, None]])


def test_value_at_reproduces_node_values_exactly():
    rng = np.random.default_rng(7)
    vals = rng.uniform(0.0, 2.0, (5, 7))
    vals[2, 3] = np.nan
    grid = make_grid(vals.tolist())
    lons, lats = grid.cell_centers()
    for r in range(5):
        for c in range(7):
            got = value_at(grid, (lons[c], lats[r]))
            if grid.mask[r, c]:
                assert got == grid.values[r, c]
            else:
                # masked node: renormalized neighbors still give a value here
                assert got is None or 0.0 <= got <= 2.0


def test_value_at_midpoint_renormalizes_over_valid_corners():
    # top row valid (0.2, 0.4), bottom row missing; halfway between the two
    # valid centers the renormalized weights are 1/2 each
    grid = make_grid([[0.2, 0.4], [None, None]])
    lons, lats = grid.cell_centers()
    mid = ((lons[0] + lons[1]) / 2.0, lats[0])
    assert value_at(grid, mid) == pytest.approx(0.3, abs=1e-15)


def test_value_at_outside_bounds_is_missing():
    grid = make_grid([[0.2, 0.4], [0.1, 0.3]])
    assert value_at(grid, (2.0, 0.5)) is None
    assert value_at(grid, (0.5, -1.0)) is None


def test_value_at_all_surrounding_cells_masked_is_missing():
    vals = [[0.5, None, None], [None, None, None], [None, None, None]]
    grid = make_grid(vals)
    lons, lats = grid.cell_centers()
    assert value_at(grid, (lons[2], lats[2])) is None


def test_values_at_vectorized_matches_scalar():
    grid = make_grid([[0.2, 0.4], [None, 0.8]])
    pts = np.array([[0.25, 0.75], [0.75, 0.25], [0.5, 0.5], [2.0, 2.0]])
    vec = values_at(grid, pts)
    for k in range(len(pts)):
        scalar = value_at(grid, tuple(pts[k]))
        if scalar is None:
            assert np.isnan(vec[k])
        else:
            assert vec[k] == scalar


@st.composite
def grid_and_points(draw):
    n_rows = draw(st.integers(1, 5))
    n_cols = draw(st.integers(1, 5))
    seed = draw(st.integers(0, 2**31 - 1))
    rng = np.random.default_rng(seed)
    vals = rng.uniform(0.0, 3.0, (n_rows, n_cols))
    mask = rng.random((n_rows, n_cols)) < 0.75
    if not mask.any():
        mask[0, 0] = True
    grid = ScalarGrid(0.0, 1.0, 0.0, 1.0, n_cols, n_rows,
                      np.where(mask, vals, 0.0), mask, dt.date(2017, 1, 1))
    pts = rng.uniform(-0.2, 1.2, (16, 2))
    return grid, pts


@given(grid_and_points())
@settings(max_examples=150, deadline=None)
def test_interpolation_stays_within_valid_value_range(gp):
    grid, pts = gp
    lo = grid.values[grid.mask].min()
    hi = grid.values[grid.mask].max()
    out = values_at(grid, pts)
    finite = out[~np.isnan(out)]
    assert (finite >= lo - 1e-12).all()
    assert (finite <= hi + 1e-12).all()


@given(grid_and_points())
@settings(max_examples=100, deadline=None)
def test_serialize_load_round_trip_is_bit_stable(tmp_path_factory, gp):
    grid, _ = gp
    p = tmp_path_factory.mktemp("rt") / "g.txt"
    write_dense_grid(grid, p)
    back = load_grid(p, "dense-grid")
    np.testing.assert_array_equal(back.mask, grid.mask)
    assert (back.values[back.mask] == grid.values[grid.mask]).all()
    assert back.date == grid.date
    assert (back.lon_min, back.lon_max) == (grid.lon_min, grid.lon_max)
