"""Georeferenced 2-D scalar grids: loading, serialization, interpolation.

A ScalarGrid is the substrate the swarm optimizer runs on: a rectangular
raster of scalar samples (e.g. aerosol optical thickness) with a validity
mask for cells where no retrieval exists (clouds, gaps). Grids are north-up
and row-major: row 0 is the northernmost row, cell centers are offset half a
cell from the bounds.

Two text formats are supported:

* dense-grid: header lines ``ncols``, ``nrows``, ``lonmin``, ``lonmax``,
  ``latmin``, ``latmax``, ``missing <sentinel>``, ``date <YYYY-MM-DD>``,
  followed by ``nrows`` whitespace-separated rows of ``ncols`` values.
  Cells equal to the sentinel are missing. Pick a sentinel outside the
  valid value range (values must be >= 0, so any negative works).
* point-list: CSV with header ``date,lon,lat,value``; points are binned to
  a caller-supplied GridGeometry, duplicates in one cell averaged.
"""

import csv
import datetime as dt
from dataclasses import dataclass

import numpy as np


class GridError(Exception):
    """Base class for grid loading and validation failures."""


class GridParseError(GridError):
    """Malformed input file; carries the 1-based offending line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class EmptyGridError(GridError):
    """Grid contains no valid sample at all."""


class GridDomainError(GridError):
    """A valid sample is negative or non-finite."""


@dataclass(frozen=True)
class GridGeometry:
    """Bounds and dimensions of a raster, without data."""

    lon_min: float
    lon_max: float
    lat_min: float
    lat_max: float
    n_cols: int
    n_rows: int

    def __post_init__(self):
        if not (self.lon_min < self.lon_max and self.lat_min < self.lat_max):
            raise GridError("degenerate bounds: require lon_min < lon_max and lat_min < lat_max")
        if self.n_cols < 1 or self.n_rows < 1:
            raise GridError("grid dimensions must be positive")

    @property
    def dlon(self) -> float:
        return (self.lon_max - self.lon_min) / self.n_cols

    @property
    def dlat(self) -> float:
        return (self.lat_max - self.lat_min) / self.n_rows

    def cell_centers(self) -> tuple[np.ndarray, np.ndarray]:
        """(center longitudes by column, center latitudes by row)."""
        lons = self.lon_min + (np.arange(self.n_cols) + 0.5) * self.dlon
        lats = self.lat_max - (np.arange(self.n_rows) + 0.5) * self.dlat
        return lons, lats


@dataclass(frozen=True)
class ScalarGrid:
    """One day's field: values + validity mask on a GridGeometry.

    values and mask are (n_rows, n_cols) arrays, row 0 at lat_max (north-up).
    Valid samples are finite and >= 0; at least one valid sample must exist.
    Instances are immutable after construction and safe to share across
    concurrent readers.
    """

    lon_min: float
    lon_max: float
    lat_min: float
    lat_max: float
    n_cols: int
    n_rows: int
    values: np.ndarray
    mask: np.ndarray
    date: dt.date

    def __post_init__(self):
        if not (self.lon_min < self.lon_max and self.lat_min < self.lat_max):
            raise GridError("degenerate bounds: require lon_min < lon_max and lat_min < lat_max")
        values = np.array(self.values, dtype=np.float64, order="C")
        mask = np.array(self.mask, dtype=bool, order="C")
        if values.shape != (self.n_rows, self.n_cols) or mask.shape != values.shape:
            raise GridError(
                f"values/mask shape {values.shape} does not match "
                f"(n_rows, n_cols) = ({self.n_rows}, {self.n_cols})"
            )
        if not mask.any():
            raise EmptyGridError("grid has no valid samples")
        valid = values[mask]
        if not np.isfinite(valid).all():
            raise GridDomainError("non-finite value in a valid cell")
        if (valid < 0).any():
            raise GridDomainError("negative value in a valid cell")
        values.setflags(write=False)
        mask.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "mask", mask)

    @property
    def geometry(self) -> GridGeometry:
        return GridGeometry(
            self.lon_min, self.lon_max, self.lat_min, self.lat_max, self.n_cols, self.n_rows
        )

    @property
    def dlon(self) -> float:
        return (self.lon_max - self.lon_min) / self.n_cols

    @property
    def dlat(self) -> float:
        return (self.lat_max - self.lat_min) / self.n_rows

    def cell_centers(self) -> tuple[np.ndarray, np.ndarray]:
        return self.geometry.cell_centers()


_DENSE_HEADER = ("ncols", "nrows", "lonmin", "lonmax", "latmin", "latmax", "missing", "date")


def _parse_dense(lines: list[str]) -> ScalarGrid:
    header: dict[str, str] = {}
    for idx, key in enumerate(_DENSE_HEADER):
        if idx >= len(lines):
            raise GridParseError(f"missing header line '{key}'", idx + 1)
        parts = lines[idx].split()
        if len(parts) != 2 or parts[0].lower() != key:
            raise GridParseError(f"expected header '{key} <value>', got {lines[idx]!r}", idx + 1)
        header[key] = parts[1]

    def intfield(key: str, lineno: int) -> int:
        try:
            v = int(header[key])
        except ValueError:
            raise GridParseError(f"{key} is not an integer: {header[key]!r}", lineno) from None
        if v < 1:
            raise GridParseError(f"{key} must be positive", lineno)
        return v

    def floatfield(key: str, lineno: int) -> float:
        try:
            return float(header[key])
        except ValueError:
            raise GridParseError(f"{key} is not a number: {header[key]!r}", lineno) from None

    n_cols = intfield("ncols", 1)
    n_rows = intfield("nrows", 2)
    lon_min = floatfield("lonmin", 3)
    lon_max = floatfield("lonmax", 4)
    lat_min = floatfield("latmin", 5)
    lat_max = floatfield("latmax", 6)
    sentinel = floatfield("missing", 7)
    try:
        date = dt.date.fromisoformat(header["date"])
    except ValueError:
        raise GridParseError(f"date is not YYYY-MM-DD: {header['date']!r}", 8) from None

    body = lines[len(_DENSE_HEADER):]
    rows = []
    row_lines = [i for i, ln in enumerate(body) if ln.strip()]
    if len(row_lines) != n_rows:
        raise GridParseError(
            f"expected {n_rows} data rows, found {len(row_lines)}",
            len(_DENSE_HEADER) + len(body),
        )
    for r, bi in enumerate(row_lines):
        lineno = len(_DENSE_HEADER) + bi + 1
        tokens = body[bi].split()
        if len(tokens) != n_cols:
            raise GridParseError(f"row has {len(tokens)} values, expected {n_cols}", lineno)
        try:
            rows.append([float(tok) for tok in tokens])
        except ValueError:
            raise GridParseError("non-numeric cell value", lineno) from None

    values = np.array(rows, dtype=np.float64)
    mask = values != sentinel
    values = np.where(mask, values, 0.0)
    try:
        return ScalarGrid(lon_min, lon_max, lat_min, lat_max, n_cols, n_rows, values, mask, date)
    except EmptyGridError:
        raise EmptyGridError("dense-grid file holds the missing sentinel in every cell") from None


def _parse_point_list(lines: list[str], geometry: GridGeometry) -> ScalarGrid:
    reader = csv.reader(lines)
    try:
        head = next(reader)
    except StopIteration:
        raise GridParseError("empty point-list file", 1) from None
    if [h.strip().lower() for h in head] != ["date", "lon", "lat", "value"]:
        raise GridParseError(f"expected header 'date,lon,lat,value', got {','.join(head)!r}", 1)

    sums = np.zeros((geometry.n_rows, geometry.n_cols))
    counts = np.zeros((geometry.n_rows, geometry.n_cols), dtype=np.int64)
    date: dt.date | None = None
    for lineno, row in enumerate(reader, start=2):
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if len(row) != 4:
            raise GridParseError(f"expected 4 fields, got {len(row)}", lineno)
        try:
            d = dt.date.fromisoformat(row[0].strip())
            lon = float(row[1])
            lat = float(row[2])
            value = float(row[3])
        except ValueError:
            raise GridParseError(f"malformed row: {','.join(row)!r}", lineno) from None
        if date is None:
            date = d
        elif d != date:
            raise GridParseError(
                f"mixed dates in one point-list file ({d} vs {date}); one file is one day",
                lineno,
            )
        if not np.isfinite(value) or value < 0:
            raise GridDomainError(f"line {lineno}: value {value!r} is negative or non-finite")
        if not (geometry.lon_min <= lon <= geometry.lon_max
                and geometry.lat_min <= lat <= geometry.lat_max):
            raise GridParseError(f"point ({lon}, {lat}) outside grid bounds", lineno)
        col = min(int((lon - geometry.lon_min) / geometry.dlon), geometry.n_cols - 1)
        row_i = min(int((geometry.lat_max - lat) / geometry.dlat), geometry.n_rows - 1)
        sums[row_i, col] += value
        counts[row_i, col] += 1

    if date is None or not counts.any():
        raise EmptyGridError("point-list file holds no data rows")
    mask = counts > 0
    values = np.where(mask, sums / np.maximum(counts, 1), 0.0)
    return ScalarGrid(
        geometry.lon_min, geometry.lon_max, geometry.lat_min, geometry.lat_max,
        geometry.n_cols, geometry.n_rows, values, mask, date,
    )


def load_grid(path, format: str, geometry: GridGeometry | None = None) -> ScalarGrid:
    """Load a ScalarGrid from a dense-grid or point-list file.

    format is "dense-grid" or "point-list"; point-list requires a geometry
    (the CSV carries no raster definition). Raises GridParseError (with line
    number) for malformed input, EmptyGridError for an all-missing grid and
    GridDomainError for negative/non-finite valid values.
    """
    if format not in ("dense-grid", "point-list"):
        raise GridError(f"unknown grid format {format!r}")
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if format == "dense-grid":
        return _parse_dense(lines)
    if geometry is None:
        raise GridError("point-list format requires an explicit grid geometry")
    return _parse_point_list(lines, geometry)


def write_dense_grid(grid: ScalarGrid, path, missing: float = -9999.0) -> None:
    """Serialize to the dense-grid text format.

    Floats are written with repr(), so load_grid(write_dense_grid(g)) is a
    bit-identical round trip.
    """
    out = [
        f"ncols {grid.n_cols}",
        f"nrows {grid.n_rows}",
        f"lonmin {float(grid.lon_min)!r}",
        f"lonmax {float(grid.lon_max)!r}",
        f"latmin {float(grid.lat_min)!r}",
        f"latmax {float(grid.lat_max)!r}",
        f"missing {float(missing)!r}",
        f"date {grid.date.isoformat()}",
    ]
    for r in range(grid.n_rows):
        row = [
            repr(float(grid.values[r, c])) if grid.mask[r, c] else repr(float(missing))
            for c in range(grid.n_cols)
        ]
        out.append(" ".join(row))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(out) + "\n")


def values_at(grid: ScalarGrid, positions: np.ndarray) -> np.ndarray:
    """Vectorized bilinear interpolation; NaN marks missing.

    Interpolates over the 4 surrounding cell centers, using only valid cells
    with the bilinear weights renormalized over the valid subset. A position
    is missing (NaN) when it lies outside the bounding box of cell centers or
    when all contributing cells are invalid.
    """
    positions = np.asarray(positions, dtype=np.float64)
    fc = (positions[:, 0] - grid.lon_min) / grid.dlon - 0.5
    fr = (grid.lat_max - positions[:, 1]) / grid.dlat - 0.5
    # snap near-integer fractional indices so a position computed as a cell
    # center reproduces the node value exactly despite rounding in the
    # bounds arithmetic (1e-9 of a cell, ~1e-11 degrees)
    rc = np.round(fc)
    rr = np.round(fr)
    fc = np.where(np.abs(fc - rc) <= 1e-9, rc, fc)
    fr = np.where(np.abs(fr - rr) <= 1e-9, rr, fr)
    inside = (fc >= 0.0) & (fc <= grid.n_cols - 1) & (fr >= 0.0) & (fr <= grid.n_rows - 1)

    # clamp so the corner indices stay in range; weights still honest because
    # at the clamp the fractional part becomes exactly 0 or 1
    c0 = np.clip(np.floor(fc).astype(np.int64), 0, max(grid.n_cols - 2, 0))
    r0 = np.clip(np.floor(fr).astype(np.int64), 0, max(grid.n_rows - 2, 0))
    c1 = np.minimum(c0 + 1, grid.n_cols - 1)
    r1 = np.minimum(r0 + 1, grid.n_rows - 1)
    tc = np.clip(fc - c0, 0.0, 1.0)
    tr = np.clip(fr - r0, 0.0, 1.0)

    vals = np.where(grid.mask, grid.values, 0.0)
    m = grid.mask.astype(np.float64)
    w00 = (1 - tc) * (1 - tr) * m[r0, c0]
    w10 = tc * (1 - tr) * m[r0, c1]
    w01 = (1 - tc) * tr * m[r1, c0]
    w11 = tc * tr * m[r1, c1]
    wsum = w00 + w10 + w01 + w11
    num = w00 * vals[r0, c0] + w10 * vals[r0, c1] + w01 * vals[r1, c0] + w11 * vals[r1, c1]

    out = np.full(len(positions), np.nan)
    ok = inside & (wsum > 0.0)
    out[ok] = num[ok] / wsum[ok]
    return out


def value_at(grid: ScalarGrid, position) -> float | None:
    """Masked bilinear interpolation at one (lon, lat); None when missing."""
    v = values_at(grid, np.asarray([position], dtype=np.float64))[0]
    return None if np.isnan(v) else float(v)
