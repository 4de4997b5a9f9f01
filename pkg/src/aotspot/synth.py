"""Synthetic Gaussian-mixture fields with analytically known maxima.

These fields are the ground-truth oracle for the peak-detection tests: in
the well-separated regime (pairwise mode distance >= 4 sigma) the mixture's
local maxima coincide with the mode centers to within a tenth of a sigma,
so recovered peaks can be scored against exact coordinates.
"""

import datetime as dt
from dataclasses import dataclass

import numpy as np

from .grid import GridGeometry, ScalarGrid


class SeparationError(ValueError):
    """Modes are too close for the well-separated ground-truth claim."""


@dataclass(frozen=True)
class GaussianMode:
    lon: float
    lat: float
    amplitude: float
    sigma: float

    def __post_init__(self):
        if not self.amplitude > 0:
            raise ValueError(f"mode amplitude must be > 0, got {self.amplitude}")
        if not self.sigma > 0:
            raise ValueError(f"mode sigma must be > 0, got {self.sigma}")


@dataclass(frozen=True)
class GaussianMixtureSpec:
    """Isotropic Gaussian bumps on a constant background, optional noise."""

    modes: tuple[GaussianMode, ...] = ()
    background: float = 0.0
    noise_sigma: float = 0.0
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "modes", tuple(self.modes))
        if self.background < 0:
            raise ValueError(f"background must be >= 0, got {self.background}")
        if self.noise_sigma < 0:
            raise ValueError(f"noise_sigma must be >= 0, got {self.noise_sigma}")


def render_mixture(
    spec: GaussianMixtureSpec,
    geometry: GridGeometry,
    date: dt.date = dt.date(2000, 1, 1),
    holes: list[tuple[int, int]] | None = None,
) -> ScalarGrid:
    """Sample the mixture at every cell center of the geometry.

    Cell value = background + sum_k amp_k * exp(-d_k^2 / (2 sigma_k^2))
    plus seeded per-cell gaussian noise, clamped at 0 after the noise is
    added. All cells are valid unless `holes` lists (row, col) indices to
    mask out. Same spec (same seed) renders bit-identically.
    """
    for m in spec.modes:
        if not (geometry.lon_min <= m.lon <= geometry.lon_max
                and geometry.lat_min <= m.lat <= geometry.lat_max):
            raise ValueError(f"mode center ({m.lon}, {m.lat}) outside grid bounds")

    lons, lats = geometry.cell_centers()
    lon_g, lat_g = np.meshgrid(lons, lats)
    values = np.full(lon_g.shape, float(spec.background))
    for m in spec.modes:
        d2 = (lon_g - m.lon) ** 2 + (lat_g - m.lat) ** 2
        values += m.amplitude * np.exp(-d2 / (2.0 * m.sigma * m.sigma))
    if spec.noise_sigma > 0:
        rng = np.random.default_rng(spec.seed)
        values += rng.normal(0.0, spec.noise_sigma, values.shape)
    values = np.clip(values, 0.0, None)

    mask = np.ones(values.shape, dtype=bool)
    for r, c in holes or ():
        mask[r, c] = False
    return ScalarGrid(
        geometry.lon_min, geometry.lon_max, geometry.lat_min, geometry.lat_max,
        geometry.n_cols, geometry.n_rows, values, mask, date,
    )


def true_peaks(spec: GaussianMixtureSpec) -> list[tuple[float, float]]:
    """Mode centers, valid as ground-truth maxima only when well separated.

    Requires every pair of modes to sit >= 4 * max(sigma) apart; raises
    SeparationError otherwise rather than return centers that may not be
    the mixture's actual local maxima.
    """
    if len(spec.modes) > 1:
        min_sep = 4.0 * max(m.sigma for m in spec.modes)
        for i in range(len(spec.modes)):
            for j in range(i + 1, len(spec.modes)):
                a, b = spec.modes[i], spec.modes[j]
                d = float(np.hypot(a.lon - b.lon, a.lat - b.lat))
                if d < min_sep:
                    raise SeparationError(
                        f"modes {i} and {j} are {d:.4f} deg apart; "
                        f"well-separated regime needs >= {min_sep:.4f}"
                    )
    return [(m.lon, m.lat) for m in spec.modes]
