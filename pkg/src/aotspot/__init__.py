"""Peak detection and hot-spot analysis for gridded scalar fields.

The pipeline: a glowworm swarm climbs one day's field to its local maxima,
single-linkage clustering of the converged swarm yields that day's peaks,
peaks pooled across days form recurring hot-spots, and regional averages
quantify the scalar content around each peak and over each hot-spot.
"""

from .grid import (EmptyGridError, GridDomainError, GridError, GridGeometry,
                   GridParseError, ScalarGrid, load_grid, value_at, values_at,
                   write_dense_grid)
from .gso import (GsoParams, ParameterError, SwarmState, init_swarm, move_step,
                  move_with_uniforms, neighbors, run, selection_probabilities,
                  update_luciferin, update_ranges)
from .hotspots import HotSpot, RegionParseError, assign_names, form_hotspots
from .io_render import RenderSpec, render_svg, write_geojson
from .peaks import Peak, extract_peaks
from .quantify import (RegionalAverage, hotspot_average, period_label,
                       regional_aot, temporal_delta)
from .synth import GaussianMixtureSpec, GaussianMode, SeparationError, render_mixture, true_peaks

__version__ = "0.1.0"

__all__ = [
    "EmptyGridError", "GridDomainError", "GridError", "GridGeometry",
    "GridParseError", "ScalarGrid", "load_grid", "value_at", "values_at",
    "write_dense_grid",
    "GsoParams", "ParameterError", "SwarmState", "init_swarm", "move_step",
    "move_with_uniforms", "neighbors", "run", "selection_probabilities",
    "update_luciferin", "update_ranges",
    "HotSpot", "RegionParseError", "assign_names", "form_hotspots",
    "RenderSpec", "render_svg", "write_geojson",
    "Peak", "extract_peaks",
    "RegionalAverage", "hotspot_average", "period_label", "regional_aot",
    "temporal_delta",
    "GaussianMixtureSpec", "GaussianMode", "SeparationError", "render_mixture",
    "true_peaks",
    "__version__",
]
