"""Command-line entry point and the end-to-end pipeline.

Subcommands:

* ``run <config>``: ingest or synthesize daily grids, run the optimizer per
  day, extract peaks, pool them into hot-spots, quantify, and write CSV,
  GeoJSON, SVG, report figures and a run manifest into the output dir.
* ``validate <config>``: print every validation finding, no work done.
* ``synth <config>``: materialize the config's synthetic days as
  dense-grid text files.
* ``render <results-dir> <spec>``: redraw an SVG from an earlier run's
  outputs without recomputing anything.

Exit codes: 0 ok, 2 config/spec validation failure, 3 input parse failure,
4 output I/O failure. Days are processed independently (optionally in a
process pool); results are pooled in date order so scheduling never changes
output bytes.
"""

import argparse
import dataclasses
import datetime as dt
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .config import (ConfigError, RunConfig, config_hash, load_config, parse_config)
from .figures import write_hotspot_averages, write_peak_map
from .grid import GridError, GridGeometry, load_grid, write_dense_grid
from .gso import run as gso_run
from .hotspots import RegionParseError, assign_names, form_hotspots
from .io_render import (RenderSpec, render_svg, write_geojson, write_hotspots_csv,
                        write_manifest, write_peak_regional_csv, write_peaks_csv,
                        write_quantification_csv, write_trace_csv)
from .peaks import Peak, extract_peaks
from .quantify import (hotspot_average, period_label, period_members, regional_aot,
                       temporal_delta)
from .synth import render_mixture

LOG = logging.getLogger("aotspot")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INPUT = 3
EXIT_IO = 4


def _run_day(task):
    """Process one day: load/synthesize the grid, optimize, extract, quantify.

    Top-level so a process pool can pickle it. Returns one tuple per day;
    the peaks and their RegionalAverages share object identity (pickle
    keeps shared refs within one payload), which downstream membership
    mapping relies on.
    """
    (source, params, link_radius, min_support, q_radius, trace_dir) = task
    if source[0] == "file":
        _, path, fmt, geometry = source
        grid = load_grid(path, fmt, geometry)
    else:
        _, day, geometry = source
        grid = render_mixture(day.spec, geometry, day.date)
    state, history = gso_run(grid, params, trace=trace_dir is not None)
    day_peaks = extract_peaks(state, grid.date, link_radius, min_support)
    regionals = [regional_aot(p, grid, q_radius) for p in day_peaks]
    for p, ra in zip(day_peaks, regionals):
        p.regional_value = ra.value
    if trace_dir is not None:
        write_trace_csv(history, Path(trace_dir) / f"trace_{grid.date.isoformat()}.csv")
    bounds = (grid.lon_min, grid.lon_max, grid.lat_min, grid.lat_max)
    n_worms = len(state.positions)
    return grid.date, day_peaks, regionals, bounds, n_worms


def _day_tasks(cfg: RunConfig, trace_dir):
    geometry = None
    if cfg.input is not None and cfg.input.geometry is not None:
        geometry = GridGeometry(**cfg.input.geometry)
    if cfg.synth_days is not None:
        if geometry is None:
            raise ConfigError(["synth.geometry: required"])
        sources = [("synth", day, geometry) for day in cfg.synth_days]
    else:
        in_dir = cfg.input.dir
        if not in_dir.is_dir():
            raise GridError(f"no input grids: {in_dir} is not a directory")
        files = sorted(p for p in in_dir.iterdir() if p.is_file())
        if not files:
            raise GridError(f"no input grids in {in_dir}")
        sources = [("file", str(p), cfg.input.format, geometry) for p in files]
    return [
        (src, cfg.gso, cfg.peaks.link_radius, cfg.peaks.min_support,
         cfg.quantify.radius, str(trace_dir) if trace_dir else None)
        for src in sources
    ]


def run_pipeline(cfg: RunConfig, quiet: bool = False) -> int:
    """Execute the full analysis described by cfg. Returns 0 on success;
    raises ConfigError / GridError / RegionParseError / OSError for the
    caller to map onto exit codes."""
    out = Path(cfg.output)
    out.mkdir(parents=True, exist_ok=True)
    trace_dir = None
    if cfg.trace:
        trace_dir = out / "trace"
        trace_dir.mkdir(exist_ok=True)

    tasks = _day_tasks(cfg, trace_dir)
    LOG.info("processing %d day(s) with jobs=%d", len(tasks), cfg.jobs)
    if cfg.jobs > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            results = list(pool.map(_run_day, tasks))
    else:
        results = [_run_day(t) for t in tasks]

    # pool in (date, task index) order so scheduling cannot reorder output
    results.sort(key=lambda r: r[0])
    all_peaks: list[Peak] = []
    all_regionals = []
    day_counts = []
    for date, day_peaks, regionals, bounds, n_worms in results:
        all_peaks.extend(day_peaks)
        all_regionals.extend(regionals)
        day_counts.append({"date": date.isoformat(), "n_peaks": len(day_peaks),
                           "n_worms": n_worms})
        LOG.info("  %s: %d peak(s) from %d worms", date.isoformat(), len(day_peaks), n_worms)

    first_bounds = results[0][3]
    spots = form_hotspots(all_peaks, cfg.hotspots.radius, cfg.hotspots.min_days)
    if cfg.hotspots.regions is not None:
        assign_names(spots, cfg.hotspots.regions)

    granularity = cfg.quantify.period
    quant_rows = []
    for h in spots:
        periods = sorted({period_label(p.date, granularity) for p in h.member_peaks})
        for period in periods:
            avg = hotspot_average(h, period, granularity)
            k = len(period_members(h, period, granularity))
            quant_rows.append((h.id, period, avg, k))
            if avg is not None:
                h.per_period_avg[period] = avg

    write_peaks_csv(all_peaks, out / "peaks.csv")
    write_peak_regional_csv(all_regionals, out / "peak_regional.csv")
    write_hotspots_csv(spots, out / "hotspots.csv")
    write_quantification_csv(quant_rows, out / "quantification.csv")
    write_geojson(spots, all_peaks, out / "results.geojson")

    svg_files = []
    for rc in cfg.render:
        bounds = rc.bounds if rc.bounds is not None else first_bounds
        spec = RenderSpec(bounds=bounds, width=rc.width, height=rc.height, layer=rc.layer)
        render_svg(spec, all_peaks, spots, out / rc.file)
        svg_files.append(rc.file)

    fig_dir = out / "figures"
    fig_dir.mkdir(exist_ok=True)
    write_peak_map(all_peaks, spots, fig_dir / "peak_map.png", first_bounds)
    write_hotspot_averages(quant_rows, fig_dir / "hotspot_averages.png")

    manifest = {
        "config_hash": config_hash(cfg),
        "seed": cfg.gso.seed,
        "geometry": {
            "lon_min": first_bounds[0], "lon_max": first_bounds[1],
            "lat_min": first_bounds[2], "lat_max": first_bounds[3],
        },
        "days": day_counts,
        "n_peaks": len(all_peaks),
        "n_hotspots": len(spots),
        "outputs": sorted(
            ["peaks.csv", "peak_regional.csv", "hotspots.csv", "quantification.csv",
             "results.geojson", "figures/peak_map.png", "figures/hotspot_averages.png"]
            + svg_files
        ),
    }
    write_manifest(manifest, out / "run_manifest.json")

    if not quiet:
        print(f"{len(tasks)} day(s), {len(all_peaks)} peak(s), {len(spots)} hot-spot(s)")
        for h in spots:
            label = f"hot-spot {h.id}" + (f" ({h.name})" if h.name else "")
            print(f"  {label}: {len(h.member_peaks)} peaks over {h.n_days} days")
        all_periods = sorted({r[1] for r in quant_rows})
        if len(all_periods) >= 2:
            a, b = all_periods[0], all_periods[-1]
            for h in spots:
                delta = temporal_delta(h, a, b, granularity)
                if delta is None:
                    continue
                direction = "increase" if delta > 0 else ("decrease" if delta < 0 else "no change")
                print(f"  hot-spot {h.id}: {a} -> {b} delta {delta:+.4f} ({direction})")
        print(f"outputs written to {out}")
    return EXIT_OK


def run_synth(cfg: RunConfig, quiet: bool = False) -> int:
    """Write the config's synthetic days as dense-grid files."""
    if cfg.synth_days is None:
        raise ConfigError(["synth: this config has no synthetic days"])
    geometry = GridGeometry(**cfg.input.geometry)
    out = Path(cfg.output)
    out.mkdir(parents=True, exist_ok=True)
    for day in cfg.synth_days:
        grid = render_mixture(day.spec, geometry, day.date)
        path = out / f"grid_{day.date.isoformat()}.txt"
        write_dense_grid(grid, path)
        if not quiet:
            print(path)
    return EXIT_OK


def run_validate(config_path, quiet: bool = False) -> int:
    path = Path(config_path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        print(f"cannot read config: {e}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        import yaml
        doc = yaml.safe_load(text)
    except Exception as e:
        print(f"config is not valid YAML: {e}", file=sys.stderr)
        return EXIT_CONFIG
    cfg, findings = parse_config(doc, path.parent)
    if findings:
        for f in findings:
            print(f, file=sys.stderr)
        return EXIT_CONFIG
    print("OK")
    return EXIT_OK


def _load_results(results_dir: Path):
    """Rebuild peaks and hot-spots from a previous run's results.geojson."""
    geo_path = results_dir / "results.geojson"
    manifest_path = results_dir / "run_manifest.json"
    try:
        doc = json.loads(geo_path.read_text(encoding="utf-8"))
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    except OSError as e:
        raise GridError(f"cannot read results dir: {e}") from None
    except json.JSONDecodeError as e:
        raise GridError(f"results files are not valid JSON: {e}") from None

    from .hotspots import HotSpot
    peaks = []
    assignments = []
    spots_raw = []
    try:
        for feat in doc["features"]:
            props = feat["properties"]
            lon, lat = feat["geometry"]["coordinates"]
            if props["kind"] == "peak":
                peaks.append(Peak(
                    date=dt.date.fromisoformat(props["date"]), lon=lon, lat=lat,
                    support=props["support"], regional_value=props["regional_value"],
                ))
                assignments.append(props["hotspot_id"])
            else:
                spots_raw.append((props, (lon, lat)))
        g = manifest["geometry"]
        bounds = (g["lon_min"], g["lon_max"], g["lat_min"], g["lat_max"])
    except (KeyError, TypeError, ValueError) as e:
        raise GridError(f"results files have unexpected structure: {e!r}") from None

    spots = []
    for props, centroid in sorted(spots_raw, key=lambda t: t[0]["id"]):
        members = [p for p, hid in zip(peaks, assignments) if hid == props["id"]]
        spots.append(HotSpot(
            id=props["id"], member_peaks=members, centroid=centroid,
            name=props.get("name", ""), per_period_avg=props.get("per_period_avg", {}),
        ))
    return peaks, spots, bounds


def run_render(results_dir, spec_path, quiet: bool = False) -> int:
    """Re-render an SVG from stored results, no recomputation."""
    import yaml
    results_dir = Path(results_dir)
    peaks, spots, bounds = _load_results(results_dir)
    try:
        doc = yaml.safe_load(Path(spec_path).read_text(encoding="utf-8"))
    except OSError as e:
        raise ConfigError([f"cannot read render spec: {e}"]) from None
    except yaml.YAMLError as e:
        raise ConfigError([f"render spec is not valid YAML: {e}"]) from None
    if not isinstance(doc, dict):
        raise ConfigError(["render spec must be a mapping"])
    layer = doc.get("layer", "peaks-by-hotspot-color")
    width = doc.get("width", 800)
    height = doc.get("height", 800)
    file = doc.get("file", "") or layer.replace("-", "_") + ".svg"
    spec_bounds = tuple(doc["bounds"]) if "bounds" in doc else bounds
    try:
        spec = RenderSpec(bounds=spec_bounds, width=width, height=height, layer=layer)
    except (ValueError, TypeError) as e:
        raise ConfigError([f"render spec: {e}"]) from None
    render_svg(spec, peaks, spots, results_dir / file)
    if not quiet:
        print(results_dir / file)
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="aotspot",
        description="Find per-day peaks of gridded scalar fields with a glowworm "
                    "swarm, pool them into recurring hot-spots, and quantify them.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute the full pipeline from a config file")
    p_run.add_argument("config")
    p_run.add_argument("--seed", type=int, default=None, help="override the RNG seed")
    p_run.add_argument("--trace", action="store_true", help="write per-iteration swarm traces")
    p_run.add_argument("--jobs", type=int, default=None, help="process days in N parallel workers")
    p_run.add_argument("--quiet", action="store_true", help="suppress the summary report")

    p_val = sub.add_parser("validate", help="check a config file, print all findings")
    p_val.add_argument("config")
    p_val.add_argument("--quiet", action="store_true")

    p_synth = sub.add_parser("synth", help="write synthetic days as dense-grid files")
    p_synth.add_argument("config")
    p_synth.add_argument("--seed", type=int, default=None)
    p_synth.add_argument("--quiet", action="store_true")

    p_render = sub.add_parser("render", help="re-render an SVG from stored results")
    p_render.add_argument("results_dir")
    p_render.add_argument("spec")
    p_render.add_argument("--quiet", action="store_true")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    quiet = getattr(args, "quiet", False)
    logging.basicConfig(level=logging.WARNING if quiet else logging.INFO,
                        format="%(message)s", stream=sys.stderr)
    try:
        if args.command == "validate":
            return run_validate(args.config, quiet)
        if args.command == "render":
            return run_render(args.results_dir, args.spec, quiet)
        cfg = load_config(args.config)
        if getattr(args, "seed", None) is not None:
            cfg.gso = dataclasses.replace(cfg.gso, seed=args.seed)
        if getattr(args, "jobs", None) is not None:
            if args.jobs < 1:
                print("--jobs must be >= 1", file=sys.stderr)
                return EXIT_CONFIG
            cfg.jobs = args.jobs
        if getattr(args, "trace", False):
            cfg.trace = True
        if args.command == "synth":
            return run_synth(cfg, quiet)
        return run_pipeline(cfg, quiet)
    except ConfigError as e:
        for f in e.findings:
            print(f, file=sys.stderr)
        return EXIT_CONFIG
    except (GridError, RegionParseError) as e:
        print(str(e), file=sys.stderr)
        return EXIT_INPUT
    except ValueError as e:
        print(str(e), file=sys.stderr)
        return EXIT_CONFIG
    except OSError as e:
        print(f"I/O failure: {e}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
