"""Run configuration: YAML document -> validated, defaulted RunConfig.

The config is one declarative file. A minimal run needs only an input (a
directory of daily grids, or synthetic day specs) and an output directory;
every algorithm knob defaults to the reference parameter set. Validation
collects ALL findings instead of stopping at the first, so `validate` can
report everything wrong with a file in one pass.

Relative paths inside the config resolve against the config file's
directory.
"""

import datetime as dt
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .gso import GsoParams, ParameterError
from .io_render import LAYERS
from .quantify import PERIOD_GRANULARITIES
from .synth import GaussianMixtureSpec, GaussianMode


class ConfigError(Exception):
    """Invalid configuration; carries the full findings list."""

    def __init__(self, findings: list[str]):
        self.findings = list(findings)
        super().__init__("; ".join(self.findings))


@dataclass
class InputConfig:
    dir: Path
    format: str = "dense-grid"
    geometry: dict | None = None  # GridGeometry kwargs, required for point-list
    raw_dir: str = ""


@dataclass
class SynthDay:
    date: dt.date
    spec: GaussianMixtureSpec


@dataclass
class PeaksConfig:
    link_radius: float = 0.03
    min_support: int = 3


@dataclass
class HotspotsConfig:
    radius: float = 0.05
    min_days: int = 5
    regions: Path | None = None
    raw_regions: str | None = None


@dataclass
class QuantifyConfig:
    radius: float = 0.05
    period: str = "year"


@dataclass
class RenderConfig:
    layer: str = "peaks-by-hotspot-color"
    width: int = 800
    height: int = 800
    file: str = ""
    bounds: tuple[float, float, float, float] | None = None

    def __post_init__(self):
        if not self.file:
            self.file = self.layer.replace("-", "_") + ".svg"


@dataclass
class RunConfig:
    output: Path
    input: InputConfig | None = None
    synth_days: list[SynthDay] | None = None
    gso: GsoParams = field(default_factory=GsoParams)
    peaks: PeaksConfig = field(default_factory=PeaksConfig)
    hotspots: HotspotsConfig = field(default_factory=HotspotsConfig)
    quantify: QuantifyConfig = field(default_factory=QuantifyConfig)
    render: list[RenderConfig] = field(default_factory=lambda: [RenderConfig()])
    trace: bool = False
    jobs: int = 1


_GEOMETRY_KEYS = ("lon_min", "lon_max", "lat_min", "lat_max", "n_cols", "n_rows")
_TOP_KEYS = {"output", "input", "synth", "gso", "peaks", "hotspots", "quantify",
             "render", "trace", "jobs"}


def _num(doc, key, findings, section, default, minimum=None, strict_min=False):
    v = doc.get(key, default)
    if not isinstance(v, (int, float)) or isinstance(v, bool):
        findings.append(f"{section}.{key}: expected a number, got {v!r}")
        return default
    v = float(v)
    if minimum is not None:
        if strict_min and not v > minimum:
            findings.append(f"{section}.{key}: must be > {minimum}, got {v}")
            return default
        if not strict_min and not v >= minimum:
            findings.append(f"{section}.{key}: must be >= {minimum}, got {v}")
            return default
    return v


def _int(doc, key, findings, section, default, minimum=1):
    v = doc.get(key, default)
    if not isinstance(v, int) or isinstance(v, bool):
        findings.append(f"{section}.{key}: expected an integer, got {v!r}")
        return default
    if v < minimum:
        findings.append(f"{section}.{key}: must be >= {minimum}, got {v}")
        return default
    return v


def _date(value, findings, where) -> dt.date | None:
    if isinstance(value, dt.date) and not isinstance(value, dt.datetime):
        return value
    if isinstance(value, str):
        try:
            return dt.date.fromisoformat(value)
        except ValueError:
            pass
    findings.append(f"{where}: expected a YYYY-MM-DD date, got {value!r}")
    return None


def _parse_geometry(doc, findings, section) -> dict | None:
    if not isinstance(doc, dict):
        findings.append(f"{section}: expected a mapping with {', '.join(_GEOMETRY_KEYS)}")
        return None
    out = {}
    ok = True
    for key in _GEOMETRY_KEYS:
        if key not in doc:
            findings.append(f"{section}.{key}: required")
            ok = False
            continue
        v = doc[key]
        if key.startswith("n_"):
            if not isinstance(v, int) or isinstance(v, bool) or v < 1:
                findings.append(f"{section}.{key}: expected a positive integer, got {v!r}")
                ok = False
                continue
            out[key] = v
        else:
            if not isinstance(v, (int, float)) or isinstance(v, bool):
                findings.append(f"{section}.{key}: expected a number, got {v!r}")
                ok = False
                continue
            out[key] = float(v)
    if ok:
        if not out["lon_min"] < out["lon_max"]:
            findings.append(f"{section}: lon_min must be < lon_max")
            ok = False
        if not out["lat_min"] < out["lat_max"]:
            findings.append(f"{section}: lat_min must be < lat_max")
            ok = False
    return out if ok else None


def _parse_synth_days(doc, findings, gso_seed: int,
                      geometry: dict | None) -> list[SynthDay]:
    days_doc = doc.get("days")
    if not isinstance(days_doc, list) or not days_doc:
        findings.append("synth.days: expected a nonempty list of day specs")
        return []
    days = []
    for idx, day in enumerate(days_doc):
        where = f"synth.days[{idx}]"
        if not isinstance(day, dict):
            findings.append(f"{where}: expected a mapping")
            continue
        date = _date(day.get("date"), findings, f"{where}.date")
        modes_doc = day.get("modes", [])
        if not isinstance(modes_doc, list):
            findings.append(f"{where}.modes: expected a list")
            modes_doc = []
        modes = []
        for m_idx, m in enumerate(modes_doc):
            m_where = f"{where}.modes[{m_idx}]"
            if not isinstance(m, dict):
                findings.append(f"{m_where}: expected a mapping")
                continue
            try:
                mode = GaussianMode(
                    lon=float(m["lon"]), lat=float(m["lat"]),
                    amplitude=float(m["amplitude"]), sigma=float(m["sigma"]),
                )
            except (KeyError, TypeError, ValueError) as e:
                findings.append(f"{m_where}: {e}")
                continue
            if geometry is not None and not (
                    geometry["lon_min"] <= mode.lon <= geometry["lon_max"]
                    and geometry["lat_min"] <= mode.lat <= geometry["lat_max"]):
                findings.append(
                    f"{m_where}: mode center ({mode.lon}, {mode.lat}) outside grid bounds")
                continue
            modes.append(mode)
        background = _num(day, "background", findings, where, 0.0, minimum=0.0)
        noise_sigma = _num(day, "noise_sigma", findings, where, 0.0, minimum=0.0)
        if "seed" in day:
            seed = day["seed"]
            if not isinstance(seed, int) or isinstance(seed, bool):
                findings.append(f"{where}.seed: expected an integer, got {seed!r}")
                seed = 0
        else:
            # deterministic per-day noise stream derived from the run seed
            seed = int(np.random.SeedSequence((gso_seed, idx)).generate_state(1)[0])
        if date is None:
            continue
        try:
            spec = GaussianMixtureSpec(
                modes=tuple(modes), background=background,
                noise_sigma=noise_sigma, seed=seed,
            )
        except ValueError as e:
            findings.append(f"{where}: {e}")
            continue
        days.append(SynthDay(date=date, spec=spec))
    return days


def parse_config(doc, base_dir: Path) -> tuple[RunConfig | None, list[str]]:
    """Validate a YAML document; returns (config or None, all findings)."""
    findings: list[str] = []
    if not isinstance(doc, dict):
        return None, ["config root must be a mapping"]
    for key in doc:
        if key not in _TOP_KEYS:
            findings.append(f"unknown top-level key {key!r}")

    output_raw = doc.get("output")
    if not isinstance(output_raw, str) or not output_raw:
        findings.append("output: required (directory path)")
        output_raw = "out"

    gso_doc = doc.get("gso", {})
    gso = GsoParams()
    if not isinstance(gso_doc, dict):
        findings.append("gso: expected a mapping")
    else:
        known = {f for f in GsoParams.__dataclass_fields__}
        for key in gso_doc:
            if key not in known:
                findings.append(f"gso.{key}: unknown parameter")
        kwargs = {k: v for k, v in gso_doc.items() if k in known}
        for k in ("n_t", "iterations", "seed"):
            if k in kwargs and (not isinstance(kwargs[k], int) or isinstance(kwargs[k], bool)):
                findings.append(f"gso.{k}: expected an integer, got {kwargs[k]!r}")
                kwargs.pop(k)
        for k in ("rho", "gamma", "beta", "s", "l_0", "r_s", "r_0"):
            if k in kwargs:
                if not isinstance(kwargs[k], (int, float)) or isinstance(kwargs[k], bool):
                    findings.append(f"gso.{k}: expected a number, got {kwargs[k]!r}")
                    kwargs.pop(k)
                else:
                    kwargs[k] = float(kwargs[k])
        try:
            gso = GsoParams(**kwargs)
        except ParameterError as e:
            findings.append(f"gso: {e}")

    input_cfg: InputConfig | None = None
    synth_days: list[SynthDay] | None = None
    synth_geometry: dict | None = None
    has_input = "input" in doc
    has_synth = "synth" in doc
    if has_input == has_synth:
        findings.append("exactly one of 'input' and 'synth' must be present")
    if has_input:
        in_doc = doc["input"]
        if not isinstance(in_doc, dict):
            findings.append("input: expected a mapping")
        else:
            raw_dir = in_doc.get("dir")
            fmt = in_doc.get("format", "dense-grid")
            if not isinstance(raw_dir, str) or not raw_dir:
                findings.append("input.dir: required (directory of daily grid files)")
                raw_dir = "."
            if fmt not in ("dense-grid", "point-list"):
                findings.append(
                    f"input.format: must be 'dense-grid' or 'point-list', got {fmt!r}")
                fmt = "dense-grid"
            geometry = None
            if "geometry" in in_doc:
                geometry = _parse_geometry(in_doc["geometry"], findings, "input.geometry")
            elif fmt == "point-list":
                findings.append("input.geometry: required for point-list format")
            input_cfg = InputConfig(
                dir=(base_dir / raw_dir), format=fmt, geometry=geometry, raw_dir=raw_dir)
    if has_synth:
        synth_doc = doc["synth"]
        if not isinstance(synth_doc, dict):
            findings.append("synth: expected a mapping with 'geometry' and 'days'")
        else:
            for key in synth_doc:
                if key not in ("geometry", "days"):
                    findings.append(f"synth.{key}: unknown key")
            if "geometry" not in synth_doc:
                findings.append("synth.geometry: required")
                geometry = None
            else:
                geometry = _parse_geometry(synth_doc["geometry"], findings, "synth.geometry")
            synth_days = _parse_synth_days(synth_doc, findings, gso.seed, geometry)
            # synth reuses InputConfig.geometry as the common raster definition
            input_cfg = None
            synth_geometry = geometry

    peaks_doc = doc.get("peaks", {})
    peaks = PeaksConfig()
    if isinstance(peaks_doc, dict):
        peaks = PeaksConfig(
            link_radius=_num(peaks_doc, "link_radius", findings, "peaks", 0.03,
                             minimum=0.0, strict_min=True),
            min_support=_int(peaks_doc, "min_support", findings, "peaks", 3),
        )
    else:
        findings.append("peaks: expected a mapping")

    hs_doc = doc.get("hotspots", {})
    hotspots = HotspotsConfig()
    if isinstance(hs_doc, dict):
        raw_regions = hs_doc.get("regions")
        regions = None
        if raw_regions is not None:
            if not isinstance(raw_regions, str):
                findings.append(f"hotspots.regions: expected a path, got {raw_regions!r}")
                raw_regions = None
            else:
                regions = base_dir / raw_regions
        hotspots = HotspotsConfig(
            radius=_num(hs_doc, "radius", findings, "hotspots", 0.05,
                        minimum=0.0, strict_min=True),
            min_days=_int(hs_doc, "min_days", findings, "hotspots", 5),
            regions=regions, raw_regions=raw_regions,
        )
    else:
        findings.append("hotspots: expected a mapping")

    q_doc = doc.get("quantify", {})
    quantify = QuantifyConfig()
    if isinstance(q_doc, dict):
        period = q_doc.get("period", "year")
        if period not in PERIOD_GRANULARITIES:
            findings.append(
                f"quantify.period: must be one of {PERIOD_GRANULARITIES}, got {period!r}")
            period = "year"
        quantify = QuantifyConfig(
            radius=_num(q_doc, "radius", findings, "quantify", 0.05,
                        minimum=0.0, strict_min=True),
            period=period,
        )
    else:
        findings.append("quantify: expected a mapping")

    render_doc = doc.get("render")
    render = [RenderConfig()]
    if render_doc is not None:
        if not isinstance(render_doc, list):
            findings.append("render: expected a list of render specs")
        else:
            render = []
            for idx, r in enumerate(render_doc):
                where = f"render[{idx}]"
                if not isinstance(r, dict):
                    findings.append(f"{where}: expected a mapping")
                    continue
                layer = r.get("layer", "peaks-by-hotspot-color")
                if layer not in LAYERS:
                    findings.append(f"{where}.layer: must be one of {LAYERS}, got {layer!r}")
                    continue
                width = _int(r, "width", findings, where, 800, minimum=64)
                height = _int(r, "height", findings, where, 800, minimum=64)
                file = r.get("file", "")
                if not isinstance(file, str):
                    findings.append(f"{where}.file: expected a string")
                    file = ""
                bounds = None
                if "bounds" in r:
                    g = r["bounds"]
                    if (isinstance(g, list) and len(g) == 4
                            and all(isinstance(v, (int, float)) and not isinstance(v, bool)
                                    for v in g)):
                        bounds = tuple(float(v) for v in g)
                        if not (bounds[0] < bounds[1] and bounds[2] < bounds[3]):
                            findings.append(f"{where}.bounds: degenerate box {g}")
                            bounds = None
                    else:
                        findings.append(
                            f"{where}.bounds: expected [lon_min, lon_max, lat_min, lat_max]")
                render.append(RenderConfig(layer=layer, width=width, height=height,
                                           file=file, bounds=bounds))

    trace = doc.get("trace", False)
    if not isinstance(trace, bool):
        findings.append(f"trace: expected true/false, got {trace!r}")
        trace = False
    jobs = _int(doc, "jobs", findings, "config", 1)

    if findings:
        return None, findings
    cfg = RunConfig(
        output=base_dir / output_raw, input=input_cfg, synth_days=synth_days,
        gso=gso, peaks=peaks, hotspots=hotspots, quantify=quantify,
        render=render, trace=trace, jobs=jobs,
    )
    # synth mode stores its raster definition where the pipeline looks it up
    if synth_days is not None:
        if synth_geometry is None:
            return None, ["synth.geometry: required"]
        cfg.input = InputConfig(dir=Path("."), format="synth", geometry=synth_geometry)
    return cfg, findings


def load_config(path) -> RunConfig:
    """Parse and validate a config file; raises ConfigError with findings."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError([f"cannot read config: {e}"]) from None
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as e:
        raise ConfigError([f"config is not valid YAML: {e}"]) from None
    cfg, findings = parse_config(doc, path.parent)
    if cfg is None:
        raise ConfigError(findings)
    return cfg


def semantic_dict(cfg: RunConfig) -> dict:
    """The config fields that determine results (not where they are written).

    output directory and jobs are execution details; everything else feeds
    the hash recorded in the run manifest.
    """
    sem: dict = {
        "gso": {k: getattr(cfg.gso, k) for k in GsoParams.__dataclass_fields__},
        "peaks": {"link_radius": cfg.peaks.link_radius, "min_support": cfg.peaks.min_support},
        "hotspots": {"radius": cfg.hotspots.radius, "min_days": cfg.hotspots.min_days,
                     "regions": cfg.hotspots.raw_regions},
        "quantify": {"radius": cfg.quantify.radius, "period": cfg.quantify.period},
        "render": [
            {"layer": r.layer, "width": r.width, "height": r.height,
             "file": r.file, "bounds": list(r.bounds) if r.bounds else None}
            for r in cfg.render
        ],
        "trace": cfg.trace,
    }
    if cfg.synth_days is not None:
        sem["synth"] = {
            "geometry": cfg.input.geometry if cfg.input else None,
            "days": [
                {"date": d.date.isoformat(),
                 "modes": [[m.lon, m.lat, m.amplitude, m.sigma] for m in d.spec.modes],
                 "background": d.spec.background, "noise_sigma": d.spec.noise_sigma,
                 "seed": d.spec.seed}
                for d in cfg.synth_days
            ],
        }
    else:
        sem["input"] = {
            "dir": cfg.input.raw_dir if cfg.input else None,
            "format": cfg.input.format if cfg.input else None,
            "geometry": cfg.input.geometry if cfg.input else None,
        }
    return sem


def config_hash(cfg: RunConfig) -> str:
    payload = json.dumps(semantic_dict(cfg), sort_keys=True).encode()
    return hashlib.sha256(payload).hexdigest()
