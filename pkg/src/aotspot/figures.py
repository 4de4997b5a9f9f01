"""Matplotlib report figures written alongside the delimited outputs."""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .hotspots import HotSpot
from .io_render import PALETTE, hotspot_color, peak_assignment
from .peaks import Peak

_PNG_META = {"Software": "aotspot"}


def write_peak_map(peaks: list[Peak], hotspots: list[HotSpot], path,
                   bounds: tuple[float, float, float, float]) -> None:
    """Scatter of all peaks, colored by hot-spot membership (black = none)."""
    assignment = peak_assignment(hotspots)
    fig, ax = plt.subplots(figsize=(6, 6))
    unassigned = [p for p in peaks if id(p) not in assignment]
    if unassigned:
        ax.scatter([p.lon for p in unassigned], [p.lat for p in unassigned],
                   s=12, c="#000000", label="unassigned")
    for h in hotspots:
        ax.scatter([p.lon for p in h.member_peaks], [p.lat for p in h.member_peaks],
                   s=12, c=hotspot_color(h.id), label=f"{h.id} {h.name}".rstrip())
        ax.plot(h.centroid[0], h.centroid[1], marker="x", c="#333333", ms=8)
    ax.set_xlim(bounds[0], bounds[1])
    ax.set_ylim(bounds[2], bounds[3])
    ax.set_xlabel("longitude")
    ax.set_ylabel("latitude")
    ax.set_title("peak locations by hot-spot")
    if len(hotspots) <= 12:
        ax.legend(fontsize=8, loc="upper right")
    fig.tight_layout()
    fig.savefig(path, dpi=120, metadata=_PNG_META)
    plt.close(fig)


def write_hotspot_averages(rows: list[tuple[int, str, float | None, int]], path) -> None:
    """Grouped bars: average regional value per hot-spot per period."""
    periods = sorted({r[1] for r in rows})
    hids = sorted({r[0] for r in rows})
    by_key = {(r[0], r[1]): r[2] for r in rows}
    fig, ax = plt.subplots(figsize=(max(6, 0.8 * len(hids) * max(1, len(periods))), 4))
    width = 0.8 / max(1, len(periods))
    for j, period in enumerate(periods):
        xs, ys = [], []
        for i, hid in enumerate(hids):
            avg = by_key.get((hid, period))
            if avg is None:
                continue
            xs.append(i + j * width)
            ys.append(avg)
        ax.bar(xs, ys, width=width, label=period,
               color=PALETTE[j % len(PALETTE)], align="edge")
    ax.set_xticks([i + 0.4 for i in range(len(hids))])
    ax.set_xticklabels([str(h) for h in hids])
    ax.set_xlabel("hot-spot id")
    ax.set_ylabel("average regional value")
    ax.set_title("hot-spot averages by period")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120, metadata=_PNG_META)
    plt.close(fig)
