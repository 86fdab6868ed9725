"""Grouped bar charts as plain SVG text.

Output is a pure function of the numbers passed in: fixed canvas layout,
fixed number formatting, no timestamps or ids.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from html import escape
from pathlib import Path

COLORS = ("#4c72b0", "#dd8452", "#55a868", "#c44e52")


class PlotKind(str, Enum):
    GAIT_DURATION = "GaitDurationBars"
    STEP_COUNT = "StepCountBars"
    STANCE_PCT = "StancePctBars"
    SWING_PCT = "SwingPctBars"


PLOT_FILES = {
    PlotKind.GAIT_DURATION: "gait_duration.svg",
    PlotKind.STEP_COUNT: "step_count.svg",
    PlotKind.STANCE_PCT: "stance_pct.svg",
    PlotKind.SWING_PCT: "swing_pct.svg",
}


@dataclass(frozen=True)
class PlotSpec:
    kind: PlotKind
    path: Path


def _nice_max(v: float) -> float:
    if v <= 0:
        return 1.0
    for step in (1, 2, 5, 10, 20, 25, 50, 100, 200, 500, 1000):
        top = step * -(-v // step)
        if top / step <= 10:
            return float(top)
    return float(v)


def grouped_bars_svg(title: str, ylabel: str, groups: list[str], series: dict[str, list[float]],
                     y_min: float = 0.0) -> str:
    width_per_group = max(24, 14 * len(series) + 12)
    left, right, top, bottom = 60, 20, 40, 60
    plot_w = max(300, width_per_group * len(groups))
    plot_h = 240
    W, H = left + plot_w + right, top + plot_h + bottom
    values = [v for vals in series.values() for v in vals]
    y_max = _nice_max(max(values) if values else 1.0)
    if y_max <= y_min:
        y_max = y_min + 1.0

    def y(v):
        return top + plot_h * (1.0 - (min(max(v, y_min), y_max) - y_min) / (y_max - y_min))

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">',
        f'<rect x="0" y="0" width="{W}" height="{H}" fill="#ffffff"/>',
        f'<text x="{W / 2:.1f}" y="22" font-family="sans-serif" font-size="14" text-anchor="middle">'
        f'{escape(title)}</text>',
        f'<line x1="{left}" y1="{top + plot_h}" x2="{left + plot_w}" y2="{top + plot_h}" stroke="#000000"/>',
        f'<line x1="{left}" y1="{top}" x2="{left}" y2="{top + plot_h}" stroke="#000000"/>',
    ]
    for i in range(6):
        v = y_min + (y_max - y_min) * i / 5
        yy = y(v)
        out.append(f'<line x1="{left - 4}" y1="{yy:.1f}" x2="{left}" y2="{yy:.1f}" stroke="#000000"/>')
        out.append(f'<text x="{left - 6}" y="{yy + 4:.1f}" font-family="sans-serif" font-size="10" '
                   f'text-anchor="end">{v:.1f}</text>')
    out.append(f'<text x="14" y="{top + plot_h / 2:.1f}" font-family="sans-serif" font-size="11" '
               f'text-anchor="middle" transform="rotate(-90 14 {top + plot_h / 2:.1f})">{escape(ylabel)}</text>')

    gw = plot_w / max(len(groups), 1)
    bw = min(28.0, (gw - 8) / max(len(series), 1))
    for gi, g in enumerate(groups):
        x0 = left + gi * gw + (gw - bw * len(series)) / 2
        for si, (name, vals) in enumerate(series.items()):
            if gi >= len(vals):
                continue
            v = vals[gi]
            yy = y(v)
            out.append(f'<rect x="{x0 + si * bw:.1f}" y="{yy:.1f}" width="{bw - 1:.1f}" '
                       f'height="{top + plot_h - yy:.1f}" fill="{COLORS[si % len(COLORS)]}">'
                       f'<title>{escape(name)} {escape(g)}: {v:.2f}</title></rect>')
        out.append(f'<text x="{left + gi * gw + gw / 2:.1f}" y="{top + plot_h + 14}" font-family="sans-serif" '
                   f'font-size="10" text-anchor="middle">{escape(g)}</text>')
    lx = left
    for si, name in enumerate(series):
        out.append(f'<rect x="{lx}" y="{H - 22}" width="10" height="10" fill="{COLORS[si % len(COLORS)]}"/>')
        out.append(f'<text x="{lx + 14}" y="{H - 13}" font-family="sans-serif" font-size="11">{escape(name)}</text>')
        lx += 14 + 8 * len(name) + 20
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _by_trial(trials: list[dict], key: str) -> list[float]:
    return [float(tr[key]) for tr in trials]


def plot_svg(kind: PlotKind, report: dict) -> str:
    """Render one figure from a comparison report dict (see ``StatReport``)."""
    ta, tb = report["trials_a"], report["trials_b"]
    labels = [tr["label"] for tr in (ta if len(ta) >= len(tb) else tb)]
    kind = PlotKind(kind)
    if kind == PlotKind.GAIT_DURATION:
        return grouped_bars_svg("Gait duration", "duration [s]", labels,
                                {"Condition A": _by_trial(ta, "gait_duration"),
                                 "Condition B": _by_trial(tb, "gait_duration")})
    if kind == PlotKind.STEP_COUNT:
        return grouped_bars_svg("Number of steps", "steps", labels,
                                {"Condition A": _by_trial(ta, "step_count"),
                                 "Condition B": _by_trial(tb, "step_count")})
    feat = "stance" if kind == PlotKind.STANCE_PCT else "swing"
    groups, sa, sb = [], [], []
    for i, lab in enumerate(labels):
        for leg, short in (("left", "L"), ("right", "R")):
            groups.append(f"{lab} {short}")
            sa.append(float(ta[i][f"mean_{feat}_pct_{leg}"]) if i < len(ta) else 0.0)
            sb.append(float(tb[i][f"mean_{feat}_pct_{leg}"]) if i < len(tb) else 0.0)
    title = "Average stance phase percentage" if feat == "stance" else "Average swing phase percentage"
    return grouped_bars_svg(title, f"{feat} [% of stride]", groups, {"Condition A": sa, "Condition B": sb})


def write_plots(report: dict, out_dir: str | Path) -> list[PlotSpec]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    specs = []
    for kind, name in PLOT_FILES.items():
        spec = PlotSpec(kind, out / name)
        spec.path.write_text(plot_svg(kind, report))
        specs.append(spec)
    return specs
