"""CSV, JSON manifest and minimal SVG writers for command output.

Numbers are written with ``repr`` precision so identical inputs give
byte-identical files.
"""

import csv
import json
import math
import os
from dataclasses import dataclass, field
from datetime import datetime, timezone


def fmt(value):
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(v) for v in row])


def write_json(path, payload):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


@dataclass
class RunManifest:
    command: str
    parameters: dict
    seed: int
    tool_version: str
    timestamp: str = field(
        default_factory=lambda: datetime.now(timezone.utc).isoformat(timespec="seconds")
    )
    outputs: list = field(default_factory=list)

    def as_dict(self):
        return {
            "command": self.command,
            "parameters": self.parameters,
            "seed": self.seed,
            "tool_version": self.tool_version,
            "timestamp": self.timestamp,
            "outputs": self.outputs,
        }

    def write(self, out_dir, stem):
        path = os.path.join(out_dir, f"{stem}.manifest.json")
        write_json(path, self.as_dict())
        return path


def svg_line_plot(series, title="", xlabel="", ylabel="", logx=False, logy=False,
                  width=640, height=400):
    """Self-contained SVG with one polyline per ``label -> (xs, ys)`` entry."""
    palette = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"]

    def tx(v, log):
        if log:
            return math.log10(v) if v > 0 else None
        return v

    pts = {}
    for label, (xs, ys) in series.items():
        pair = [(tx(x, logx), tx(y, logy)) for x, y in zip(xs, ys)]
        pts[label] = [(a, b) for a, b in pair
                      if a is not None and b is not None and math.isfinite(a) and math.isfinite(b)]
    every = [p for ps in pts.values() for p in ps]
    if not every:
        every = [(0.0, 0.0), (1.0, 1.0)]
    x0, x1 = min(p[0] for p in every), max(p[0] for p in every)
    y0, y1 = min(p[1] for p in every), max(p[1] for p in every)
    x1 = x1 if x1 > x0 else x0 + 1.0
    y1 = y1 if y1 > y0 else y0 + 1.0
    left, right, top, bottom = 70, 20, 30, 50
    pw, ph = width - left - right, height - top - bottom

    def sx(v):
        return left + (v - x0) / (x1 - x0) * pw

    def sy(v):
        return top + ph - (v - y0) / (y1 - y0) * ph

    def tick(v, log):
        return f"1e{v:.3g}" if log else f"{v:.4g}"

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        'font-family="sans-serif" font-size="11">',
        f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="#000"/>',
        f'<text x="{width / 2}" y="18" text-anchor="middle">{title}</text>',
        f'<text x="{left + pw / 2}" y="{height - 10}" text-anchor="middle">{xlabel}</text>',
        f'<text x="14" y="{top + ph / 2}" text-anchor="middle" '
        f'transform="rotate(-90 14 {top + ph / 2})">{ylabel}</text>',
        f'<text x="{left}" y="{top + ph + 15}" text-anchor="middle">{tick(x0, logx)}</text>',
        f'<text x="{left + pw}" y="{top + ph + 15}" text-anchor="middle">{tick(x1, logx)}</text>',
        f'<text x="{left - 4}" y="{top + ph}" text-anchor="end">{tick(y0, logy)}</text>',
        f'<text x="{left - 4}" y="{top + 8}" text-anchor="end">{tick(y1, logy)}</text>',
    ]
    for i, (label, ps) in enumerate(pts.items()):
        colour = palette[i % len(palette)]
        coords = " ".join(f"{sx(a):.2f},{sy(b):.2f}" for a, b in ps)
        out.append(f'<polyline fill="none" stroke="{colour}" stroke-width="1.2" points="{coords}"/>')
        out.append(f'<text x="{left + pw - 4}" y="{top + 14 + 13 * i}" text-anchor="end" '
                   f'fill="{colour}">{label}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_svg(path, series, **kwargs):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(svg_line_plot(series, **kwargs))
