"""Deterministic file emitters: CSV tables, JSON documents, SVG diagrams.

Every float is printed with 17 significant digits so regression goldens are
exact and repeated runs are byte-identical.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field


def fmt(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, int):
        return str(x)
    if isinstance(x, float):
        if math.isnan(x):
            return "NaN"
        if math.isinf(x):
            return "Infinity" if x > 0 else "-Infinity"
        return f"{x:.17g}"
    return str(x)


def json_dumps(obj, indent: int = 0) -> str:
    """Minimal JSON writer with fixed float formatting and insertion order."""
    pad = "  " * indent
    inner = "  " * (indent + 1)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        parts = [f'{inner}"{k}": {json_dumps(v, indent + 1)}' for k, v in obj.items()]
        return "{\n" + ",\n".join(parts) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        parts = [f"{inner}{json_dumps(v, indent + 1)}" for v in obj]
        return "[\n" + ",\n".join(parts) + "\n" + pad + "]"
    if obj is None:
        return "null"
    if isinstance(obj, str):
        escaped = obj.replace("\\", "\\\\").replace('"', '\\"')
        return f'"{escaped}"'
    return fmt(obj)


@dataclass
class DiagramTable:
    """Ordered rows of named columns, the common currency of the CLI."""

    columns: list[str]
    rows: list[list] = field(default_factory=list)

    def add(self, *values):
        if len(values) != len(self.columns):
            raise ValueError("row width does not match column schema")
        self.rows.append(list(values))

    def to_csv(self) -> str:
        lines = [",".join(self.columns)]
        for row in self.rows:
            lines.append(",".join(fmt(v) for v in row))
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        return json_dumps({"columns": self.columns, "rows": self.rows}) + "\n"


def parse_table_csv(text: str) -> DiagramTable:
    lines = [ln for ln in text.splitlines() if ln]
    table = DiagramTable(columns=lines[0].split(","))
    for ln in lines[1:]:
        cells = []
        for cell in ln.split(","):
            try:
                cells.append(float(cell))
            except ValueError:
                cells.append(cell)
        table.rows.append(cells)
    return table


def svg_xy_plot(xs, ys, xlabel: str, ylabel: str, ref_y: float | None = None,
                width: int = 640, height: int = 480) -> str:
    """Hand-emitted scatter-plus-line SVG; no plotting dependency."""
    margin = 70.0
    if not xs:
        raise ValueError("nothing to plot")
    xmin, xmax = min(xs), max(xs)
    ys_all = list(ys) + ([ref_y] if ref_y is not None else [])
    ymin, ymax = min(ys_all), max(ys_all)
    xpad = (xmax - xmin) or 1.0
    ypad = (ymax - ymin) or 1.0
    xmin -= 0.05 * xpad
    xmax += 0.05 * xpad
    ymin -= 0.05 * ypad
    ymax += 0.05 * ypad

    def sx(x):
        return margin + (x - xmin) / (xmax - xmin) * (width - 2 * margin)

    def sy(y):
        return height - margin - (y - ymin) / (ymax - ymin) * (height - 2 * margin)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{margin:.2f}" y1="{height - margin:.2f}" '
        f'x2="{width - margin:.2f}" y2="{height - margin:.2f}" stroke="black"/>',
        f'<line x1="{margin:.2f}" y1="{margin:.2f}" x2="{margin:.2f}" '
        f'y2="{height - margin:.2f}" stroke="black"/>',
    ]
    if ref_y is not None:
        parts.append(
            f'<line x1="{margin:.2f}" y1="{sy(ref_y):.2f}" '
            f'x2="{width - margin:.2f}" y2="{sy(ref_y):.2f}" '
            'stroke="gray" stroke-dasharray="6 4"/>')
    pts = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in zip(xs, ys))
    parts.append(f'<polyline points="{pts}" fill="none" stroke="steelblue" '
                 'stroke-width="1.5"/>')
    for x, y in zip(xs, ys):
        parts.append(f'<circle cx="{sx(x):.2f}" cy="{sy(y):.2f}" r="3" '
                     'fill="steelblue"/>')
    parts.append(f'<text x="{width / 2:.0f}" y="{height - 20}" '
                 f'text-anchor="middle" font-size="14">{xlabel}</text>')
    parts.append(f'<text x="20" y="{height / 2:.0f}" text-anchor="middle" '
                 f'font-size="14" transform="rotate(-90 20 {height / 2:.0f})">'
                 f'{ylabel}</text>')
    for val, xpos in ((xmin, margin), (xmax, width - margin)):
        parts.append(f'<text x="{xpos:.0f}" y="{height - margin + 20:.0f}" '
                     f'text-anchor="middle" font-size="11">{val:.6g}</text>')
    for val, ypos in ((ymin, height - margin), (ymax, margin)):
        parts.append(f'<text x="{margin - 8:.0f}" y="{ypos:.0f}" '
                     f'text-anchor="end" font-size="11">{val:.6g}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
