"""CSV logging and SVG plots of trajectory records.

Both writers are byte-deterministic: floats use ``repr`` (shortest
round-tripping form) and the SVG carries no timestamps or random ids.
"""

from __future__ import annotations

import csv
import io
import math
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Tuple

from .experiments import RECORD_FIELDS, TrajectoryRecord

_INT_FIELDS = {"step"}
_STR_FIELDS = {"region"}
_OPTIONAL_FIELDS = {"R"}


def _format(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_csv(records: Iterable[TrajectoryRecord], path: str | Path, comment: Optional[str] = None) -> Path:
    """Write records as CSV with a header row in field declaration order.

    Args:
        records: Records to write, one row each.
        path: Destination file.
        comment: Optional text emitted first as a ``# ...`` line.

    Raises:
        OSError: if the file cannot be written; the message names the path.
    """
    path = Path(path)
    buf = io.StringIO()
    if comment is not None:
        for line in comment.splitlines():
            buf.write(f"# {line}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(RECORD_FIELDS)
    for rec in records:
        writer.writerow([_format(getattr(rec, name)) for name in RECORD_FIELDS])
    try:
        path.write_text(buf.getvalue(), encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot write CSV to {path}: {exc}") from exc
    return path


def _parse(name: str, text: str):
    if name in _STR_FIELDS:
        return text
    if name in _INT_FIELDS:
        return int(text)
    if name in _OPTIONAL_FIELDS and text == "":
        return None
    return float(text)


def read_csv(path: str | Path) -> List[TrajectoryRecord]:
    """Parse a file written by :func:`write_csv`, skipping ``#`` comment lines."""
    with open(path, encoding="utf-8", newline="") as fh:
        rows = [line for line in fh if not line.startswith("#")]
    reader = csv.DictReader(rows)
    if tuple(reader.fieldnames or ()) != RECORD_FIELDS:
        raise ValueError(f"{path}: unexpected header {reader.fieldnames!r}")
    return [TrajectoryRecord(**{k: _parse(k, v) for k, v in row.items()}) for row in reader]


# -- SVG ----------------------------------------------------------------------

_WIDTH, _HEIGHT = 640, 420
_MARGIN = (60, 20, 30, 50)  # left, right, top, bottom
_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd")


def _nice_range(lo: float, hi: float) -> Tuple[float, float]:
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise ValueError("cannot plot non-finite values")
    if hi - lo < 1e-12:
        pad = max(abs(lo), 1.0) * 0.05
        return lo - pad, hi + pad
    pad = (hi - lo) * 0.05
    return lo - pad, hi + pad


def _ticks(lo: float, hi: float, n: int = 5) -> List[float]:
    return [lo + (hi - lo) * i / (n - 1) for i in range(n)]


def _svg(
    title: str,
    xlabel: str,
    ylabel: str,
    series: Sequence[Tuple[str, Sequence[float], Sequence[float]]],
    equal_aspect: bool = False,
) -> str:
    xs = [x for _, sx, _ in series for x in sx]
    ys = [y for _, _, sy in series for y in sy]
    x0, x1 = _nice_range(min(xs), max(xs))
    y0, y1 = _nice_range(min(ys), max(ys))
    left, right, top, bottom = _MARGIN
    pw, ph = _WIDTH - left - right, _HEIGHT - top - bottom
    if equal_aspect:
        # widen the tighter axis so one meter has the same length on both
        scale = min(pw / (x1 - x0), ph / (y1 - y0))
        cx, cy = (x0 + x1) / 2, (y0 + y1) / 2
        x0, x1 = cx - pw / scale / 2, cx + pw / scale / 2
        y0, y1 = cy - ph / scale / 2, cy + ph / scale / 2

    def px(x: float) -> float:
        return left + (x - x0) / (x1 - x0) * pw

    def py(y: float) -> float:
        return top + (y1 - y) / (y1 - y0) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH}" height="{_HEIGHT}" '
        f'viewBox="0 0 {_WIDTH} {_HEIGHT}" font-family="sans-serif" font-size="11">',
        f"<title>{title}</title>",
        f'<rect x="0" y="0" width="{_WIDTH}" height="{_HEIGHT}" fill="white"/>',
        f'<g class="axes" stroke="black" fill="none">'
        f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}"/></g>',
    ]
    for xv in _ticks(x0, x1):
        out.append(f'<text x="{px(xv):.2f}" y="{top + ph + 15}" text-anchor="middle">{xv:.3g}</text>')
    for yv in _ticks(y0, y1):
        out.append(f'<text x="{left - 5}" y="{py(yv) + 4:.2f}" text-anchor="end">{yv:.3g}</text>')
    out.append(f'<text x="{left + pw / 2:.1f}" y="{_HEIGHT - 12}" text-anchor="middle">{xlabel}</text>')
    out.append(
        f'<text x="15" y="{top + ph / 2:.1f}" text-anchor="middle" '
        f'transform="rotate(-90 15 {top + ph / 2:.1f})">{ylabel}</text>'
    )
    out.append(f'<text x="{left + pw / 2:.1f}" y="18" text-anchor="middle" font-size="13">{title}</text>')
    for i, (name, sx, sy) in enumerate(series):
        color = _COLORS[i % len(_COLORS)]
        points = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in zip(sx, sy))
        out.append(
            f'<polyline class="series" data-name="{name}" fill="none" stroke="{color}" '
            f'stroke-width="1.5" points="{points}"/>'
        )
        ly = top + 14 + 14 * i
        out.append(f'<text x="{left + pw - 8}" y="{ly}" text-anchor="end" fill="{color}">{name}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_plot(
    records: Sequence[TrajectoryRecord],
    kind: str,
    path: str | Path,
    reference: Optional[Sequence[Tuple[float, float]]] = None,
) -> Path:
    """Render a run as an SVG file.

    ``orientation`` plots error and both motor powers against the step index.
    ``tracking`` plots the reference polyline (start pose through each
    waypoint, or ``reference`` when given) and the travelled (x, y) path.

    Raises:
        ValueError: on an empty record list or an unknown kind.
    """
    if not records:
        raise ValueError("cannot plot an empty record list")
    steps = [float(r.step) for r in records]
    if kind == "orientation":
        svg = _svg(
            "Heading regulation",
            "step",
            "error [deg] / power",
            [
                ("error", steps, [r.error for r in records]),
                ("power_left", steps, [r.power_left for r in records]),
                ("power_right", steps, [r.power_right for r in records]),
            ],
        )
    elif kind == "tracking":
        if reference is None:
            reference = [(records[0].x, records[0].y)]
        svg = _svg(
            "Path tracking",
            "x [m]",
            "y [m]",
            [
                ("reference", [p[0] for p in reference], [p[1] for p in reference]),
                ("actual", [r.x for r in records], [r.y for r in records]),
            ],
            equal_aspect=True,
        )
    else:
        raise ValueError(f"unknown plot kind {kind!r}; expected 'orientation' or 'tracking'")
    path = Path(path)
    try:
        path.write_text(svg, encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot write plot to {path}: {exc}") from exc
    return path
