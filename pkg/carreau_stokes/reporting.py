"""
reporting: CSV tables, log-log SVG plots and YAML metadata of convergence series
"""

import csv
import logging
import math
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import yaml
from jinja2 import Template

from .stokes_types import (ERROR_FAMILIES, ConvergenceReport, ConvergenceRow, ReportError, RunStatus,
                           format_number)

logger = logging.getLogger(__name__)

CSV_COLUMNS = ("level", "h", "ndof_u", "ndof_p", "ndof_t", "iters") + ERROR_FAMILIES
CSV_HEADER = ",".join(CSV_COLUMNS)
REFERENCE_FAMILY = "err_u_w1s"

FAMILY_STYLE = {
    "err_u_l2": ("#1f77b4", "velocity L2"),
    "err_u_w1s": ("#d62728", "velocity W1,s"),
    "err_pi": ("#2ca02c", "pressure Ls'"),
    "err_t_h1": ("#9467bd", "temperature H1"),
}

PathLike = Union[str, Path]


def format_csv(report: ConvergenceReport) -> str:
    """Header plus one row per level, status as the last column"""
    lines = [CSV_HEADER + ",status"]
    for row in report.rows:
        cells = [str(row.level), format_number(row.h), str(row.ndof_u), str(row.ndof_p),
                 str(row.ndof_t), str(row.iters)]
        cells += [format_number(row.error(f)) for f in ERROR_FAMILIES]
        cells.append(str(int(row.status)))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def emit_csv(report: ConvergenceReport, path: PathLike) -> None:
    path = Path(path)
    path.write_text(format_csv(report), encoding="utf-8", newline="")
    logger.debug(f"Wrote {len(report.rows)} rows to {path}")


def read_csv(path: PathLike) -> List[ConvergenceRow]:
    """Parse a file written by emit_csv back into rows"""
    rows = []
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.DictReader(handle)
        missing = [c for c in CSV_COLUMNS if c not in (reader.fieldnames or [])]
        if missing:
            raise ReportError(f"{path}: missing columns {missing}")
        for record in reader:
            rows.append(ConvergenceRow(
                level=int(record["level"]), h=float(record["h"]),
                ndof_u=int(record["ndof_u"]), ndof_p=int(record["ndof_p"]),
                ndof_t=int(record["ndof_t"]), iters=int(record["iters"]),
                **{f: float(record[f]) for f in ERROR_FAMILIES},
                status=RunStatus(int(record.get("status") or 0)),
            ))
    return rows


def write_metadata(report: ConvergenceReport, path: PathLike) -> None:
    payload = {"label": report.label, **_plain(report.metadata)}
    with open(path, "w", encoding="utf-8") as handle:
        yaml.safe_dump(payload, handle, sort_keys=False, default_flow_style=False)


def _plain(value):
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, float) and math.isnan(value):
        return None
    if hasattr(value, "item"):
        return value.item()
    return value


# SVG


SVG_TEMPLATE = Template("""<?xml version="1.0" encoding="UTF-8"?>
<svg xmlns="http://www.w3.org/2000/svg" width="{{ width }}" height="{{ height }}" viewBox="0 0 {{ width }} {{ height }}">
  <title>{{ title }}</title>
  <rect x="{{ left }}" y="{{ top }}" width="{{ plot_w }}" height="{{ plot_h }}" fill="none" stroke="#000"/>
{% for tick in xticks %}
  <line x1="{{ tick.pos }}" y1="{{ top + plot_h }}" x2="{{ tick.pos }}" y2="{{ top + plot_h + 5 }}" stroke="#000"/>
  <text class="xtick" x="{{ tick.pos }}" y="{{ top + plot_h + 20 }}" text-anchor="middle" data-exponent="{{ tick.exponent }}">1e{{ tick.exponent }}</text>
{% endfor %}
{% for tick in yticks %}
  <line x1="{{ left - 5 }}" y1="{{ tick.pos }}" x2="{{ left }}" y2="{{ tick.pos }}" stroke="#000"/>
  <text class="ytick" x="{{ left - 8 }}" y="{{ tick.pos + 4 }}" text-anchor="end" data-exponent="{{ tick.exponent }}">1e{{ tick.exponent }}</text>
{% endfor %}
  <text x="{{ left + plot_w / 2 }}" y="{{ height - 8 }}" text-anchor="middle">h</text>
  <text x="14" y="{{ top + plot_h / 2 }}" text-anchor="middle" transform="rotate(-90 14 {{ top + plot_h / 2 }})">error</text>
{% for series in lines %}
  <polyline class="family" data-family="{{ series.family }}" fill="none" stroke="{{ series.color }}" stroke-width="1.5" points="{{ series.points }}"/>
  <text x="{{ left + plot_w + 10 }}" y="{{ top + 16 + loop.index0 * 18 }}" fill="{{ series.color }}">{{ series.label }}</text>
{% endfor %}
{% if reference %}
  <polyline class="reference" fill="none" stroke="#555" stroke-width="1" stroke-dasharray="2,3" points="{{ reference.points }}"/>
  <text class="slope" x="{{ reference.x }}" y="{{ reference.y }}" fill="#555">slope {{ reference.slope }}</text>
{% endif %}
</svg>
""", autoescape=True)


def _log_range(values: Sequence[float]) -> Tuple[int, int]:
    logs = [math.log10(v) for v in values]
    lo, hi = math.floor(min(logs)), math.ceil(max(logs))
    if hi == lo:
        hi += 1
    return lo, hi


def reference_slope(report: ConvergenceReport, family: str = REFERENCE_FAMILY) -> float:
    """Log ratio of the two finest successful levels

    Raises:
        ReportError: if fewer than two successful levels carry a positive error
    """
    rows = [r for r in report.successful_rows() if r.error(family) > 0 and r.h > 0]
    if len(rows) < 2:
        raise ReportError(f"{report.label}: fewer than 2 successful levels for {family}")
    a, b = rows[-2], rows[-1]
    return math.log(a.error(family) / b.error(family)) / math.log(a.h / b.h)


def emit_loglog_svg(report: ConvergenceReport, path: PathLike,
                    reference: Optional[ConvergenceReport] = None) -> None:
    """Log-log plot of every error family against h

    The dotted reference line takes its slope from the two finest levels of
    `reference` (the sigma=0 series of the same p) and is anchored at the
    finest point of this series.

    Raises:
        ReportError: fewer than 2 successful levels
    """
    rows = report.successful_rows()
    if len(rows) < 2:
        raise ReportError(f"{report.label}: need at least 2 successful levels, got {len(rows)}")

    curves: Dict[str, List[Tuple[float, float]]] = {}
    for family in ERROR_FAMILIES:
        pts = [(r.h, r.error(family)) for r in rows if r.error(family) > 0]
        if len(pts) >= 2:
            curves[family] = pts
    if not curves:
        raise ReportError(f"{report.label}: no error family has two positive values")

    try:
        slope = reference_slope(reference or report)
    except ReportError:
        slope = reference_slope(report, next(iter(curves)))

    width, height, left, top, right, bottom = 640, 440, 70, 20, 150, 50
    plot_w, plot_h = width - left - right, height - top - bottom

    anchor_family = REFERENCE_FAMILY if REFERENCE_FAMILY in curves else next(iter(curves))
    h1, e1 = curves[anchor_family][-1]
    h0 = curves[anchor_family][0][0]
    e0 = e1 * (h0 / h1) ** slope

    hs = [h for pts in curves.values() for h, _ in pts]
    es = [e for pts in curves.values() for _, e in pts] + [e0]
    xlo, xhi = _log_range(hs)
    ylo, yhi = _log_range(es)

    def px(h: float) -> float:
        return round(left + (math.log10(h) - xlo) / (xhi - xlo) * plot_w, 3)

    def py(e: float) -> float:
        return round(top + (yhi - math.log10(e)) / (yhi - ylo) * plot_h, 3)

    lines = []
    for family, pts in curves.items():
        color, label = FAMILY_STYLE[family]
        lines.append({
            "family": family, "color": color, "label": label,
            "points": " ".join(f"{px(h)},{py(e)}" for h, e in pts),
        })

    ref = {
        "points": f"{px(h0)},{py(e0)} {px(h1)},{py(e1)}",
        "x": px(h1) + 4, "y": py(e1) + 14,
        "slope": f"{slope:.2f}",
    }

    svg = SVG_TEMPLATE.render(
        title=report.label, width=width, height=height, left=left, top=top,
        plot_w=plot_w, plot_h=plot_h, lines=lines, reference=ref,
        xticks=[{"pos": px(10.0 ** k), "exponent": k} for k in range(xlo, xhi + 1)],
        yticks=[{"pos": py(10.0 ** k), "exponent": k} for k in range(ylo, yhi + 1)],
    )
    Path(path).write_text(svg, encoding="utf-8")
    logger.debug(f"Wrote plot {path} (reference slope {slope:.2f})")
