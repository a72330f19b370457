"""Static SVG figures written as plain markup: clusters, tours, complexity bars."""

from __future__ import annotations

from html import escape
from pathlib import Path

import numpy as np

from .metrics import RunReport

PALETTE = (
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
)
PANEL = 420
MARGIN = 30


def _svg(width: int, height: int, body: list[str]) -> str:
    head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
            f'viewBox="0 0 {width} {height}" font-family="sans-serif">')
    return "\n".join([head, f'<rect width="{width}" height="{height}" fill="white"/>', *body, "</svg>"]) + "\n"


def _projector(xy: np.ndarray, ox: float, oy: float, size: float):
    lo = xy.min(axis=0)
    span = float(max((xy.max(axis=0) - lo).max(), 1e-12))
    scale = (size - 2 * MARGIN) / span

    def proj(p) -> tuple[float, float]:
        # screen y grows downward
        return ox + MARGIN + (p[0] - lo[0]) * scale, oy + size - MARGIN - (p[1] - lo[1]) * scale

    return proj


def clusters_svg(report: RunReport) -> str:
    inst, ps = report.instance, report.patterns
    xy = inst.xy
    proj = _projector(xy, 0, 20, PANEL)
    labels = ps.labels()
    body = [f'<text x="{PANEL / 2:.1f}" y="18" text-anchor="middle" font-size="13">'
            f'{escape(inst.name)}: {ps.k} clusters, coverage {ps.rho * 100:.2f}%</text>']
    for i, p in enumerate(xy):
        x, y = proj(p)
        lab = labels[i]
        if lab < 0:
            body.append(f'<circle class="uncovered" cx="{x:.2f}" cy="{y:.2f}" r="3.5" '
                        f'fill="none" stroke="black" stroke-width="1"/>')
        else:
            body.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="3" fill="{PALETTE[lab % len(PALETTE)]}"/>')
    for c in ps.clusters:
        x, y = proj(c.centroid)
        body.append(f'<path d="M{x - 4:.2f},{y - 4:.2f}L{x + 4:.2f},{y + 4:.2f}M{x - 4:.2f},{y + 4:.2f}'
                    f'L{x + 4:.2f},{y - 4:.2f}" stroke="black" stroke-width="1.5"/>')
    return _svg(PANEL, PANEL + 20, body)


def _tour_panel(xy: np.ndarray, tour, ox: float, title: str) -> list[str]:
    proj = _projector(xy, ox, 20, PANEL)
    pts = [proj(xy[c]) for c in list(tour) + [tour[0]]]
    path = " ".join(f"{x:.2f},{y:.2f}" for x, y in pts)
    out = [f'<text x="{ox + PANEL / 2:.1f}" y="18" text-anchor="middle" font-size="13">{escape(title)}</text>',
           f'<polyline points="{path}" fill="none" stroke="#1f77b4" stroke-width="1"/>']
    out += [f'<circle cx="{x:.2f}" cy="{y:.2f}" r="1.8" fill="black"/>' for x, y in pts[:-1]]
    return out


def tours_svg(report: RunReport) -> str:
    xy = report.instance.xy
    base = report.baseline
    best = min(report.results, key=lambda r: (r.length, list(type(r.solver)).index(r.solver)))
    body = _tour_panel(xy, base.tour, 0, f"{base.solver.label}: {base.length:.2f}")
    body += _tour_panel(xy, best.tour, PANEL, f"{best.solver.label}: {best.length:.2f}")
    return _svg(2 * PANEL, PANEL + 20, body)


def complexity_svg(report: RunReport) -> str:
    """Bars of ln C_base and ln C per solver (heights are logarithms, i.e. a log-scale chart)."""
    items = [("ln C_base", report.complexity.log_base)]
    items += [(f"ln C {s.label}", e.log_effective) for s, e in report.estimates.items()]
    width, height, top, bottom = 120 + 110 * len(items), 340, 40, 60
    hi = max(v for _, v in items) or 1.0
    scale = (height - top - bottom) / hi
    body = [f'<text x="{width / 2:.1f}" y="20" text-anchor="middle" font-size="13">'
            f'{escape(report.instance.name)}: complexity (natural log)</text>',
            f'<line x1="60" y1="{height - bottom}" x2="{width - 20}" y2="{height - bottom}" stroke="black"/>']
    for i, (name, v) in enumerate(items):
        h = max(v, 0.0) * scale
        x = 80 + 110 * i
        y = height - bottom - h
        color = "#7f7f7f" if i == 0 else PALETTE[i % len(PALETTE)]
        body.append(f'<rect x="{x}" y="{y:.2f}" width="70" height="{h:.2f}" fill="{color}"/>')
        body.append(f'<text x="{x + 35}" y="{y - 4:.2f}" text-anchor="middle" font-size="11">{v:.2f}</text>')
        body.append(f'<text x="{x + 35}" y="{height - bottom + 16}" text-anchor="middle" '
                    f'font-size="10">{escape(name)}</text>')
    return _svg(width, height, body)


def emit_plots(report: RunReport, out_dir: str | Path) -> set[Path]:
    """Write <name>_clusters.svg, and when tours exist, <name>_tours.svg and <name>_complexity.svg."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    name = report.instance.name
    figures = {f"{name}_clusters.svg": clusters_svg(report)}
    if report.results:
        figures[f"{name}_tours.svg"] = tours_svg(report)
        figures[f"{name}_complexity.svg"] = complexity_svg(report)
    written = set()
    for fname, text in figures.items():
        path = out / fname
        path.write_text(text, encoding="utf-8")
        written.add(path)
    return written
