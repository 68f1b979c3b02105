"""Graphique SVG statique : courbes de bornes en échelle log et points empiriques."""

import math
from dataclasses import dataclass, field
from pathlib import Path
from xml.sax.saxutils import escape

from ..audit.logreal import LogReal

WIDTH, HEIGHT = 720, 480
MARGIN_LEFT, MARGIN_RIGHT, MARGIN_TOP, MARGIN_BOTTOM = 70, 160, 30, 50
FLOOR_DECADES = 12  # Axe y tronqué à 10^-12
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf")


@dataclass
class Curve:
    label: str
    points: list[tuple[float, LogReal]] = field(default_factory=list)
    dashed: bool = False


@dataclass
class EmpiricalPoint:
    label: str
    p: float
    p_hat: float
    ci_low: float
    ci_high: float


def _log10(value: float, floor: float) -> float:
    return floor if value <= 0 else max(floor, math.log10(value))


def render_svg(curves: list[Curve], points: list[EmpiricalPoint], title: str = "") -> str:
    """Construit le document SVG.

    L'axe x couvre les p des courbes et des points ; l'axe y est log10 de la
    probabilité, de 10^-FLOOR_DECADES (ou du plus petit point) à 1.
    """
    xs = [p for c in curves for p, _ in c.points] + [pt.p for pt in points]
    lo_x, hi_x = (min(xs), max(xs)) if xs else (0.0, 0.5)
    if hi_x <= lo_x:
        lo_x, hi_x = lo_x - 0.01, hi_x + 0.01
    logs = [v.log10() for c in curves for _, v in c.points if v.log > -math.inf]
    logs += [math.log10(pt.ci_low) for pt in points if pt.ci_low > 0]
    floor = -float(FLOOR_DECADES)
    low_y = max(floor, math.floor(min(logs))) if logs else -3.0
    low_y = min(low_y, -1.0)

    plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT
    plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM

    def sx(p: float) -> float:
        return MARGIN_LEFT + (p - lo_x) / (hi_x - lo_x) * plot_w

    def sy(decade: float) -> float:
        return MARGIN_TOP + (0.0 - decade) / (0.0 - low_y) * plot_h

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2:.1f}" y="18" text-anchor="middle" font-size="13">{escape(title)}</text>',
        f'<rect x="{MARGIN_LEFT}" y="{MARGIN_TOP}" width="{plot_w}" height="{plot_h}" '
        'fill="none" stroke="#444"/>',
    ]

    # Axes
    for decade in range(int(low_y), 1):
        y = sy(decade)
        parts.append(
            f'<line x1="{MARGIN_LEFT}" y1="{y:.1f}" x2="{MARGIN_LEFT + plot_w}" y2="{y:.1f}" '
            'stroke="#ddd"/>'
        )
        parts.append(
            f'<text x="{MARGIN_LEFT - 6}" y="{y + 4:.1f}" text-anchor="end">1e{decade}</text>'
        )
    for i in range(6):
        p = lo_x + (hi_x - lo_x) * i / 5
        x = sx(p)
        parts.append(
            f'<text x="{x:.1f}" y="{MARGIN_TOP + plot_h + 16}" text-anchor="middle">{p:.3g}</text>'
        )
    parts.append(
        f'<text x="{MARGIN_LEFT + plot_w / 2:.1f}" y="{HEIGHT - 10}" text-anchor="middle">p</text>'
    )

    # Courbes
    legend: list[tuple[str, str]] = []
    for i, curve in enumerate(curves):
        if not curve.points:
            continue
        color = PALETTE[i % len(PALETTE)]
        path = " ".join(
            f"{'M' if k == 0 else 'L'}{sx(p):.1f},{sy(max(low_y, v.log10())):.1f}"
            for k, (p, v) in enumerate(curve.points)
        )
        dash = ' stroke-dasharray="5,3"' if curve.dashed else ""
        parts.append(f'<path d="{path}" fill="none" stroke="{color}" stroke-width="1.5"{dash}/>')
        legend.append((curve.label, color))

    # Points et intervalles
    for pt in points:
        x = sx(pt.p)
        top, bottom = sy(_log10(pt.ci_high, low_y)), sy(_log10(pt.ci_low, low_y))
        parts.append(f'<line x1="{x:.1f}" y1="{top:.1f}" x2="{x:.1f}" y2="{bottom:.1f}" stroke="black"/>')
        parts.append(
            f'<circle cx="{x:.1f}" cy="{sy(_log10(pt.p_hat, low_y)):.1f}" r="3" fill="black">'
            f"<title>{escape(pt.label)}</title></circle>"
        )
    if points:
        legend.append(("empirique (IC)", "black"))

    for i, (label, color) in enumerate(legend):
        y = MARGIN_TOP + 14 + 16 * i
        x = MARGIN_LEFT + plot_w + 10
        parts.append(f'<line x1="{x}" y1="{y - 4}" x2="{x + 18}" y2="{y - 4}" stroke="{color}" stroke-width="2"/>')
        parts.append(f'<text x="{x + 24}" y="{y}">{escape(label)}</text>')

    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def write_svg(path: Path, curves: list[Curve], points: list[EmpiricalPoint], title: str = "") -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(render_svg(curves, points, title), encoding="utf-8")
    return path
