"""Self-contained SVG scatter plot of the coarse and refined fronts.

No plotting runtime: the figure is a static front display, so the file is
assembled directly as SVG markup.
"""

from __future__ import annotations

from pathlib import Path
from xml.sax.saxutils import escape

WIDTH, HEIGHT = 760, 540
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 80, 170, 50, 60

Point = tuple[float, float]


def _ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    if hi <= lo:
        hi = lo + 1.0
    step = (hi - lo) / (n - 1)
    return [lo + i * step for i in range(n)]


def write_front_svg(
    path: str | Path,
    p1_points: list[Point],
    p2_points: list[Point],
    merged_points: list[Point],
    anchors: dict[str, Point] | None = None,
    title: str = "Pruning fronts",
) -> None:
    """Scatter of both fronts, the merged survivors, and the anchor pair."""
    anchors = anchors or {}
    all_pts = list(p1_points) + list(p2_points) + list(merged_points) + list(anchors.values())
    if all_pts:
        x_max = max(p[0] for p in all_pts) * 1.05 or 1.0
        y_max = max(0.05, max(p[1] for p in all_pts) * 1.1)
    else:
        x_max, y_max = 1.0, 1.0
    plot_w = WIDTH - MARGIN_L - MARGIN_R
    plot_h = HEIGHT - MARGIN_T - MARGIN_B

    def sx(x: float) -> float:
        return MARGIN_L + (x / x_max) * plot_w

    def sy(y: float) -> float:
        return MARGIN_T + plot_h - (y / y_max) * plot_h

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2:.1f}" y="28" text-anchor="middle" font-size="16" '
        f'font-family="sans-serif">{escape(title)}</text>',
    ]
    # axes
    parts.append(
        f'<line x1="{MARGIN_L}" y1="{MARGIN_T + plot_h}" x2="{MARGIN_L + plot_w}" '
        f'y2="{MARGIN_T + plot_h}" stroke="black"/>'
    )
    parts.append(
        f'<line x1="{MARGIN_L}" y1="{MARGIN_T}" x2="{MARGIN_L}" y2="{MARGIN_T + plot_h}" '
        f'stroke="black"/>'
    )
    for tx in _ticks(0.0, x_max):
        parts.append(
            f'<line x1="{sx(tx):.1f}" y1="{MARGIN_T + plot_h}" x2="{sx(tx):.1f}" '
            f'y2="{MARGIN_T + plot_h + 5}" stroke="black"/>'
        )
        parts.append(
            f'<text x="{sx(tx):.1f}" y="{MARGIN_T + plot_h + 20}" text-anchor="middle" '
            f'font-size="11" font-family="sans-serif">{tx:.0f}</text>'
        )
    for ty in _ticks(0.0, y_max):
        parts.append(
            f'<line x1="{MARGIN_L - 5}" y1="{sy(ty):.1f}" x2="{MARGIN_L}" y2="{sy(ty):.1f}" '
            f'stroke="black"/>'
        )
        parts.append(
            f'<text x="{MARGIN_L - 9}" y="{sy(ty) + 4:.1f}" text-anchor="end" '
            f'font-size="11" font-family="sans-serif">{ty:.3f}</text>'
        )
    parts.append(
        f'<text x="{MARGIN_L + plot_w / 2:.1f}" y="{HEIGHT - 14}" text-anchor="middle" '
        f'font-size="13" font-family="sans-serif">nonzero weights</text>'
    )
    parts.append(
        f'<text x="22" y="{MARGIN_T + plot_h / 2:.1f}" text-anchor="middle" font-size="13" '
        f'font-family="sans-serif" transform="rotate(-90 22 {MARGIN_T + plot_h / 2:.1f})">'
        f'error</text>'
    )
    # merged survivors first so phase markers stay visible on top
    for x, y in merged_points:
        parts.append(
            f'<circle cx="{sx(x):.1f}" cy="{sy(y):.1f}" r="8" fill="none" '
            f'stroke="#2ca02c" stroke-width="1.5"/>'
        )
    for x, y in p1_points:
        parts.append(
            f'<circle cx="{sx(x):.1f}" cy="{sy(y):.1f}" r="3.5" fill="#1f77b4" '
            f'fill-opacity="0.85"/>'
        )
    for x, y in p2_points:
        parts.append(
            f'<rect x="{sx(x) - 3:.1f}" y="{sy(y) - 3:.1f}" width="6" height="6" '
            f'fill="#ff7f0e" fill-opacity="0.85"/>'
        )
    for label, (x, y) in anchors.items():
        cx, cy = sx(x), sy(y)
        parts.append(
            f'<path d="M {cx:.1f} {cy - 6:.1f} L {cx - 6:.1f} {cy + 5:.1f} '
            f'L {cx + 6:.1f} {cy + 5:.1f} Z" fill="none" stroke="#d62728" stroke-width="2"/>'
        )
        parts.append(
            f'<text x="{cx + 9:.1f}" y="{cy - 6:.1f}" font-size="12" fill="#d62728" '
            f'font-family="sans-serif">{escape(label)}</text>'
        )
    # legend
    lx = MARGIN_L + plot_w + 14
    legend = [
        ("#1f77b4", "circle", "coarse front"),
        ("#ff7f0e", "rect", "refined front"),
        ("#2ca02c", "ring", "merged survivor"),
        ("#d62728", "tri", "anchor"),
    ]
    for i, (color, kind, label) in enumerate(legend):
        ly = MARGIN_T + 18 + i * 22
        if kind == "circle":
            parts.append(f'<circle cx="{lx + 6}" cy="{ly}" r="3.5" fill="{color}"/>')
        elif kind == "rect":
            parts.append(f'<rect x="{lx + 3}" y="{ly - 3}" width="6" height="6" fill="{color}"/>')
        elif kind == "ring":
            parts.append(
                f'<circle cx="{lx + 6}" cy="{ly}" r="6" fill="none" stroke="{color}" '
                f'stroke-width="1.5"/>'
            )
        else:
            parts.append(
                f'<path d="M {lx + 6} {ly - 5} L {lx} {ly + 4} L {lx + 12} {ly + 4} Z" '
                f'fill="none" stroke="{color}" stroke-width="2"/>'
            )
        parts.append(
            f'<text x="{lx + 18}" y="{ly + 4}" font-size="12" font-family="sans-serif">'
            f'{escape(label)}</text>'
        )
    parts.append("</svg>")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(parts) + "\n")
