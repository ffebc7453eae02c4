"""Static SVG line charts for trajectories; no rendering dependencies."""

from __future__ import annotations

from typing import List, Optional, Sequence

from .odes import Trajectory

WIDTH = 800
HEIGHT = 600
MARGIN = 60


def _fmt(v: float) -> str:
    return "%g" % v


def write_svg(
    trajs: Sequence[Trajectory],
    colors: Sequence[str],
    path: str,
    labels: Optional[Sequence[str]] = None,
    component: int = 0,
    description: str = "",
) -> None:
    """Plot one state component of each trajectory as a colored polyline.

    All trajectories are expected to share the independent-variable span.
    An empty list yields an axes-only document.
    """
    xs: List[float] = []
    ys: List[float] = []
    for tr in trajs:
        for t, y in tr.samples:
            xs.append(t)
            ys.append(y[component])
    if xs:
        xmin, xmax = min(xs), max(xs)
        ymin, ymax = min(ys), max(ys)
    else:
        xmin, xmax, ymin, ymax = 0.0, 1.0, 0.0, 1.0
    if xmax == xmin:
        xmax = xmin + 1.0
    if ymax == ymin:
        ymax = ymin + 1.0
    pad = 0.05 * (ymax - ymin)
    ymin -= pad
    ymax += pad

    def px(x: float) -> float:
        return MARGIN + (x - xmin) / (xmax - xmin) * (WIDTH - 2 * MARGIN)

    def py(y: float) -> float:
        return HEIGHT - MARGIN - (y - ymin) / (ymax - ymin) * (HEIGHT - 2 * MARGIN)

    out = []
    out.append(
        '<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        'viewBox="0 0 %d %d" width="%d" height="%d">' % (WIDTH, HEIGHT, WIDTH, HEIGHT)
    )
    if description:
        out.append("<desc>%s</desc>" % description)
    out.append('<rect x="0" y="0" width="%d" height="%d" fill="white"/>' % (WIDTH, HEIGHT))
    axis = 'stroke="black" stroke-width="1"'
    out.append('<line x1="%g" y1="%g" x2="%g" y2="%g" %s/>' % (MARGIN, HEIGHT - MARGIN, WIDTH - MARGIN, HEIGHT - MARGIN, axis))
    out.append('<line x1="%g" y1="%g" x2="%g" y2="%g" %s/>' % (MARGIN, MARGIN, MARGIN, HEIGHT - MARGIN, axis))
    text = 'font-family="sans-serif" font-size="14"'
    out.append('<text x="%g" y="%g" %s>%s</text>' % (MARGIN, HEIGHT - MARGIN + 20, text, _fmt(xmin)))
    out.append('<text x="%g" y="%g" %s text-anchor="end">%s</text>' % (WIDTH - MARGIN, HEIGHT - MARGIN + 20, text, _fmt(xmax)))
    out.append('<text x="%g" y="%g" %s text-anchor="end">%s</text>' % (MARGIN - 6, HEIGHT - MARGIN + 4, text, _fmt(ymin + pad)))
    out.append('<text x="%g" y="%g" %s text-anchor="end">%s</text>' % (MARGIN - 6, MARGIN + 4, text, _fmt(ymax - pad)))
    for i, tr in enumerate(trajs):
        color = colors[i] if i < len(colors) else "black"
        pts = " ".join("%.6g,%.6g" % (px(t), py(y[component])) for t, y in tr.samples)
        out.append('<polyline fill="none" stroke="%s" stroke-width="1.5" points="%s"/>' % (color, pts))
        if labels and i < len(labels):
            out.append(
                '<text x="%g" y="%g" %s fill="%s">%s</text>'
                % (WIDTH - MARGIN - 120, MARGIN + 18 * (i + 1), text, color, labels[i])
            )
    out.append("</svg>")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(out) + "\n")
