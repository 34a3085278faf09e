"""Hand-rolled SVG emitters.

Every plotted element carries machine-readable data-* attributes mirroring
its source values, so golden tests assert numbers rather than pixels.
Output is deterministic: fixed canvas, fixed formatting, no timestamps.
"""

from __future__ import annotations

from xml.sax.saxutils import escape, quoteattr

WIDTH, HEIGHT = 720, 440
MARGIN = 60


def _fmt(value: float) -> str:
    return f"{value:.2f}"


def _header(title: str) -> list[str]:
    return [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<title>{escape(title)}</title>',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
    ]


def _axes(x_label: str, y_label: str) -> list[str]:
    return [
        f'<line x1="{MARGIN}" y1="{HEIGHT - MARGIN}" x2="{WIDTH - MARGIN}" '
        f'y2="{HEIGHT - MARGIN}" stroke="black"/>',
        f'<line x1="{MARGIN}" y1="{MARGIN}" x2="{MARGIN}" y2="{HEIGHT - MARGIN}" stroke="black"/>',
        f'<text x="{WIDTH // 2}" y="{HEIGHT - 16}" text-anchor="middle" font-size="13">{escape(x_label)}</text>',
        f'<text x="18" y="{HEIGHT // 2}" text-anchor="middle" font-size="13" '
        f'transform="rotate(-90 18 {HEIGHT // 2})">{escape(y_label)}</text>',
    ]


def _scale(values, lo_pad=0.05, hi_pad=0.05):
    lo, hi = min(values), max(values)
    if lo == hi:
        lo, hi = lo - 0.5, hi + 0.5
    span = hi - lo
    return lo - lo_pad * span, hi + hi_pad * span


def loss_curve_svg(rows: list[dict]) -> str:
    """Loss-vs-epoch polyline; one data point element per epoch.

    rows carry at least epoch and total; all row keys become data-*
    attributes on the point.
    """
    parts = _header("training loss")
    parts += _axes("epoch", "total loss")
    if rows:
        xs = [float(r["epoch"]) for r in rows]
        ys = [float(r["total"]) for r in rows]
        x_lo, x_hi = _scale(xs)
        y_lo, y_hi = _scale(ys)

        def px(x):
            return MARGIN + (x - x_lo) / (x_hi - x_lo) * (WIDTH - 2 * MARGIN)

        def py(y):
            return HEIGHT - MARGIN - (y - y_lo) / (y_hi - y_lo) * (HEIGHT - 2 * MARGIN)

        points = " ".join(f"{_fmt(px(x))},{_fmt(py(y))}" for x, y in zip(xs, ys))
        parts.append(f'<polyline points="{points}" fill="none" stroke="#1f77b4" stroke-width="1.5"/>')
        for r, x, y in zip(rows, xs, ys):
            attrs = " ".join(f"data-{k}={quoteattr(str(v))}" for k, v in r.items())
            parts.append(
                f'<circle cx="{_fmt(px(x))}" cy="{_fmt(py(y))}" r="2.5" fill="#1f77b4" {attrs}/>'
            )
    parts.append("</svg>")
    return "\n".join(parts)


def metric_bars_svg(metrics: dict[str, float | None]) -> str:
    """Fig-10-style bar panel of generation metrics (fractions in [0,1])."""
    parts = _header("generation metrics")
    parts += _axes("metric", "fraction")
    names = list(metrics)
    if names:
        slot = (WIDTH - 2 * MARGIN) / len(names)
        for i, name in enumerate(names):
            value = metrics[name]
            x = MARGIN + i * slot + slot * 0.2
            if value is None:
                parts.append(
                    f'<text x="{_fmt(x + slot * 0.3)}" y="{HEIGHT - MARGIN - 8}" font-size="11" '
                    f'data-metric={quoteattr(name)} data-value="undefined">n/a</text>'
                )
            else:
                h = value * (HEIGHT - 2 * MARGIN)
                parts.append(
                    f'<rect x="{_fmt(x)}" y="{_fmt(HEIGHT - MARGIN - h)}" width="{_fmt(slot * 0.6)}" '
                    f'height="{_fmt(h)}" fill="#ff7f0e" data-metric={quoteattr(name)} '
                    f'data-value={quoteattr(repr(value))}/>'
                )
            parts.append(
                f'<text x="{_fmt(x + slot * 0.3)}" y="{HEIGHT - MARGIN + 16}" text-anchor="middle" '
                f'font-size="11">{escape(name)}</text>'
            )
    parts.append("</svg>")
    return "\n".join(parts)


def projection_svg(points: list[dict]) -> str:
    """Scatter of 2D-projected chemical space.

    Each point dict needs x, y, series ("training" or "generated") and label;
    series get distinct marker shapes and colors, one element per point.
    """
    parts = _header("chemical space projection")
    parts += _axes("component 1", "component 2")
    if points:
        xs = [float(p["x"]) for p in points]
        ys = [float(p["y"]) for p in points]
        x_lo, x_hi = _scale(xs)
        y_lo, y_hi = _scale(ys)

        def px(x):
            return MARGIN + (x - x_lo) / (x_hi - x_lo) * (WIDTH - 2 * MARGIN)

        def py(y):
            return HEIGHT - MARGIN - (y - y_lo) / (y_hi - y_lo) * (HEIGHT - 2 * MARGIN)

        for p in points:
            attrs = " ".join(f"data-{k}={quoteattr(str(v))}" for k, v in p.items())
            cx, cy = px(float(p["x"])), py(float(p["y"]))
            if p.get("series") == "generated":
                parts.append(
                    f'<rect x="{_fmt(cx - 3)}" y="{_fmt(cy - 3)}" width="6" height="6" '
                    f'fill="#ff7f0e" {attrs}/>'
                )
            else:
                parts.append(f'<circle cx="{_fmt(cx)}" cy="{_fmt(cy)}" r="3" fill="#1f77b4" {attrs}/>')
        parts.append(
            f'<circle cx="{WIDTH - MARGIN - 150}" cy="{MARGIN - 20}" r="3" fill="#1f77b4"/>'
            f'<text x="{WIDTH - MARGIN - 140}" y="{MARGIN - 16}" font-size="11">training</text>'
            f'<rect x="{WIDTH - MARGIN - 73}" y="{MARGIN - 23}" width="6" height="6" fill="#ff7f0e"/>'
            f'<text x="{WIDTH - MARGIN - 62}" y="{MARGIN - 16}" font-size="11">generated</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts)


def heatmap_svg(compounds: list[str], ligases: list[str], scores: dict[tuple[str, str], float]) -> str:
    """Cross-target docking heatmap: rows are compounds, columns ligases.

    Linear color scale between the annotated min and max; missing cells stay
    grey. Cell order is deterministic (sorted compounds).
    """
    parts = _header("cross-target docking scores")
    values = [v for v in scores.values()]
    lo = min(values) if values else 0.0
    hi = max(values) if values else 1.0
    grid_w = WIDTH - 2 * MARGIN - 80
    grid_h = HEIGHT - 2 * MARGIN
    cell_w = grid_w / max(1, len(ligases))
    cell_h = grid_h / max(1, len(compounds))

    def color(v: float) -> str:
        if hi == lo:
            t = 0.5
        else:
            t = (v - lo) / (hi - lo)  # 0 at min (strongest binding) -> blue
        r = int(255 * t)
        g = int(255 * t)
        return f"rgb({r},{g},255)"

    for i, comp in enumerate(compounds):
        y = MARGIN + i * cell_h
        parts.append(
            f'<text x="{MARGIN - 6}" y="{_fmt(y + cell_h / 2 + 4)}" text-anchor="end" '
            f'font-size="10">{escape(comp)}</text>'
        )
        for j, lig in enumerate(ligases):
            x = MARGIN + j * cell_w
            key = (comp, lig)
            if key in scores:
                v = scores[key]
                parts.append(
                    f'<rect x="{_fmt(x)}" y="{_fmt(y)}" width="{_fmt(cell_w)}" height="{_fmt(cell_h)}" '
                    f'fill="{color(v)}" stroke="white" data-compound={quoteattr(comp)} '
                    f'data-ligase={quoteattr(lig)} data-score={quoteattr(repr(v))}/>'
                )
            else:
                parts.append(
                    f'<rect x="{_fmt(x)}" y="{_fmt(y)}" width="{_fmt(cell_w)}" height="{_fmt(cell_h)}" '
                    f'fill="#dddddd" stroke="white" data-compound={quoteattr(comp)} '
                    f'data-ligase={quoteattr(lig)} data-score="missing"/>'
                )
    for j, lig in enumerate(ligases):
        x = MARGIN + j * cell_w + cell_w / 2
        parts.append(
            f'<text x="{_fmt(x)}" y="{MARGIN - 8}" text-anchor="middle" font-size="11">{escape(lig)}</text>'
        )
    parts.append(
        f'<text x="{WIDTH - MARGIN - 70}" y="{MARGIN + 10}" font-size="11" data-scale-min={quoteattr(repr(lo))} '
        f'data-scale-max={quoteattr(repr(hi))}>scale: {_fmt(lo)} (blue) to {_fmt(hi)} (white)</text>'
    )
    parts.append("</svg>")
    return "\n".join(parts)
