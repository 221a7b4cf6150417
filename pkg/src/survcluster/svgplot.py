"""Dependency-free SVG step plots for survival curves."""

from __future__ import annotations

from .dataio import atomic_write_text

_PALETTE = ("#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b")
_WIDTH = 640
_HEIGHT = 440
_MARGIN = 56


def _step_points(times, survival, t_max):
    # Right-continuous step path starting at (0, 1).
    pts = [(0.0, 1.0)]
    s_prev = 1.0
    for t, s in zip(times, survival):
        pts.append((t, s_prev))
        pts.append((t, s))
        s_prev = s
    pts.append((t_max, s_prev))
    return pts


def km_step_svg(curves: dict) -> str:
    """Render label -> (times, survival) step curves as an SVG document."""
    t_max = max((max(ts) if len(ts) else 1.0) for ts, _ in curves.values()) or 1.0
    plot_w = _WIDTH - 2 * _MARGIN
    plot_h = _HEIGHT - 2 * _MARGIN

    def sx(t):
        return _MARGIN + plot_w * (t / t_max)

    def sy(s):
        return _MARGIN + plot_h * (1.0 - s)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH}" height="{_HEIGHT}" '
        f'viewBox="0 0 {_WIDTH} {_HEIGHT}">',
        f'<rect width="{_WIDTH}" height="{_HEIGHT}" fill="white"/>',
        f'<line x1="{_MARGIN}" y1="{_MARGIN}" x2="{_MARGIN}" y2="{_HEIGHT - _MARGIN}" '
        'stroke="black"/>',
        f'<line x1="{_MARGIN}" y1="{_HEIGHT - _MARGIN}" x2="{_WIDTH - _MARGIN}" '
        f'y2="{_HEIGHT - _MARGIN}" stroke="black"/>',
    ]
    for frac in (0.0, 0.25, 0.5, 0.75, 1.0):
        y = sy(frac)
        parts.append(
            f'<text x="{_MARGIN - 8}" y="{y + 4:.1f}" font-size="11" text-anchor="end">'
            f"{frac:.2f}</text>"
        )
        parts.append(
            f'<line x1="{_MARGIN - 4}" y1="{y:.1f}" x2="{_MARGIN}" y2="{y:.1f}" stroke="black"/>'
        )
        x = sx(frac * t_max)
        parts.append(
            f'<text x="{x:.1f}" y="{_HEIGHT - _MARGIN + 16}" font-size="11" '
            f'text-anchor="middle">{frac * t_max:.0f}</text>'
        )
    parts.append(
        f'<text x="{_WIDTH / 2:.0f}" y="{_HEIGHT - 12}" font-size="12" '
        'text-anchor="middle">time</text>'
    )
    parts.append(
        f'<text x="16" y="{_HEIGHT / 2:.0f}" font-size="12" text-anchor="middle" '
        f'transform="rotate(-90 16 {_HEIGHT / 2:.0f})">survival probability</text>'
    )
    for i, label in enumerate(sorted(curves)):
        times, survival = curves[label]
        color = _PALETTE[i % len(_PALETTE)]
        pts = _step_points(times, survival, t_max)
        path = " ".join(f"{sx(t):.2f},{sy(s):.2f}" for t, s in pts)
        parts.append(
            f'<polyline points="{path}" fill="none" stroke="{color}" stroke-width="1.5"/>'
        )
        ly = _MARGIN + 16 * (i + 1)
        parts.append(
            f'<line x1="{_WIDTH - _MARGIN - 88}" y1="{ly}" x2="{_WIDTH - _MARGIN - 64}" '
            f'y2="{ly}" stroke="{color}" stroke-width="2"/>'
        )
        parts.append(
            f'<text x="{_WIDTH - _MARGIN - 58}" y="{ly + 4}" font-size="11">'
            f"cluster {label}</text>"
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def write_km_svg(path, curves: dict) -> None:
    atomic_write_text(path, km_step_svg(curves))
