"""Deterministic text and SVG renderings of fit results."""

from __future__ import annotations

from typing import Optional, Sequence

import numpy as np

from regimekit.timeseries import Period, SummaryStats

WIDTH, HEIGHT = 900, 360
_MARGIN = dict(left=60, right=60, top=30, bottom=50)


def _num(x: float) -> str:
    return f"{x:.2f}"


def probabilities_svg(
    periods: Sequence[Period],
    p_surge: np.ndarray,
    dep: Optional[np.ndarray] = None,
    episodes: Sequence[tuple] = (),
    title: str = "",
    dep_name: str = "dep",
) -> str:
    """Smoothed surge probability (left axis, dashed) over shaded surge episodes,
    with the dependent series on the right axis (solid)."""
    n = len(periods)
    x0, x1 = _MARGIN["left"], WIDTH - _MARGIN["right"]
    y0, y1 = HEIGHT - _MARGIN["bottom"], _MARGIN["top"]
    step = (x1 - x0) / max(n - 1, 1)

    def xs(i):
        return x0 + i * step

    def yp(p):
        return y0 + (y1 - y0) * p

    idx = {p: i for i, p in enumerate(periods)}
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
    ]
    if title:
        out.append(f'<text x="{WIDTH / 2:.0f}" y="18" text-anchor="middle" font-size="13">{title}</text>')
    half = step / 2
    for a, b in episodes:
        ia, ib = idx[a], idx[b]
        left, right = max(xs(ia) - half, x0), min(xs(ib) + half, x1)
        out.append(
            f'<rect x="{_num(left)}" y="{_num(y1)}" width="{_num(right - left)}" '
            f'height="{_num(y0 - y1)}" fill="#d9d9d9"/>'
        )
    out.append(f'<rect x="{x0}" y="{y1}" width="{x1 - x0}" height="{y0 - y1}" fill="none" stroke="black"/>')
    for tick in (0.0, 0.25, 0.5, 0.75, 1.0):
        y = yp(tick)
        out.append(f'<line x1="{x0 - 4}" y1="{_num(y)}" x2="{x0}" y2="{_num(y)}" stroke="black"/>')
        out.append(f'<text x="{x0 - 7}" y="{_num(y + 4)}" text-anchor="end">{tick:.2f}</text>')
    out.append(
        f'<line x1="{x0}" y1="{_num(yp(0.5))}" x2="{x1}" y2="{_num(yp(0.5))}" '
        f'stroke="#999999" stroke-dasharray="2,3"/>'
    )
    label_every = max(1, n // 10)
    for i in range(0, n, label_every):
        out.append(f'<text x="{_num(xs(i))}" y="{y0 + 16}" text-anchor="middle">{periods[i]}</text>')

    if dep is not None and len(dep) == n:
        lo, hi = float(np.min(dep)), float(np.max(dep))
        if hi == lo:
            hi = lo + 1.0
        pad = 0.05 * (hi - lo)
        lo, hi = lo - pad, hi + pad

        def yd(v):
            return y0 + (y1 - y0) * (v - lo) / (hi - lo)

        pts = " ".join(f"{_num(xs(i))},{_num(yd(v))}" for i, v in enumerate(dep))
        out.append(f'<polyline points="{pts}" fill="none" stroke="black" stroke-width="1.2"/>')
        for k in range(5):
            v = lo + (hi - lo) * k / 4
            y = yd(v)
            out.append(f'<line x1="{x1}" y1="{_num(y)}" x2="{x1 + 4}" y2="{_num(y)}" stroke="black"/>')
            out.append(f'<text x="{x1 + 7}" y="{_num(y + 4)}">{v:.1f}</text>')
        out.append(
            f'<text x="{WIDTH - 12}" y="{HEIGHT / 2:.0f}" text-anchor="middle" '
            f'transform="rotate(90 {WIDTH - 12} {HEIGHT / 2:.0f})">{dep_name}</text>'
        )

    pts = " ".join(f"{_num(xs(i))},{_num(yp(float(p)))}" for i, p in enumerate(p_surge))
    out.append(
        f'<polyline points="{pts}" fill="none" stroke="#1f4fbf" stroke-width="1.5" stroke-dasharray="6,3"/>'
    )
    out.append(
        f'<text x="14" y="{HEIGHT / 2:.0f}" text-anchor="middle" '
        f'transform="rotate(-90 14 {HEIGHT / 2:.0f})">P(surge | all data)</text>'
    )
    out.append("</svg>")
    return "\n".join(out) + "\n"


def describe_table(rows: Sequence[tuple[str, SummaryStats]]) -> str:
    """Fixed-width descriptive-statistics table: Mean, SD, Max, Min, ADF, N."""
    head = f"{'Variable':<12}{'Mean':>10}{'SD':>10}{'Max':>10}{'Min':>10}{'ADF':>12}{'N':>6}"
    lines = [head, "-" * len(head)]
    for name, s in rows:
        adf = f"{s.adf_tstat:.3f}{s.adf_stars()}"
        lines.append(
            f"{name:<12}{s.mean:>10.3f}{s.sd:>10.3f}{s.max:>10.3f}{s.min:>10.3f}{adf:>12}{s.n_obs:>6}"
        )
    lines.append("ADF: t-statistic, constant included; *, **, *** reject a unit root at 10%, 5%, 1%.")
    return "\n".join(lines) + "\n"
