"""Deterministic static output: SVG phase portraits and PGM parity masks.

Byte-for-byte reproducible given identical inputs; no plotting dependency.
"""

from __future__ import annotations

_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e")

_WIDTH, _HEIGHT = 800, 600
_MARGIN_L, _MARGIN_R, _MARGIN_T, _MARGIN_B = 70, 20, 20, 50


def phase_portrait_svg(curves: list[tuple[str, list[float], list[float]]]) -> str:
    """SVG phase portrait (x horizontal, p vertical) with axes and tick labels.

    curves: list of (label, xs, ps) polylines sharing one coordinate frame.
    """
    if not curves or not any(len(c[1]) for c in curves):
        raise ValueError("need at least one non-empty curve")
    all_x = [v for _, xs, _ in curves for v in xs]
    all_p = [v for _, _, ps in curves for v in ps]
    x_lo, x_hi = _padded(min(all_x), max(all_x))
    p_lo, p_hi = _padded(min(all_p), max(all_p))
    plot_w = _WIDTH - _MARGIN_L - _MARGIN_R
    plot_h = _HEIGHT - _MARGIN_T - _MARGIN_B

    def sx(v: float) -> float:
        return _MARGIN_L + (v - x_lo) / (x_hi - x_lo) * plot_w

    def sy(v: float) -> float:
        return _MARGIN_T + (p_hi - v) / (p_hi - p_lo) * plot_h

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {_WIDTH} {_HEIGHT}">',
        f'<rect x="0" y="0" width="{_WIDTH}" height="{_HEIGHT}" fill="white"/>',
        f'<rect x="{_MARGIN_L}" y="{_MARGIN_T}" width="{plot_w}" height="{plot_h}" '
        'fill="none" stroke="black" stroke-width="1"/>',
    ]
    for i in range(5):
        xv = x_lo + i * (x_hi - x_lo) / 4
        px = sx(xv)
        parts.append(f'<line x1="{px:.2f}" y1="{_HEIGHT - _MARGIN_B}" '
                     f'x2="{px:.2f}" y2="{_HEIGHT - _MARGIN_B + 6}" stroke="black"/>')
        parts.append(f'<text x="{px:.2f}" y="{_HEIGHT - _MARGIN_B + 20}" '
                     f'font-size="12" text-anchor="middle">{xv:.4g}</text>')
        pv = p_lo + i * (p_hi - p_lo) / 4
        py = sy(pv)
        parts.append(f'<line x1="{_MARGIN_L - 6}" y1="{py:.2f}" '
                     f'x2="{_MARGIN_L}" y2="{py:.2f}" stroke="black"/>')
        parts.append(f'<text x="{_MARGIN_L - 10}" y="{py + 4:.2f}" '
                     f'font-size="12" text-anchor="end">{pv:.4g}</text>')
    parts.append(f'<text x="{_MARGIN_L + plot_w / 2:.2f}" y="{_HEIGHT - 8}" '
                 'font-size="14" text-anchor="middle">x</text>')
    parts.append(f'<text x="16" y="{_MARGIN_T + plot_h / 2:.2f}" font-size="14" '
                 f'text-anchor="middle" transform="rotate(-90 16 {_MARGIN_T + plot_h / 2:.2f})">p</text>')
    for i, (label, xs, ps) in enumerate(curves):
        color = _COLORS[i % len(_COLORS)]
        pts = " ".join(f"{sx(x):.2f},{sy(p):.2f}" for x, p in zip(xs, ps))
        parts.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        parts.append(f'<text x="{_WIDTH - _MARGIN_R - 8}" y="{_MARGIN_T + 18 + 16 * i}" '
                     f'font-size="12" text-anchor="end" fill="{color}">{label}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _padded(lo: float, hi: float) -> tuple[float, float]:
    if hi <= lo:
        lo, hi = lo - 0.5, lo + 0.5
    pad = 0.05 * (hi - lo)
    return lo - pad, hi + pad


def parity_pgm(mask: list[list[int]]) -> bytes:
    """Binary PGM (P5, maxval 1) of a triangular parity mask.

    The triangle is left-aligned in an n-by-n grid; odd entries (mask value 1)
    are black (gray 0), padding and even entries white (gray 1).
    """
    n = len(mask)
    header = f"P5\n{n} {n}\n1\n".encode("ascii")
    body = bytearray()
    for row in mask:
        body.extend(0 if bit else 1 for bit in row)
        body.extend(b"\x01" * (n - len(row)))
    return header + bytes(body)
