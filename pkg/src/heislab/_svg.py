"""Minimal SVG output: point scatters and polyline plots, no dependencies."""

from pathlib import Path

import numpy as np


def _fit(values, lo, hi, size, pad):
    span = hi - lo
    if span <= 0:
        span = 1.0
    return pad + (values - lo) / span * (size - 2 * pad)


def svg_scatter(xs, ys, path, size: int = 640, radius: float = 0.8) -> None:
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    px = _fit(xs, xs.min(), xs.max(), size, 20)
    py = size - _fit(ys, ys.min(), ys.max(), size, 20)
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}">']
    for x, y in zip(px, py):
        parts.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="{radius}" fill="black"/>')
    parts.append("</svg>\n")
    _atomic_write(Path(path), "\n".join(parts))


def svg_polyline(xs, ys, path, size: int = 640) -> None:
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    px = _fit(xs, xs.min(), xs.max(), size, 30)
    py = size - _fit(ys, ys.min(), ys.max(), size, 30)
    pts = " ".join(f"{x:.2f},{y:.2f}" for x, y in zip(px, py))
    body = (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}">\n'
        f'<polyline points="{pts}" fill="none" stroke="black" stroke-width="1.5"/>\n'
        "</svg>\n"
    )
    _atomic_write(Path(path), body)


def _atomic_write(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    tmp.replace(path)
