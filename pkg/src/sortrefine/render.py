"""Raster dumps of a signature-grouped property matrix (PGM P2 or SVG).

Rows come in bands, one band per signature in canonical order, so the
largest signature sets appear first. Black marks a present property.
"""

from __future__ import annotations

import math
from pathlib import Path
from typing import Iterable

from .view import StructureView


def band_height(count: int, scale: str = "linear") -> int:
    if scale == "linear":
        return count
    if scale == "log":
        return 1 + int(math.log2(count))
    raise ValueError(f"scale must be 'linear' or 'log', not {scale!r}")


def raster(view: StructureView, signatures: Iterable[int] | None = None, scale: str = "linear") -> list[list[int]]:
    """0/1 pixel rows; 1 means the property is present."""
    chosen = range(len(view)) if signatures is None else sorted(signatures)
    rows = []
    for m in chosen:
        sig = view.signatures[m]
        rows += [list(sig.bits)] * band_height(sig.count, scale)
    return rows


def to_pgm(pixels: list[list[int]]) -> str:
    h = len(pixels)
    w = len(pixels[0]) if h else 0
    out = ["P2", f"{w} {h}", "1"]
    # PGM: 0 is black
    out += [" ".join("0" if b else "1" for b in row) for row in pixels]
    return "\n".join(out) + "\n"


def to_svg(pixels: list[list[int]], cell: int = 4) -> str:
    h = len(pixels)
    w = len(pixels[0]) if h else 0
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w * cell}" height="{h * cell}" '
        f'viewBox="0 0 {w * cell} {h * cell}" shape-rendering="crispEdges">',
        f'<rect width="{w * cell}" height="{h * cell}" fill="white"/>',
    ]
    for y, row in enumerate(pixels):
        for x, b in enumerate(row):
            if b:
                out.append(f'<rect x="{x * cell}" y="{y * cell}" width="{cell}" height="{cell}" fill="black"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def render(view: StructureView, path: str | Path, signatures: Iterable[int] | None = None,
           scale: str = "linear", fmt: str | None = None) -> Path:
    path = Path(path)
    fmt = fmt or path.suffix.lstrip(".").lower() or "pgm"
    pixels = raster(view, signatures, scale)
    if fmt == "pgm":
        text = to_pgm(pixels)
    elif fmt == "svg":
        text = to_svg(pixels)
    else:
        raise ValueError(f"unknown image format {fmt!r} (pgm or svg)")
    path.write_text(text, encoding="ascii")
    return path
