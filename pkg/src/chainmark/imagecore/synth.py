"""Deterministic synthetic "handwritten" pages for tests and experiments.

The generator is fully specified so other implementations can reproduce
fixtures bit for bit. Everything below is integer arithmetic; ``//`` is
floor division and ``%`` is the non-negative remainder.

PRNG: SplitMix64 over unsigned 64-bit words. With ``state`` seeded to
``seed mod 2**64``, each draw does::

    state = state + 0x9E3779B97F4A7C15
    z = (state ^ (state >> 30)) * 0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB
    return z ^ (z >> 31)                    # all mod 2**64

``below(n)`` is ``draw() % n``.

Strokes (``h`` is ``stroke_height``, ``q = max(1, h // 4)``,
``e = max(1, h // 8)``), drawn ``stroke_count`` times in order::

    thick = 1 + below(3)
    x = below(width);  y = below(height)
    repeat 1 + below(4) times:
        if below(4) < 3:                      # vertical stroke
            dy = h // 2 + below(h // 2 + 1);  dy = -dy if below(2) else dy
            dx = below(2 * e + 1) - e
        else:                                 # connector
            dx = 1 + below(h // 2 + 1);       dx = -dx if below(2) else dx
            dy = below(2 * q + 1) - q
        x2 = clamp(x + dx, 0, width - 1);  y2 = clamp(y + dy, 0, height - 1)
        n = max(|x2 - x|, |y2 - y|)
        for i in 0..n:                        # n == 0 draws one point
            px = x + (2 * (x2 - x) * i + n) // (2 * n)   (px = x when n == 0)
            py = y + (2 * (y2 - y) * i + n) // (2 * n)
            blacken (px + a, py + b) for a, b in 0..thick-1, skipping off-page
        x, y = x2, y2
"""

from __future__ import annotations

import numpy as np

from chainmark.imagecore.images import BinaryImage

_MASK = (1 << 64) - 1


class SplitMix64:
    def __init__(self, seed: int):
        self.state = seed & _MASK

    def next(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        return z ^ (z >> 31)

    def below(self, n: int) -> int:
        return self.next() % n


def _clamp(v: int, lo: int, hi: int) -> int:
    return lo if v < lo else hi if v > hi else v


def generate_synthetic(
    width: int, height: int, stroke_count: int, seed: int, *, stroke_height: int = 32
) -> BinaryImage:
    """Draw ``stroke_count`` pen strokes on a white page.

    ``stroke_height`` is the typical letter height in pixels. Small values
    give dense short ink (many fit columns at small strip heights), large
    values give long strokes that stay fit at large strip heights.
    """
    if width <= 0 or height <= 0:
        raise ValueError("width and height must be positive")
    if stroke_count < 0:
        raise ValueError("stroke_count must be non-negative")
    if stroke_height < 2:
        raise ValueError("stroke_height must be at least 2")

    rng = SplitMix64(seed)
    h = stroke_height
    q = max(1, h // 4)
    e = max(1, h // 8)
    segments = []  # (x, y, x2, y2, thick)

    for _ in range(stroke_count):
        thick = 1 + rng.below(3)
        x = rng.below(width)
        y = rng.below(height)
        for _ in range(1 + rng.below(4)):
            if rng.below(4) < 3:
                dy = h // 2 + rng.below(h // 2 + 1)
                if rng.below(2):
                    dy = -dy
                dx = rng.below(2 * e + 1) - e
            else:
                dx = 1 + rng.below(h // 2 + 1)
                if rng.below(2):
                    dx = -dx
                dy = rng.below(2 * q + 1) - q
            x2 = _clamp(x + dx, 0, width - 1)
            y2 = _clamp(y + dy, 0, height - 1)
            segments.append((x, y, x2, y2, thick))
            x, y = x2, y2

    page = np.zeros((height, width), dtype=np.uint8)
    if not segments:
        return BinaryImage(page)

    x0, y0, x1, y1, thick = np.array(segments, dtype=np.int64).T
    dx, dy = x1 - x0, y1 - y0
    n = np.maximum(np.abs(dx), np.abs(dy))
    seg = np.repeat(np.arange(len(segments)), n + 1)
    starts = np.cumsum(n + 1) - (n + 1)
    i = np.arange(len(seg)) - starts[seg]
    denom = 2 * np.maximum(n, 1)[seg]  # n == 0 has dx == dy == 0, so the offset is 0
    px = x0[seg] + (2 * dx[seg] * i + n[seg]) // denom
    py = y0[seg] + (2 * dy[seg] * i + n[seg]) // denom
    th = thick[seg]
    for a in range(3):
        for b in range(3):
            sel = th > max(a, b)
            qx = px[sel] + a
            qy = py[sel] + b
            inside = (qx < width) & (qy < height)
            page[qy[inside], qx[inside]] = 1
    return BinaryImage(page)
