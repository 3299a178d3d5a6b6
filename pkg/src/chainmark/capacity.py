"""How many watermark bits a page holds, and choosing a shared strip height."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Iterable, List, Sequence, Tuple

import numpy as np

from chainmark.codec import DEFAULT_STEP, StripLayout
from chainmark.errors import NoFeasibleStep
from chainmark.imagecore import BinaryImage

DEFAULT_REQUIRED_BITS = 1300


def capacity_bits(img: BinaryImage, step: int) -> int:
    """Number of fit columns over all full strips (the embeddable length)."""
    layout = StripLayout.for_image(img, step)
    k = layout.strip_count
    counts = img.pixels[: k * step].reshape(k, step, img.width).sum(axis=1, dtype=np.int64)
    return int(np.count_nonzero(2 * counts >= step))


@dataclass(frozen=True)
class CapacityCurve:
    entries: Tuple[Tuple[int, int], ...]

    def __post_init__(self):
        steps = [s for s, _ in self.entries]
        if any(b <= a for a, b in zip(steps, steps[1:])):
            raise ValueError("curve steps must be strictly increasing")

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["step", "d"])
        writer.writerows(self.entries)
        return buf.getvalue()

    def __iter__(self):
        return iter(self.entries)

    def __len__(self):
        return len(self.entries)


def capacity_curve(img: BinaryImage, steps: Iterable[int]) -> CapacityCurve:
    return CapacityCurve(tuple((s, capacity_bits(img, s)) for s in steps))


def recommend_step(
    images: Sequence[BinaryImage],
    steps: Sequence[int],
    required_bits: int = DEFAULT_REQUIRED_BITS,
) -> int:
    """Strip height giving the most even capacity across ``images``.

    Only steps where every image holds at least ``required_bits`` qualify;
    among those the smallest ``max D - min D`` wins, then the smallest step.
    With no sample pages the shared default of 40 pixels is returned.
    """
    if not images:
        return DEFAULT_STEP
    if not steps:
        raise ValueError("need at least one candidate step")
    best: List[Tuple[int, int]] = []
    for step in sorted(set(steps)):
        if any(img.height < step for img in images):
            continue
        d = [capacity_bits(img, step) for img in images]
        if min(d) >= required_bits:
            best.append((max(d) - min(d), step))
    if not best:
        raise NoFeasibleStep(f"no step in {sorted(set(steps))} gives {required_bits} bits on every image")
    return min(best)[1]
