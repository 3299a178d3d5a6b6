"""Global Otsu thresholding of scanned pages."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from chainmark.imagecore.images import BinaryImage, GrayImage


def otsu_threshold_from_histogram(hist: Sequence[int]) -> int:
    """Threshold ``t`` maximizing the between-class variance of a 256-bin histogram.

    Class 0 holds intensities ``<= t``. With ``n0`` pixels and intensity sum
    ``s0`` below the cut, out of ``n`` pixels summing to ``s``, the variance is
    proportional to ``(s0*n - s*n0)**2 / (n0*n1)``; it is compared by
    cross-multiplication on Python ints, so equal maxima compare exactly equal
    and the smallest maximizing ``t`` wins. A histogram with a single occupied
    bin returns that bin.
    """
    hist = [int(h) for h in hist]
    if len(hist) != 256:
        raise ValueError("histogram must have 256 bins")
    n = sum(hist)
    if n == 0:
        raise ValueError("empty histogram")
    s = sum(i * h for i, h in enumerate(hist))

    best_t, best_num, best_den = None, 0, 1
    n0 = s0 = 0
    for t in range(255):
        n0 += hist[t]
        s0 += t * hist[t]
        n1 = n - n0
        if n0 == 0 or n1 == 0:
            continue
        num = (s0 * n - s * n0) ** 2
        den = n0 * n1
        if best_t is None or num * best_den > best_num * den:
            best_t, best_num, best_den = t, num, den

    if best_t is None or best_num == 0:
        # single intensity level
        return next(i for i, h in enumerate(hist) if h)
    return best_t


def otsu_threshold(img: GrayImage) -> int:
    return otsu_threshold_from_histogram(img.histogram())


def binarize(img: GrayImage, t: int) -> BinaryImage:
    """Dark ink becomes black: a pixel is 1 iff its intensity is ``<= t``."""
    if not 0 <= t <= 255:
        raise ValueError(f"threshold {t} outside [0, 255]")
    return BinaryImage(img.pixels <= t)
