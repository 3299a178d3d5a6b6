"""Autocorrelation of column parities, the first thing an analyst would try.

The parity sequence takes every strip column that holds any ink, fit or
not, in scan order over the whole page. The autocorrelation is the raw,
unnormalized product sum ``sum_i v[i] * v[i+k]``.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from chainmark.codec import StripLayout
from chainmark.errors import EmptySequence, LagMismatch
from chainmark.imagecore import BinaryImage


def parity_sequence(img: BinaryImage, step: int) -> np.ndarray:
    layout = StripLayout.for_image(img, step)
    k = layout.strip_count
    counts = img.pixels[: k * step].reshape(k, step, img.width).sum(axis=1, dtype=np.int64)
    return (counts[counts > 0] % 2).astype(np.uint8)


@dataclass(frozen=True)
class AcorrValues:
    lags: Tuple[Tuple[int, int], ...]

    @property
    def values(self) -> List[int]:
        return [v for _, v in self.lags]

    def __getitem__(self, k: int) -> int:
        return self.lags[k][1]

    def __len__(self):
        return len(self.lags)

    def to_csv(self, header: str = "value") -> str:
        return _csv(("lag", header), self.lags)


def _csv(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def autocorr(seq: Sequence[int], max_lag: int) -> AcorrValues:
    """Lags ``0..max_lag`` of the unnormalized autocorrelation.

    Computed through a zero-padded FFT and rounded; inputs are 0/1 so every
    product sum is an integer no larger than ``len(seq)``.
    """
    v = np.asarray(seq, dtype=np.float64)
    n = len(v)
    if n == 0:
        raise EmptySequence("autocorrelation of an empty sequence")
    if not 0 <= max_lag < n:
        raise ValueError(f"max_lag must lie in [0, {n - 1}], got {max_lag}")
    size = 1 << (2 * n - 1).bit_length()
    spectrum = np.fft.rfft(v, size)
    full = np.fft.irfft(spectrum * np.conj(spectrum), size)[: max_lag + 1]
    ints = np.rint(full).astype(np.int64)
    return AcorrValues(tuple(zip(range(max_lag + 1), ints.tolist())))


def acorr_diff(before: AcorrValues, after: AcorrValues) -> List[Tuple[int, int]]:
    """Per-lag ``after - before``."""
    if [k for k, _ in before.lags] != [k for k, _ in after.lags]:
        raise LagMismatch("autocorrelations cover different lags")
    return [(k, a - b) for (k, b), (_, a) in zip(before.lags, after.lags)]


def diff_to_csv(diff: Sequence[Tuple[int, int]]) -> str:
    return _csv(("lag", "diff"), diff)
