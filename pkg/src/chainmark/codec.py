"""Parity-of-column watermarking for bilevel document images.

The page is cut into horizontal strips of height ``step``. Inside a strip
every pixel column is a *line*; a line with at least ``step/2`` black pixels
is *fit* and carries one bit as the parity of its black-pixel count. When
the parity is wrong exactly one pixel of the line is toggled, chosen so the
line stays fit:

* dense lines (``3*N > 2*step``) lose their topmost black pixel;
* otherwise a pixel is added in the middle of the longest white gap between
  two black pixels, or at the first white pixel when there is no such gap.

Strips are visited top to bottom, columns left to right. Rows below the
last full strip are never read or written. Extraction needs only ``step``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from chainmark.errors import CapacityError, DecodeFailure
from chainmark.imagecore import BinaryImage

DEFAULT_STEP = 40


class WatermarkBits:
    """An ordered, immutable sequence of watermark bits."""

    __slots__ = ("_bits",)

    def __init__(self, bits: Iterable[int] = ()):
        arr = np.array(list(bits) if not isinstance(bits, np.ndarray) else bits, dtype=np.uint8)
        if arr.ndim != 1:
            arr = arr.ravel()
        if arr.size and arr.max() > 1:
            raise ValueError("watermark bits must be 0 or 1")
        arr.setflags(write=False)
        self._bits = arr

    @classmethod
    def from_string(cls, text: str) -> "WatermarkBits":
        """Parse a string of ``0``/``1`` characters (whitespace ignored)."""
        cleaned = "".join(text.split())
        if set(cleaned) - {"0", "1"}:
            raise ValueError("bit string may only contain 0 and 1")
        return cls(np.frombuffer(cleaned.encode("ascii"), dtype=np.uint8) - 0x30)

    @property
    def bits(self) -> np.ndarray:
        return self._bits

    @property
    def length(self) -> int:
        return len(self._bits)

    def __len__(self):
        return len(self._bits)

    def __iter__(self):
        return iter(self._bits.tolist())

    def __getitem__(self, i):
        if isinstance(i, slice):
            return WatermarkBits(self._bits[i])
        return int(self._bits[i])

    def __eq__(self, other):
        if isinstance(other, WatermarkBits):
            return bool(np.array_equal(self._bits, other._bits))
        if isinstance(other, str):
            return str(self) == other
        return NotImplemented

    def __hash__(self):
        return hash(self._bits.tobytes())

    def __str__(self):
        return (self._bits + 0x30).tobytes().decode("ascii")

    def __repr__(self):
        shown = str(self) if len(self) <= 32 else str(self)[:32] + "..."
        return f"WatermarkBits({shown!r}, length={len(self)})"


def text_to_bits(text: str) -> WatermarkBits:
    """UTF-8 bytes of ``text``, each byte most significant bit first."""
    data = np.frombuffer(text.encode("utf-8"), dtype=np.uint8)
    return WatermarkBits(np.unpackbits(data))


def bits_to_text(bits: WatermarkBits) -> str:
    if len(bits) % 8:
        raise DecodeFailure(f"{len(bits)} bits is not a whole number of bytes")
    try:
        return np.packbits(bits.bits).tobytes().decode("utf-8")
    except UnicodeDecodeError as exc:
        raise DecodeFailure(f"not valid utf-8: {exc.reason}") from exc


class FitnessResult(NamedTuple):
    flag: int
    pos: int


UNFIT = FitnessResult(-1, -1)


def get_position(line: Sequence[int]) -> FitnessResult:
    """Judge one strip column and pick the pixel to toggle if its parity is wrong.

    Returns ``(-1, -1)`` for an unfit line, otherwise ``(N % 2, pos)``.
    """
    bits = [int(b) for b in line]
    size = len(bits)
    if size < 2:
        raise ValueError("a line needs at least 2 pixels")
    num = sum(bits)
    if 2 * num < size:
        return UNFIT
    parity = num % 2
    if 3 * num > 2 * size:
        return FitnessResult(parity, bits.index(1))

    best_start, best_len = -1, 0
    seen_black, run_start = False, -1
    for y, b in enumerate(bits):
        if b:
            if run_start >= 0 and y - run_start > best_len:
                best_start, best_len = run_start, y - run_start
            seen_black, run_start = True, -1
        elif seen_black and run_start < 0:
            run_start = y
    if best_len:
        a, b = best_start, best_start + best_len - 1
        return FitnessResult(parity, (a + b) // 2)
    return FitnessResult(parity, bits.index(0))


def change_line(line: Sequence[int], pos: int) -> List[int]:
    """Toggle the pixel at ``pos``; the result has the opposite parity."""
    out = [int(b) for b in line]
    if not 0 <= pos < len(out):
        raise IndexError(f"position {pos} outside line of length {len(out)}")
    out[pos] ^= 1
    return out


@dataclass(frozen=True)
class StripLayout:
    step: int
    strip_count: int
    leftover_rows: int

    @classmethod
    def for_image(cls, img: BinaryImage, step: int) -> "StripLayout":
        _check_step(step)
        if img.height < step:
            raise ValueError(f"image height {img.height} is smaller than step {step}")
        return cls(step, img.height // step, img.height % step)

    def rows(self, k: int) -> range:
        return range(k * self.step, (k + 1) * self.step)


def _check_step(step: int) -> None:
    if int(step) != step or step < 2:
        raise ValueError(f"step must be an integer >= 2, got {step!r}")


def _strip_counts(img: BinaryImage, step: int) -> np.ndarray:
    """Black pixels per (strip, column), shape ``(strip_count, width)``."""
    k = StripLayout.for_image(img, step).strip_count
    return img.pixels[: k * step].reshape(k, step, img.width).sum(axis=1, dtype=np.int64)


def _flags(counts: np.ndarray, step: int) -> np.ndarray:
    return np.where(2 * counts < step, -1, counts % 2)


def _positions(lines: np.ndarray, num: np.ndarray, step: int) -> np.ndarray:
    """Toggle position for each fit column of ``lines`` (shape ``(step, m)``)."""
    lines = lines.astype(bool)
    m = lines.shape[1]
    first_black = lines.argmax(axis=0)
    first_white = (~lines).argmax(axis=0)

    # longest interior white run, leftmost on ties
    seen = np.zeros(m, dtype=bool)
    run_start = np.full(m, -1, dtype=np.int64)
    best_start = np.full(m, -1, dtype=np.int64)
    best_len = np.zeros(m, dtype=np.int64)
    for y in range(step):
        row = lines[y]
        length = y - run_start
        better = row & (run_start >= 0) & (length > best_len)
        best_len = np.where(better, length, best_len)
        best_start = np.where(better, run_start, best_start)
        opening = ~row & seen & (run_start < 0)
        run_start = np.where(row, -1, np.where(opening, y, run_start))
        seen |= row
    gap_mid = best_start + (best_len - 1) // 2

    delete = 3 * num > 2 * step
    return np.where(delete, first_black, np.where(best_len > 0, gap_mid, first_white))


def fitness_table(img: BinaryImage, step: int) -> Tuple[np.ndarray, np.ndarray]:
    """``get_position`` for every (strip, column) at once.

    Returns ``flags`` and ``pos`` arrays of shape ``(strip_count, width)``;
    ``pos`` is relative to the top of the strip.
    """
    counts = _strip_counts(img, step)
    k, w = counts.shape
    lines = img.pixels[: k * step].reshape(k, step, w).transpose(1, 0, 2).reshape(step, k * w)
    flags = _flags(counts, step)
    pos = _positions(lines, counts.ravel(), step).reshape(k, w)
    return flags, np.where(flags < 0, -1, pos)


@dataclass(frozen=True)
class ConsumedColumn:
    strip: int
    x: int
    bit: int
    modified: bool
    toggled_row: Optional[int]  # absolute image row, None when untouched


@dataclass(frozen=True)
class EmbedReport:
    step: int
    consumed: Tuple[ConsumedColumn, ...] = field(default_factory=tuple)

    @property
    def strips_used(self) -> int:
        return self.consumed[-1].strip + 1 if self.consumed else 0

    @property
    def pixels_toggled(self) -> int:
        return sum(c.modified for c in self.consumed)

    @property
    def toggled_positions(self) -> List[Tuple[int, int]]:
        return [(c.x, c.toggled_row) for c in self.consumed if c.modified]

    def strip_rows(self, strip: int) -> range:
        return range(strip * self.step, (strip + 1) * self.step)

    def to_dict(self) -> dict:
        return {
            "step": self.step,
            "strips_used": self.strips_used,
            "pixels_toggled": self.pixels_toggled,
            "consumed": [
                [c.strip, c.x, c.bit, c.modified, c.toggled_row] for c in self.consumed
            ],
        }

    def to_json(self) -> str:
        """Canonical JSON: sorted keys, compact separators, trailing newline."""
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":")) + "\n"

    @classmethod
    def from_dict(cls, data: dict) -> "EmbedReport":
        return cls(
            step=data["step"],
            consumed=tuple(
                ConsumedColumn(s, x, b, bool(m), r) for s, x, b, m, r in data["consumed"]
            ),
        )


def _coerce_bits(wm) -> WatermarkBits:
    if isinstance(wm, WatermarkBits):
        return wm
    if isinstance(wm, str):
        return WatermarkBits.from_string(wm)
    return WatermarkBits(wm)


def embed(img: BinaryImage, wm, step: int = DEFAULT_STEP) -> Tuple[BinaryImage, EmbedReport]:
    """Hide ``wm`` in ``img``; returns the marked image and an audit report.

    Raises CapacityError when the page has fewer fit columns than bits.
    """
    wm = _coerce_bits(wm)
    _check_step(step)
    counts = _strip_counts(img, step)
    n = len(wm)
    if n == 0:
        return img, EmbedReport(step)

    fit = 2 * counts >= step
    strip_idx, xs = np.nonzero(fit)  # row-major == scan order
    if len(xs) < n:
        raise CapacityError(len(xs), n)
    strip_idx, xs = strip_idx[:n], xs[:n]
    num = counts[strip_idx, xs]
    bits = wm.bits.astype(np.int64)
    change = num % 2 != bits

    rows = np.full(n, -1, dtype=np.int64)
    if change.any():
        cs, cx = strip_idx[change], xs[change]
        grid_rows = cs[None, :] * step + np.arange(step)[:, None]
        lines = img.pixels[grid_rows, cx[None, :]]
        rows[change] = cs * step + _positions(lines, num[change], step)

    pixels = img.pixels.copy()
    pixels[rows[change], xs[change]] ^= 1

    consumed = tuple(
        ConsumedColumn(s, x, b, m, r if m else None)
        for s, x, b, m, r in zip(
            strip_idx.tolist(), xs.tolist(), bits.tolist(), change.tolist(), rows.tolist()
        )
    )
    return BinaryImage(pixels), EmbedReport(step, consumed)


def extract_bits(img: BinaryImage, nbits: int, step: int = DEFAULT_STEP) -> WatermarkBits:
    """Read the parities of the first ``nbits`` fit columns in scan order."""
    _check_step(step)
    if nbits < 0:
        raise ValueError("nbits must be non-negative")
    if nbits == 0:
        return WatermarkBits()
    if img.height < step:
        raise CapacityError(0, nbits)
    flags = _flags(_strip_counts(img, step), step)
    parities = flags[flags >= 0]
    if len(parities) < nbits:
        raise CapacityError(len(parities), nbits)
    return WatermarkBits(parities[:nbits])


def verify_watermark(img: BinaryImage, wm, step: int = DEFAULT_STEP) -> bool:
    """True iff the first ``len(wm)`` fit columns carry exactly ``wm``."""
    wm = _coerce_bits(wm)
    try:
        return extract_bits(img, len(wm), step) == wm
    except CapacityError:
        return False
