"""Reading and writing netpbm bitmaps (P1/P4) and graymaps (P2/P5).

Output is canonical: a single ``\\n`` after every header field, no
comments, P4 rows packed MSB-first and zero padded to a byte boundary.
The ledger hashes these bytes, so the layout must not drift.
"""

from __future__ import annotations

import numpy as np

from chainmark.errors import ParseError, UnsupportedDepth
from chainmark.imagecore.images import BinaryImage, GrayImage

MAX_SIDE = 1 << 20
MAX_PIXELS = 1 << 28

_WHITESPACE = b" \t\r\n\v\f"


class _Reader:
    def __init__(self, data: bytes):
        self.data = bytes(data)
        self.pos = 0

    def skip_space(self):
        data = self.data
        while self.pos < len(data):
            c = data[self.pos]
            if c in _WHITESPACE:
                self.pos += 1
            elif c == 0x23:  # '#'
                while self.pos < len(data) and data[self.pos] not in b"\r\n":
                    self.pos += 1
            else:
                break

    def integer(self, what: str) -> int:
        self.skip_space()
        start = self.pos
        while self.pos < len(self.data) and 48 <= self.data[self.pos] <= 57:
            self.pos += 1
        if start == self.pos:
            if self.pos >= len(self.data):
                raise ParseError(f"unexpected end of data reading {what}", self.pos)
            raise ParseError(f"expected decimal {what}", self.pos)
        return int(self.data[start : self.pos])

    def raster_separator(self):
        # exactly one whitespace byte separates the header from binary rasters
        if self.pos >= len(self.data) or self.data[self.pos] not in _WHITESPACE:
            raise ParseError("missing whitespace before raster", self.pos)
        self.pos += 1


def _magic(rd: _Reader, allowed) -> bytes:
    magic = rd.data[:2]
    if magic not in allowed:
        raise ParseError(f"bad magic number {magic!r}", 0)
    rd.pos = 2
    return magic


def _dimensions(rd: _Reader):
    at = rd.pos
    width = rd.integer("width")
    height = rd.integer("height")
    if not (0 < width <= MAX_SIDE and 0 < height <= MAX_SIDE) or width * height > MAX_PIXELS:
        raise ParseError(f"unsupported dimensions {width}x{height}", at)
    return width, height


def load_pbm(data: bytes) -> BinaryImage:
    """Parse a P1 or P4 bitmap. Bits set in the file are black (1)."""
    rd = _Reader(data)
    magic = _magic(rd, (b"P1", b"P4"))
    width, height = _dimensions(rd)

    if magic == b"P4":
        rd.raster_separator()
        row_bytes = (width + 7) // 8
        need = row_bytes * height
        payload = rd.data[rd.pos : rd.pos + need]
        if len(payload) < need:
            raise ParseError(
                f"truncated P4 raster: {len(payload)} of {need} bytes", len(rd.data)
            )
        packed = np.frombuffer(payload, dtype=np.uint8).reshape(height, row_bytes)
        bits = np.unpackbits(packed, axis=1)[:, :width]
        return BinaryImage(bits)

    if b"#" in rd.data[rd.pos :]:
        return BinaryImage(_plain_bits_slow(rd, width * height).reshape(height, width))
    raster = np.frombuffer(rd.data, dtype=np.uint8)[rd.pos :]
    is_digit = (raster == 0x30) | (raster == 0x31)
    digit_at = np.flatnonzero(is_digit)
    count = width * height
    if len(digit_at) < count:
        bad = np.flatnonzero(~is_digit & ~np.isin(raster, list(_WHITESPACE)))
        if len(bad):
            raise ParseError(f"invalid P1 pixel {chr(raster[bad[0]])!r}", rd.pos + int(bad[0]))
        raise ParseError(f"truncated P1 raster after {len(digit_at)} pixels", len(rd.data))
    end = digit_at[count - 1] + 1
    head = raster[:end]
    bad = np.flatnonzero(~is_digit[:end] & ~np.isin(head, list(_WHITESPACE)))
    if len(bad):
        raise ParseError(f"invalid P1 pixel {chr(head[bad[0]])!r}", rd.pos + int(bad[0]))
    bits = raster[digit_at[:count]] - 0x30
    return BinaryImage(bits.reshape(height, width))


def _plain_bits_slow(rd: _Reader, count: int) -> np.ndarray:
    # comments inside the raster are legal in plain PBM; walk byte by byte
    bits = np.empty(count, dtype=np.uint8)
    data = rd.data
    for i in range(count):
        rd.skip_space()
        if rd.pos >= len(data):
            raise ParseError(f"truncated P1 raster after {i} pixels", rd.pos)
        c = data[rd.pos]
        if c not in b"01":
            raise ParseError(f"invalid P1 pixel {chr(c)!r}", rd.pos)
        bits[i] = c - 48
        rd.pos += 1
    return bits


def save_pbm(img: BinaryImage, format: str = "P4") -> bytes:
    """Serialize canonically as ``"P1"`` (plain) or ``"P4"`` (raw)."""
    fmt = format.upper()
    header = f"{fmt}\n{img.width} {img.height}\n".encode("ascii")
    if fmt == "P4":
        return header + np.packbits(img.pixels, axis=1).tobytes()
    if fmt == "P1":
        rows = (" ".join(map(str, row)) for row in img.pixels.tolist())
        return header + "".join(r + "\n" for r in rows).encode("ascii")
    raise ValueError(f"unknown bitmap format {format!r}")


def load_pgm(data: bytes) -> GrayImage:
    """Parse a P2 or P5 graymap with maxval <= 255; values are not rescaled."""
    rd = _Reader(data)
    magic = _magic(rd, (b"P2", b"P5"))
    width, height = _dimensions(rd)
    at = rd.pos
    maxval = rd.integer("maxval")
    if maxval == 0:
        raise ParseError("maxval must be positive", at)
    if maxval > 255:
        raise UnsupportedDepth(f"maxval {maxval} exceeds 255")

    count = width * height
    if magic == b"P5":
        rd.raster_separator()
        payload = rd.data[rd.pos : rd.pos + count]
        if len(payload) < count:
            raise ParseError(f"truncated P5 raster: {len(payload)} of {count} bytes", len(rd.data))
        values = np.frombuffer(payload, dtype=np.uint8)
    else:
        values = np.array([rd.integer("sample") for _ in range(count)], dtype=np.int64)
        at = rd.pos
    if values.max() > maxval:
        raise ParseError(f"sample exceeds maxval {maxval}", at)
    return GrayImage(values.reshape(height, width))


def save_pgm(img: GrayImage, format: str = "P5") -> bytes:
    fmt = format.upper()
    header = f"{fmt}\n{img.width} {img.height}\n255\n".encode("ascii")
    if fmt == "P5":
        return header + img.pixels.tobytes()
    if fmt == "P2":
        rows = (" ".join(map(str, row)) for row in img.pixels.tolist())
        return header + "".join(r + "\n" for r in rows).encode("ascii")
    raise ValueError(f"unknown graymap format {format!r}")
