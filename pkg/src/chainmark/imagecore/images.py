"""Immutable bilevel and 8-bit gray raster values."""

from __future__ import annotations

from typing import Iterable, List, Sequence, Tuple

import numpy as np

from chainmark.errors import DimensionError


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=np.uint8, copy=True)
    arr.setflags(write=False)
    return arr


class BinaryImage:
    """A bilevel raster; 1 is black (ink), 0 is white (paper).

    Pixels are kept as a read-only ``(height, width)`` uint8 array.
    Operations that "modify" an image return a new one.
    """

    __slots__ = ("_pixels",)

    def __init__(self, pixels):
        arr = np.asarray(pixels)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise DimensionError(f"expected a non-empty 2-D grid, got shape {arr.shape}")
        if arr.dtype == bool:
            arr = arr.astype(np.uint8)
        elif arr.min() < 0 or arr.max() > 1:
            raise ValueError("binary image pixels must be 0 or 1")
        self._pixels = _frozen(arr)

    @classmethod
    def from_grid(cls, width: int, height: int, grid: Sequence[int]) -> "BinaryImage":
        """Build from a flat row-major sequence of bits."""
        if len(grid) != width * height:
            raise DimensionError(f"grid has {len(grid)} cells, expected {width}x{height}")
        return cls(np.asarray(grid, dtype=np.uint8).reshape(height, width))

    @classmethod
    def from_columns(cls, columns: Iterable[str]) -> "BinaryImage":
        """Build from top-to-bottom column strings such as ``"110011"``."""
        cols = [[int(c) for c in col] for col in columns]
        return cls(np.array(cols, dtype=np.uint8).T)

    @classmethod
    def blank(cls, width: int, height: int) -> "BinaryImage":
        return cls(np.zeros((height, width), dtype=np.uint8))

    @property
    def pixels(self) -> np.ndarray:
        return self._pixels

    @property
    def width(self) -> int:
        return self._pixels.shape[1]

    @property
    def height(self) -> int:
        return self._pixels.shape[0]

    @property
    def grid(self) -> List[int]:
        return self._pixels.ravel().tolist()

    def column(self, x: int) -> str:
        return "".join(map(str, self._pixels[:, x].tolist()))

    def toggled(self, positions: Iterable[Tuple[int, int]]) -> "BinaryImage":
        """Return a copy with the pixels at ``(x, y)`` positions inverted."""
        arr = self._pixels.copy()
        for x, y in positions:
            arr[y, x] ^= 1
        return BinaryImage(arr)

    def __eq__(self, other):
        if not isinstance(other, BinaryImage):
            return NotImplemented
        return self._pixels.shape == other._pixels.shape and bool(
            np.array_equal(self._pixels, other._pixels)
        )

    def __hash__(self):
        return hash((self._pixels.shape, self._pixels.tobytes()))

    def __repr__(self):
        return f"BinaryImage({self.width}x{self.height}, black={int(self._pixels.sum())})"


class GrayImage:
    """An 8-bit grayscale raster, intensities in [0, 255]."""

    __slots__ = ("_pixels",)

    def __init__(self, pixels):
        arr = np.asarray(pixels)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise DimensionError(f"expected a non-empty 2-D grid, got shape {arr.shape}")
        if arr.size and (arr.min() < 0 or arr.max() > 255):
            raise ValueError("gray intensities must lie in [0, 255]")
        self._pixels = _frozen(arr)

    @classmethod
    def from_grid(cls, width: int, height: int, grid: Sequence[int]) -> "GrayImage":
        if len(grid) != width * height:
            raise DimensionError(f"grid has {len(grid)} cells, expected {width}x{height}")
        return cls(np.asarray(grid, dtype=np.int64).reshape(height, width))

    @property
    def pixels(self) -> np.ndarray:
        return self._pixels

    @property
    def width(self) -> int:
        return self._pixels.shape[1]

    @property
    def height(self) -> int:
        return self._pixels.shape[0]

    @property
    def grid(self) -> List[int]:
        return self._pixels.ravel().tolist()

    def histogram(self) -> np.ndarray:
        return np.bincount(self._pixels.ravel(), minlength=256)

    def __eq__(self, other):
        if not isinstance(other, GrayImage):
            return NotImplemented
        return self._pixels.shape == other._pixels.shape and bool(
            np.array_equal(self._pixels, other._pixels)
        )

    def __hash__(self):
        return hash((self._pixels.shape, self._pixels.tobytes()))

    def __repr__(self):
        return f"GrayImage({self.width}x{self.height})"


def pixel_diff(a: BinaryImage, b: BinaryImage) -> List[Tuple[int, int]]:
    """Positions ``(x, y)`` where the two images differ, in row-major order."""
    if (a.width, a.height) != (b.width, b.height):
        raise DimensionError(
            f"cannot diff {a.width}x{a.height} against {b.width}x{b.height}"
        )
    ys, xs = np.nonzero(a.pixels != b.pixels)
    return list(zip(xs.tolist(), ys.tolist()))
