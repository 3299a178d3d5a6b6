"""Raster values, netpbm I/O, Otsu binarization and synthetic pages."""

from chainmark.imagecore.images import BinaryImage, GrayImage, pixel_diff
from chainmark.imagecore.netpbm import load_pbm, load_pgm, save_pbm, save_pgm
from chainmark.imagecore.otsu import binarize, otsu_threshold, otsu_threshold_from_histogram
from chainmark.imagecore.synth import SplitMix64, generate_synthetic

__all__ = [
    "BinaryImage",
    "GrayImage",
    "SplitMix64",
    "binarize",
    "generate_synthetic",
    "load_pbm",
    "load_pgm",
    "otsu_threshold",
    "otsu_threshold_from_histogram",
    "pixel_diff",
    "save_pbm",
    "save_pgm",
]
