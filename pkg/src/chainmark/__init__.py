"""Fragile parity watermarks for bilevel document scans, plus a record ledger."""

from chainmark.capacity import CapacityCurve, capacity_bits, capacity_curve, recommend_step
from chainmark.codec import (
    EmbedReport,
    FitnessResult,
    StripLayout,
    WatermarkBits,
    bits_to_text,
    change_line,
    embed,
    extract_bits,
    get_position,
    text_to_bits,
    verify_watermark,
)
from chainmark.imagecore import (
    BinaryImage,
    GrayImage,
    binarize,
    generate_synthetic,
    load_pbm,
    load_pgm,
    otsu_threshold,
    pixel_diff,
    save_pbm,
    save_pgm,
)
from chainmark.steganalysis import AcorrValues, acorr_diff, autocorr, parity_sequence

__version__ = "0.1.0"
