import itertools
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chainmark.codec import (
    EmbedReport,
    StripLayout,
    WatermarkBits,
    bits_to_text,
    change_line,
    embed,
    extract_bits,
    fitness_table,
    get_position,
    text_to_bits,
    verify_watermark,
)
from chainmark.errors import CapacityError, DecodeFailure
from chainmark.imagecore import BinaryImage, generate_synthetic, pixel_diff
from oracles import fitness_by_string, simulate_embed


def line(s):
    return [int(c) for c in s]


# -- text <-> bits ----------------------------------------------------------


def test_text_to_bits_basics():
    assert len(text_to_bits("")) == 0
    assert str(text_to_bits("A")) == "01000001"


def test_bits_to_text():
    assert bits_to_text(WatermarkBits.from_string("01000001")) == "A"
    with pytest.raises(DecodeFailure):
        bits_to_text(WatermarkBits.from_string("010000010"))
    with pytest.raises(DecodeFailure):
        bits_to_text(WatermarkBits.from_string("11111111"))


def test_exam_phrase_length_is_whole_bytes():
    phrase = "20.06.2018, К.Иванов, группа 941, Линейная алгебра и геометрия, задание №4"
    bits = text_to_bits(phrase)
    assert len(bits) == 8 * len(phrase.encode("utf-8")) == 968


@settings(max_examples=1000, deadline=None)
@given(st.text())
def test_text_roundtrip(s):
    assert bits_to_text(text_to_bits(s)) == s


# -- column fitness ---------------------------------------------------------


@pytest.mark.parametrize(
    "bits, expected",
    [
        ("000000", (-1, -1)),
        ("111110", (1, 0)),
        ("110011", (0, 2)),
        ("111111", (0, 0)),
        ("100000", (-1, -1)),
        ("111100", (0, 4)),
        ("101101", (0, 1)),  # two gaps of length 1, leftmost wins
        ("1000111", (0, 2)),  # gap rows 1..3, midpoint 2
        ("0110110", (0, 3)),
        ("11", (0, 0)),
        ("10", (1, 1)),
        ("01", (1, 0)),
    ],
)
def test_get_position_cases(bits, expected):
    assert tuple(get_position(line(bits))) == expected


@pytest.mark.parametrize("size", range(2, 13))
def test_get_position_matches_string_oracle(size):
    for combo in itertools.product((0, 1), repeat=size):
        assert tuple(get_position(combo)) == fitness_by_string(combo)


def test_get_position_rejects_tiny_lines():
    with pytest.raises(ValueError):
        get_position([1])


def test_change_line():
    assert change_line(line("111110"), 0) == line("011110")
    assert change_line(line("110011"), 2) == line("111011")
    assert change_line(change_line(line("110011"), 2), 2) == line("110011")
    with pytest.raises(IndexError):
        change_line(line("1100"), 4)


@pytest.mark.parametrize("size", [2, 3, 5, 8, 11])
def test_modified_line_keeps_fitness_and_flips_parity(size):
    for combo in itertools.product((0, 1), repeat=size):
        flag, pos = get_position(combo)
        if flag == -1:
            continue
        num = sum(combo)
        if 3 * num > 2 * size:
            assert combo[pos] == 1 and 2 * (num - 1) >= size
        else:
            assert combo[pos] == 0
        new = change_line(combo, pos)
        new_flag, _ = get_position(new)
        assert new_flag == 1 - flag
        assert sum(a != b for a, b in zip(combo, new)) == 1


@pytest.mark.parametrize("seed", range(6))
@pytest.mark.parametrize("step", [2, 3, 7, 16, 40])
def test_fitness_table_matches_scalar(seed, step):
    img = generate_synthetic(120, 130, 30, seed=seed, stroke_height=step)
    flags, pos = fitness_table(img, step)
    for k in range(img.height // step):
        for x in range(img.width):
            col = img.pixels[k * step : (k + 1) * step, x]
            assert (flags[k, x], pos[k, x]) == tuple(get_position(col))


def test_strip_layout():
    layout = StripLayout.for_image(BinaryImage.blank(3, 47), 10)
    assert (layout.strip_count, layout.leftover_rows) == (4, 7)
    assert layout.rows(2) == range(20, 30)
    with pytest.raises(ValueError):
        StripLayout.for_image(BinaryImage.blank(3, 47), 1)
    with pytest.raises(ValueError):
        StripLayout.for_image(BinaryImage.blank(3, 5), 6)


# -- embed / extract ----------------------------------------------------------


def test_empty_watermark_leaves_image(six_by_six):
    out, report = embed(six_by_six, "", 6)
    assert out == six_by_six
    assert report.consumed == () and report.pixels_toggled == 0


def test_six_by_six_hand_trace(six_by_six):
    out, report = embed(six_by_six, "01", 6)
    assert [out.column(x) for x in range(6)] == [
        "011110",
        "000000",
        "111011",
        "111111",
        "100000",
        "111100",
    ]
    assert report.pixels_toggled == 2
    assert [(c.strip, c.x, c.bit, c.modified, c.toggled_row) for c in report.consumed] == [
        (0, 0, 0, True, 0),
        (0, 2, 1, True, 2),
    ]
    assert str(extract_bits(out, 2, 6)) == "01"
    grid, consumed = simulate_embed(six_by_six.pixels, [0, 1], 6)
    assert np.array_equal(np.array(grid), out.pixels)


def test_extract_edge_cases(six_by_six):
    assert len(extract_bits(six_by_six, 0, 6)) == 0
    with pytest.raises(CapacityError) as info:
        extract_bits(BinaryImage.blank(6, 6), 1, 6)
    assert (info.value.available, info.value.required) == (0, 1)
    with pytest.raises(CapacityError) as info:
        extract_bits(six_by_six, 5, 6)
    assert info.value.available == 4


def test_embed_over_capacity(six_by_six):
    with pytest.raises(CapacityError) as info:
        embed(six_by_six, "01010", 6)
    assert (info.value.available, info.value.required) == (4, 5)


def test_verify(six_by_six):
    out, _ = embed(six_by_six, "01", 6)
    assert verify_watermark(out, "01", 6)
    assert not verify_watermark(out, "00", 6)
    assert not verify_watermark(BinaryImage.blank(6, 6), "1", 6)


def test_leftover_rows_untouched():
    img = generate_synthetic(300, 137, 80, seed=4, stroke_height=20)
    step = 20
    wm = np.random.default_rng(0).integers(0, 2, 150)
    out, _ = embed(img, WatermarkBits(wm), step)
    tail = (img.height // step) * step
    assert np.array_equal(out.pixels[tail:], img.pixels[tail:])


@settings(max_examples=150, deadline=None)
@given(
    seed=st.integers(0, 2**32),
    strokes=st.integers(0, 120),
    step=st.sampled_from([2, 5, 12, 20, 33]),
    data=st.data(),
)
def test_embed_matches_simulator_and_roundtrips(seed, strokes, step, data):
    img = generate_synthetic(160, 100, strokes, seed=seed, stroke_height=max(step, 4))
    cap = int((fitness_table(img, step)[0] >= 0).sum())
    n = data.draw(st.integers(0, cap))
    bits = data.draw(st.lists(st.integers(0, 1), min_size=n, max_size=n))
    out, report = embed(img, WatermarkBits(bits), step)

    grid, consumed = simulate_embed(img.pixels, bits, step)
    assert np.array_equal(np.array(grid, dtype=np.uint8), out.pixels)
    assert [(c.strip, c.x, c.bit, c.modified, c.toggled_row) for c in report.consumed] == consumed

    assert list(extract_bits(out, n, step)) == bits
    assert sorted(pixel_diff(img, out)) == sorted(report.toggled_positions)
    for c in report.consumed:
        col = out.pixels[c.strip * step : (c.strip + 1) * step, c.x]
        assert int(col.sum()) % 2 == c.bit


def test_embed_is_deterministic():
    img = generate_synthetic(400, 200, 100, seed=12)
    a = embed(img, text_to_bits("hello"), 20)
    b = embed(img, text_to_bits("hello"), 20)
    assert a[0] == b[0] and a[1].to_json() == b[1].to_json()


def test_report_json_roundtrip():
    img = generate_synthetic(400, 200, 100, seed=12)
    _, report = embed(img, text_to_bits("hi"), 20)
    again = EmbedReport.from_dict(json.loads(report.to_json()))
    assert again == report
    data = json.loads(report.to_json())
    assert data["pixels_toggled"] == report.pixels_toggled
    assert data["strips_used"] == report.strips_used
