import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chainmark.codec import WatermarkBits, embed
from chainmark.errors import (
    BadCrc,
    BadLength,
    BadUtf8,
    CapacityError,
    PayloadTooLarge,
    StorageError,
)
from chainmark.imagecore import BinaryImage, generate_synthetic, load_pbm, save_pbm
from chainmark.ledger import (
    GENESIS_HASH,
    Chain,
    ChainRecord,
    Verdict,
    append_record,
    block_digest,
    classify_tamper,
    crc16_ccitt_false,
    framed_bits,
    unframe,
    verify_chain,
)
from oracles import crc16_bitwise

STEP = 40


def bits_of(data: bytes) -> str:
    return "".join(f"{b:08b}" for b in data)


# -- framing ------------------------------------------------------------------


def test_crc_check_value():
    assert crc16_ccitt_false(b"123456789") == 0x29B1
    assert crc16_ccitt_false(b"") == 0xFFFF
    assert crc16_ccitt_false(b"A") == crc16_bitwise(b"A") == 0xB915


@settings(max_examples=300)
@given(st.binary(max_size=200))
def test_crc_matches_bitwise_reference(data):
    assert crc16_ccitt_false(data) == crc16_bitwise(data)


def test_frame_layout():
    assert str(framed_bits("")) == bits_of(b"\x00\x00\xff\xff")
    assert str(framed_bits("A")) == bits_of(b"\x00\x01\x41\xb9\x15")


@settings(max_examples=1000, deadline=None)
@given(st.text(max_size=60))
def test_frame_roundtrip(s):
    assert unframe(framed_bits(s)) == s


def test_unframe_inverse():
    assert unframe(framed_bits("abc")) == "abc"


def test_every_single_bit_error_in_body_is_caught():
    framed = framed_bits("20.06.2018, К.Иванов")
    for i in range(16, len(framed)):
        flipped = framed.bits.copy()
        flipped[i] ^= 1
        with pytest.raises(BadCrc):
            unframe(WatermarkBits(flipped))


def test_truncated_or_padded_frame():
    framed = framed_bits("abc")
    with pytest.raises(BadLength):
        unframe(framed[:-8])
    with pytest.raises(BadLength):
        unframe(framed[:20])
    with pytest.raises(BadLength):
        unframe(WatermarkBits(list(framed) + [0] * 8))


def test_invalid_utf8_with_good_crc():
    payload = b"\xff\xfe"
    frame = len(payload).to_bytes(2, "big") + payload + crc16_ccitt_false(payload).to_bytes(2, "big")
    with pytest.raises(BadUtf8):
        unframe(WatermarkBits.from_string(bits_of(frame)))


def test_oversize_metadata():
    with pytest.raises(PayloadTooLarge):
        framed_bits("x" * 65536)


# -- chain --------------------------------------------------------------------


def page(seed):
    return generate_synthetic(1000, 800, 500, seed=seed, stroke_height=40)


def metadata(i):
    return f"2018-06-20; student {i:03d}; group 941; Linear algebra; task {i % 7}"


def read_entries(chain):
    return [json.loads(line) for line in chain.path.read_text(encoding="utf-8").splitlines()]


def write_entries(chain, entries):
    chain.path.write_text(
        "".join(json.dumps(e, ensure_ascii=False) + "\n" for e in entries), encoding="utf-8"
    )


def reseal(chain, start, cascade=True):
    """Recompute stored hashes from ``start`` on, as an attacker with write access would."""
    entries = read_entries(chain)
    for i in range(start, len(entries) if cascade else start + 1):
        e = entries[i]
        if i > start:
            e["prev_hash"] = entries[i - 1]["record_hash"]
        image = (chain.path.parent / e["image_path"]).read_bytes()
        e["record_hash"] = block_digest(i, e["prev_hash"], e["step"], e["metadata"], image)
    write_entries(chain, entries)


@pytest.fixture
def chain5(tmp_path):
    chain = Chain.init(tmp_path / "records.jsonl")
    for i in range(5):
        append_record(chain, page(i), metadata(i), STEP)
    return chain


def test_genesis_block(tmp_path):
    chain = Chain.init(tmp_path / "c.jsonl")
    block = append_record(chain, page(0), "hello", STEP)
    assert block.index == 0 and block.prev_hash == GENESIS_HASH
    assert classify_tamper(block.payload).kind is Verdict.INTACT
    entry = read_entries(chain)[0]
    assert set(entry) == {"index", "prev_hash", "record_hash", "metadata", "image_path", "step"}
    assert entry["record_hash"] == block.record_hash
    stored = (chain.path.parent / entry["image_path"]).read_bytes()
    assert stored == save_pbm(block.payload.image, "P4")


def test_append_over_capacity(tmp_path):
    chain = Chain.init(tmp_path / "c.jsonl")
    with pytest.raises(CapacityError):
        append_record(chain, BinaryImage.blank(100, 80), "x", STEP)
    assert len(chain) == 0


def test_init_refuses_existing_chain(chain5):
    with pytest.raises(StorageError):
        Chain.init(chain5.path)


def test_missing_chain(tmp_path):
    with pytest.raises(StorageError):
        verify_chain(Chain(tmp_path / "nope.jsonl"))


def test_untouched_chain_is_intact(chain5):
    verdicts = verify_chain(chain5)
    assert [v.kind for v in verdicts] == [Verdict.INTACT] * 5
    assert [v.block_index for v in verdicts] == list(range(5))
    entries = read_entries(chain5)
    for prev, cur in zip(entries, entries[1:]):
        assert cur["prev_hash"] == prev["record_hash"]


def test_edited_image_bytes_break_the_link(chain5):
    path = chain5.path.parent / read_entries(chain5)[3]["image_path"]
    data = bytearray(path.read_bytes())
    data[-10] ^= 0x01
    path.write_bytes(bytes(data))
    kinds = [v.kind for v in verify_chain(chain5)]
    assert kinds[3] is Verdict.CHAIN_LINK_BROKEN
    assert kinds[:3] == [Verdict.INTACT] * 3


def test_rehashing_one_block_breaks_the_next(chain5):
    path = chain5.path.parent / read_entries(chain5)[3]["image_path"]
    data = bytearray(path.read_bytes())
    data[-10] ^= 0x01
    path.write_bytes(bytes(data))
    reseal(chain5, 3, cascade=False)
    kinds = [v.kind for v in verify_chain(chain5)]
    assert kinds[4] is Verdict.CHAIN_LINK_BROKEN
    # block 3 now hashes correctly; the edited pixel may lie outside the watermark
    assert kinds[3] is not Verdict.CHAIN_LINK_BROKEN


def _flip_consumed_pixel(chain, index, which):
    entry = read_entries(chain)[index]
    path = chain.path.parent / entry["image_path"]
    img = load_pbm(path.read_bytes())
    # the report of re-embedding the same frame reproduces the consumed columns
    _, report = embed(page(index), framed_bits(entry["metadata"]), entry["step"])
    col = report.consumed[which]
    y = col.strip * STEP + STEP // 2
    path.write_bytes(save_pbm(img.toggled([(col.x, y)]), "P4"))


@pytest.mark.parametrize("which", [0, 15, 40, -1])
def test_resealed_pixel_flip_is_image_tampering(chain5, which):
    _flip_consumed_pixel(chain5, 2, which)
    reseal(chain5, 2)
    verdicts = verify_chain(chain5)
    assert verdicts[2].kind is Verdict.IMAGE_TAMPERED
    assert all(v.kind is Verdict.INTACT for i, v in enumerate(verdicts) if i != 2)


def test_resealed_metadata_edit_is_metadata_tampering(chain5):
    entries = read_entries(chain5)
    entries[1]["metadata"] = entries[1]["metadata"].replace("task", "TASK")
    write_entries(chain5, entries)
    assert verify_chain(chain5)[1].kind is Verdict.CHAIN_LINK_BROKEN
    reseal(chain5, 1)
    verdicts = verify_chain(chain5)
    assert verdicts[1].kind is Verdict.METADATA_TAMPERED
    assert "TASK" in verdicts[1].detail


def test_garbled_entry_is_reported_not_raised(chain5):
    lines = chain5.path.read_text(encoding="utf-8").splitlines()
    lines[2] = lines[2][:-5]
    chain5.path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    kinds = [v.kind for v in verify_chain(chain5)]
    assert kinds[2] is Verdict.CHAIN_LINK_BROKEN
    assert kinds[3] is Verdict.CHAIN_LINK_BROKEN


def test_deleted_image_is_reported(chain5):
    (chain5.path.parent / read_entries(chain5)[4]["image_path"]).unlink()
    assert verify_chain(chain5)[4].kind is Verdict.CHAIN_LINK_BROKEN


def test_classify_record_directly():
    img = page(9)
    marked, _ = embed(img, framed_bits("abc"), STEP)
    assert classify_tamper(ChainRecord(marked, "abc", STEP)).kind is Verdict.INTACT
    assert classify_tamper(ChainRecord(marked, "abd", STEP)).kind is Verdict.METADATA_TAMPERED
    assert classify_tamper(ChainRecord(img, "abc", STEP)).kind is Verdict.IMAGE_TAMPERED
    blank = BinaryImage.blank(50, 50)
    assert classify_tamper(ChainRecord(blank, "abc", STEP)).kind is Verdict.IMAGE_TAMPERED


def test_verdicts_are_deterministic(chain5):
    assert verify_chain(chain5) == verify_chain(chain5)
