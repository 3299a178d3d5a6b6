"""Hash-chained records whose metadata is watermarked into their page image.

Each record pairs a scanned page with its metadata text. The text, framed
with a length header and a CRC, is embedded in the page, and the block hash
covers both. An auditor can then tell which half of a record was altered:

* the frame cannot be recovered from the page -> the image was changed;
* the frame is intact but differs from the stored text -> the text was changed;
* a stored hash or link does not recompute -> the chain itself was edited.

On disk a chain is a JSON-lines file plus a sibling ``<stem>.images/``
directory of canonical P4 bitmaps.

Block hash: SHA-256 over ``index`` (u64 BE) | ``prev_hash`` (32 raw bytes) |
``step`` (u32 BE) | metadata byte length (u32 BE) | UTF-8 metadata | P4 bytes.
"""

from __future__ import annotations

import binascii
import enum
import hashlib
import json
import os
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Union

import numpy as np

from chainmark.codec import WatermarkBits, embed, extract_bits
from chainmark.errors import (
    BadCrc,
    BadLength,
    BadUtf8,
    CapacityError,
    FrameError,
    ParseError,
    PayloadTooLarge,
    StorageError,
)
from chainmark.imagecore import BinaryImage, load_pbm, save_pbm

GENESIS_HASH = "00" * 32
HEADER_BITS = 16
CRC_BITS = 16


def crc16_ccitt_false(data: bytes) -> int:
    """CRC-16/CCITT-FALSE: poly 0x1021, init 0xFFFF, no reflection, no xorout."""
    return binascii.crc_hqx(data, 0xFFFF)


def framed_bits(metadata: str) -> WatermarkBits:
    """``len`` (u16 BE) | UTF-8 bytes | CRC-16 of the bytes, MSB first."""
    payload = metadata.encode("utf-8")
    if len(payload) >= 1 << 16:
        raise PayloadTooLarge(f"metadata is {len(payload)} bytes, limit is 65535")
    frame = struct.pack(">H", len(payload)) + payload + struct.pack(">H", crc16_ccitt_false(payload))
    return WatermarkBits(np.unpackbits(np.frombuffer(frame, dtype=np.uint8)))


def frame_length(nbytes: int) -> int:
    return HEADER_BITS + 8 * nbytes + CRC_BITS


def unframe(bits: WatermarkBits) -> str:
    if len(bits) < HEADER_BITS + CRC_BITS or len(bits) % 8:
        raise BadLength(f"{len(bits)} bits cannot hold a frame")
    raw = np.packbits(bits.bits).tobytes()
    (size,) = struct.unpack(">H", raw[:2])
    if len(raw) != size + 4:
        raise BadLength(f"header announces {size} bytes, frame holds {len(raw) - 4}")
    payload = raw[2:-2]
    (crc,) = struct.unpack(">H", raw[-2:])
    if crc != crc16_ccitt_false(payload):
        raise BadCrc(f"crc {crc:#06x} does not match payload")
    try:
        return payload.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise BadUtf8(str(exc)) from exc


def extract_framed(img: BinaryImage, step: int) -> str:
    """Blindly read a framed watermark; raises CapacityError or FrameError."""
    header = extract_bits(img, HEADER_BITS, step)
    size = int.from_bytes(np.packbits(header.bits).tobytes(), "big")
    return unframe(extract_bits(img, frame_length(size), step))


class Verdict(enum.Enum):
    INTACT = "Intact"
    IMAGE_TAMPERED = "ImageTampered"
    METADATA_TAMPERED = "MetadataTampered"
    CHAIN_LINK_BROKEN = "ChainLinkBroken"


@dataclass(frozen=True)
class TamperVerdict:
    kind: Verdict
    block_index: int
    detail: str = ""

    def __str__(self):
        tail = f": {self.detail}" if self.detail else ""
        return f"block {self.block_index}: {self.kind.value}{tail}"


@dataclass(frozen=True)
class ChainRecord:
    image: BinaryImage
    metadata: str
    step: int


@dataclass(frozen=True)
class Block:
    index: int
    prev_hash: str
    record_hash: str
    payload: ChainRecord
    image_path: str

    def to_json(self) -> str:
        entry = {
            "index": self.index,
            "prev_hash": self.prev_hash,
            "record_hash": self.record_hash,
            "metadata": self.payload.metadata,
            "image_path": self.image_path,
            "step": self.payload.step,
        }
        return json.dumps(entry, ensure_ascii=False, sort_keys=True, separators=(",", ":"))


def block_digest(index: int, prev_hash: str, step: int, metadata: str, image_bytes: bytes) -> str:
    meta = metadata.encode("utf-8")
    h = hashlib.sha256()
    h.update(struct.pack(">Q", index))
    h.update(bytes.fromhex(prev_hash))
    h.update(struct.pack(">II", step, len(meta)))
    h.update(meta)
    h.update(image_bytes)
    return h.hexdigest()


def classify_tamper(record: ChainRecord, block_index: int = 0) -> TamperVerdict:
    """Decide which half of a record, if any, was altered."""
    try:
        text = extract_framed(record.image, record.step)
    except CapacityError as exc:
        return TamperVerdict(Verdict.IMAGE_TAMPERED, block_index, f"watermark not detected: {exc}")
    except FrameError as exc:
        kind = type(exc).__name__
        return TamperVerdict(Verdict.IMAGE_TAMPERED, block_index, f"watermark not detected ({kind}): {exc}")
    if text != record.metadata:
        return TamperVerdict(
            Verdict.METADATA_TAMPERED, block_index, f"page carries {text!r}, record says {record.metadata!r}"
        )
    return TamperVerdict(Verdict.INTACT, block_index)


class Chain:
    """A chain file plus its image directory. Appends must be serialized by the caller."""

    def __init__(self, path: Union[str, os.PathLike]):
        self.path = Path(path)

    @property
    def image_dir(self) -> Path:
        return self.path.with_name(self.path.name + ".images")

    @classmethod
    def init(cls, path: Union[str, os.PathLike]) -> "Chain":
        chain = cls(path)
        try:
            if chain.path.exists() and chain.path.stat().st_size:
                raise StorageError(f"{chain.path} already holds a chain")
            chain.path.parent.mkdir(parents=True, exist_ok=True)
            chain.path.write_bytes(b"")
            chain.image_dir.mkdir(exist_ok=True)
        except OSError as exc:
            if isinstance(exc, StorageError):
                raise
            raise StorageError(f"cannot create chain at {chain.path}: {exc}") from exc
        return chain

    def _lines(self) -> List[str]:
        try:
            text = self.path.read_text(encoding="utf-8")
        except (OSError, UnicodeDecodeError) as exc:
            raise StorageError(f"cannot read chain {self.path}: {exc}") from exc
        return [line for line in text.split("\n") if line.strip()]

    def __len__(self):
        return len(self._lines())

    def entries(self) -> List[dict]:
        """Raw stored entries; raises StorageError on undecodable lines."""
        out = []
        for n, line in enumerate(self._lines()):
            try:
                out.append(json.loads(line))
            except json.JSONDecodeError as exc:
                raise StorageError(f"line {n} of {self.path} is not JSON: {exc}") from exc
        return out

    def read_image_bytes(self, image_path: str) -> bytes:
        rel = Path(image_path)
        if rel.is_absolute() or ".." in rel.parts:
            raise StorageError(f"image path {image_path!r} escapes the chain directory")
        try:
            return (self.path.parent / rel).read_bytes()
        except OSError as exc:
            raise StorageError(f"cannot read image {image_path}: {exc}") from exc

    def last_hash(self) -> str:
        lines = self._lines()
        if not lines:
            return GENESIS_HASH
        try:
            return json.loads(lines[-1])["record_hash"]
        except (json.JSONDecodeError, KeyError) as exc:
            raise StorageError(f"cannot read the last block of {self.path}: {exc}") from exc


def append_record(chain: Chain, raw_image: BinaryImage, metadata: str, step: int) -> Block:
    """Watermark ``raw_image`` with ``metadata`` and append it as a new block."""
    marked, _ = embed(raw_image, framed_bits(metadata), step)
    image_bytes = save_pbm(marked, "P4")

    index = len(chain)
    prev = chain.last_hash()
    image_path = f"{chain.image_dir.name}/{index:06d}.pbm"
    block = Block(
        index=index,
        prev_hash=prev,
        record_hash=block_digest(index, prev, step, metadata, image_bytes),
        payload=ChainRecord(marked, metadata, step),
        image_path=image_path,
    )
    try:
        chain.image_dir.mkdir(exist_ok=True)
        (chain.path.parent / image_path).write_bytes(image_bytes)
        with chain.path.open("a", encoding="utf-8") as fh:
            fh.write(block.to_json() + "\n")
    except OSError as exc:
        raise StorageError(f"cannot append to {chain.path}: {exc}") from exc
    return block


def _audit_entry(chain: Chain, index: int, raw: str, prev_hash: Optional[str]):
    """Check one stored line; returns (verdict, stored record_hash or None)."""

    def broken(detail):
        return TamperVerdict(Verdict.CHAIN_LINK_BROKEN, index, detail)

    try:
        entry = json.loads(raw)
        stored_index = entry["index"]
        stored_prev = entry["prev_hash"]
        stored_hash = entry["record_hash"]
        metadata = entry["metadata"]
        step = entry["step"]
        image_path = entry["image_path"]
        bytes.fromhex(stored_prev)
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        return broken(f"unreadable entry: {exc}"), None

    if not isinstance(step, int) or isinstance(step, bool) or step < 2 or len(stored_prev) != 64:
        return broken("malformed fields"), stored_hash
    try:
        image_bytes = chain.read_image_bytes(image_path)
    except StorageError as exc:
        return broken(str(exc)), stored_hash

    actual = block_digest(index, stored_prev, step, metadata, image_bytes)
    if stored_index != index or actual != stored_hash:
        return broken("record hash does not match stored content"), stored_hash
    if stored_prev != prev_hash:
        return broken("prev_hash does not match the preceding block"), stored_hash

    try:
        image = load_pbm(image_bytes)
    except ParseError as exc:
        return TamperVerdict(Verdict.IMAGE_TAMPERED, index, f"image unreadable: {exc}"), stored_hash
    if image.height < step:
        return TamperVerdict(Verdict.IMAGE_TAMPERED, index, "image shorter than one strip"), stored_hash
    return classify_tamper(ChainRecord(image, metadata, step), index), stored_hash


def verify_chain(chain: Chain) -> List[TamperVerdict]:
    """One verdict per stored block, in chain order."""
    if not chain.path.exists():
        raise StorageError(f"no chain at {chain.path}")
    verdicts = []
    prev: Optional[str] = GENESIS_HASH
    for index, raw in enumerate(chain._lines()):
        verdict, stored_hash = _audit_entry(chain, index, raw, prev)
        verdicts.append(verdict)
        prev = stored_hash
    return verdicts
