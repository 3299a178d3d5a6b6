"""Command-line front end.

Exit codes: 0 success or verified, 1 verification failed or tampering
found, 2 usage error, 3 I/O, format or capacity error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import List, Optional

from chainmark import capacity, codec, ledger, steganalysis
from chainmark.errors import CapacityError, ChainmarkError, DecodeFailure, FrameError
from chainmark.imagecore import (
    binarize,
    generate_synthetic,
    load_pbm,
    load_pgm,
    otsu_threshold,
    save_pbm,
)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2
EXIT_IO = 3


class UsageError(Exception):
    pass


def _read(path: str) -> bytes:
    return Path(path).read_bytes()


def _write(path: str, data: bytes) -> None:
    Path(path).write_bytes(data)


def _steps(text: str) -> List[int]:
    try:
        steps = [int(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid step list {text!r}")
    if any(s < 2 for s in steps):
        raise argparse.ArgumentTypeError("steps must be >= 2")
    return steps


def _step(text: str) -> int:
    try:
        step = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid step {text!r}")
    if step < 2:
        raise argparse.ArgumentTypeError("step must be >= 2")
    return step


def _intensity(text: str) -> int:
    try:
        t = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid threshold {text!r}")
    if not 0 <= t <= 255:
        raise argparse.ArgumentTypeError("threshold must lie in [0, 255]")
    return t


def _payload(args) -> codec.WatermarkBits:
    if args.bits is not None:
        try:
            return codec.WatermarkBits.from_string(args.bits)
        except ValueError as exc:
            raise UsageError(str(exc))
    return codec.text_to_bits(args.text)


def _add_payload(p):
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--text", help="UTF-8 text watermark")
    group.add_argument("--bits", help="raw watermark as a string of 0/1")


def cmd_binarize(args, out, err):
    gray = load_pgm(_read(args.input))
    t = otsu_threshold(gray) if args.threshold is None else args.threshold
    _write(args.output, save_pbm(binarize(gray, t), args.format))
    print(f"threshold {t}", file=err)
    return EXIT_OK


def cmd_embed(args, out, err):
    img = load_pbm(_read(args.input))
    marked, report = codec.embed(img, _payload(args), args.step)
    _write(args.output, save_pbm(marked, args.format))
    if args.report:
        Path(args.report).write_text(report.to_json(), encoding="utf-8")
    print(
        f"embedded {len(report.consumed)} bits in {report.strips_used} strips, "
        f"{report.pixels_toggled} pixels toggled",
        file=err,
    )
    return EXIT_OK


def cmd_extract(args, out, err):
    img = load_pbm(_read(args.input))
    if args.framed:
        try:
            print(ledger.extract_framed(img, args.step), file=out)
        except (CapacityError, FrameError) as exc:
            print(f"watermark not detected: {exc}", file=err)
            return EXIT_FAILED
        return EXIT_OK
    if args.nbits is None:
        raise UsageError("extract needs --nbits unless --framed is given")
    try:
        bits = codec.extract_bits(img, args.nbits, args.step)
    except CapacityError as exc:
        print(f"watermark not detected: {exc}", file=err)
        return EXIT_FAILED
    print(bits, file=out)
    try:
        print(codec.bits_to_text(bits), file=out)
    except DecodeFailure:
        pass
    return EXIT_OK


def cmd_verify(args, out, err):
    img = load_pbm(_read(args.input))
    ok = codec.verify_watermark(img, _payload(args), args.step)
    print("verified" if ok else "watermark mismatch", file=out)
    return EXIT_OK if ok else EXIT_FAILED


def cmd_capacity(args, out, err):
    img = load_pbm(_read(args.input))
    out.write(capacity.capacity_curve(img, args.steps).to_csv())
    return EXIT_OK


def cmd_recommend(args, out, err):
    images = [load_pbm(_read(p)) for p in args.inputs]
    print(capacity.recommend_step(images, args.steps, args.required_bits), file=out)
    return EXIT_OK


def cmd_acorr(args, out, err):
    img = load_pbm(_read(args.input))
    after = steganalysis.autocorr(steganalysis.parity_sequence(img, args.step), args.max_lag)
    if args.against is None:
        out.write(after.to_csv())
        return EXIT_OK
    ref = load_pbm(_read(args.against))
    before = steganalysis.autocorr(steganalysis.parity_sequence(ref, args.step), args.max_lag)
    out.write(steganalysis.diff_to_csv(steganalysis.acorr_diff(before, after)))
    return EXIT_OK


def cmd_synth(args, out, err):
    img = generate_synthetic(
        args.width, args.height, args.strokes, args.seed, stroke_height=args.stroke_height
    )
    _write(args.output, save_pbm(img, args.format))
    return EXIT_OK


def cmd_chain(args, out, err):
    if args.action == "init":
        ledger.Chain.init(args.chain)
        return EXIT_OK
    chain = ledger.Chain(args.chain)
    if args.action == "append":
        block = ledger.append_record(chain, load_pbm(_read(args.input)), args.text, args.step)
        print(f"{block.index} {block.record_hash}", file=out)
        return EXIT_OK
    verdicts = ledger.verify_chain(chain)
    for v in verdicts:
        print(v, file=out)
    clean = all(v.kind is ledger.Verdict.INTACT for v in verdicts)
    return EXIT_OK if clean else EXIT_FAILED


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="chainmark",
        description="Parity-column watermarks for black-white document scans.",
        epilog="exit codes: 0 ok, 1 verification failed or tampering, 2 usage, 3 I/O or capacity",
    )
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    step_help = f"strip height in pixels (default {codec.DEFAULT_STEP})"

    p = sub.add_parser("binarize", help="Otsu-binarize a PGM into a PBM")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--threshold", type=_intensity, metavar="T", help="fixed threshold instead of Otsu")
    p.add_argument("--format", choices=["P1", "P4"], default="P4")
    p.set_defaults(func=cmd_binarize)

    p = sub.add_parser("embed", help="embed a watermark")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--step", type=_step, default=codec.DEFAULT_STEP, help=step_help)
    _add_payload(p)
    p.add_argument("--report", help="write the embed report as JSON")
    p.add_argument("--format", choices=["P1", "P4"], default="P4")
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("extract", help="extract watermark bits")
    p.add_argument("input")
    p.add_argument("--step", type=_step, default=codec.DEFAULT_STEP, help=step_help)
    p.add_argument("--nbits", type=int)
    p.add_argument("--framed", action="store_true", help="read a length+CRC framed text")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("verify", help="check that a page carries a watermark")
    p.add_argument("input")
    p.add_argument("--step", type=_step, default=codec.DEFAULT_STEP, help=step_help)
    _add_payload(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("capacity", help="CSV of capacity per strip height")
    p.add_argument("input")
    p.add_argument("--steps", type=_steps, required=True, help="comma-separated strip heights")
    p.set_defaults(func=cmd_capacity)

    p = sub.add_parser("recommend", help="pick a shared strip height for several pages")
    p.add_argument("inputs", nargs="+")
    p.add_argument("--steps", type=_steps, required=True)
    p.add_argument("--required-bits", type=int, default=capacity.DEFAULT_REQUIRED_BITS)
    p.set_defaults(func=cmd_recommend)

    p = sub.add_parser("acorr", help="CSV autocorrelation of column parities")
    p.add_argument("input")
    p.add_argument("--step", type=_step, default=codec.DEFAULT_STEP, help=step_help)
    p.add_argument("--max-lag", type=int, required=True)
    p.add_argument("--against", help="unmarked original; print per-lag differences instead")
    p.set_defaults(func=cmd_acorr)

    p = sub.add_parser("synth", help="generate a synthetic handwritten page")
    p.add_argument("output")
    p.add_argument("--width", type=int, required=True)
    p.add_argument("--height", type=int, required=True)
    p.add_argument("--strokes", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--stroke-height", type=int, default=32)
    p.add_argument("--format", choices=["P1", "P4"], default="P4")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("chain", help="hash-chained record ledger")
    actions = p.add_subparsers(dest="action", required=True, parser_class=_Parser)
    for name, text in [
        ("init", "create an empty chain"),
        ("append", "watermark a page with its metadata and append it"),
        ("audit", "verify hashes, links and watermarks"),
    ]:
        a = actions.add_parser(name, help=text)
        a.add_argument("--chain", required=True, help="chain file (JSON lines)")
        if name == "append":
            a.add_argument("input", help="page bitmap")
            a.add_argument("--text", required=True, help="record metadata")
            a.add_argument("--step", type=_step, default=codec.DEFAULT_STEP, help=step_help)
        a.set_defaults(func=cmd_chain)
    return parser


def run(argv: Optional[List[str]] = None, out=None, err=None) -> int:
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    try:
        args = build_parser().parse_args(argv)
        return args.func(args, out, err)
    except UsageError as exc:
        print(exc, file=err)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    except (CapacityError, OSError, ChainmarkError, ValueError) as exc:
        print(f"error: {exc}", file=err)
        return EXIT_IO


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
