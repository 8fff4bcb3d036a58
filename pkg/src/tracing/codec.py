"""Line-oriented text encoding of traces.

Layout::

    #trace v1
    #run 3
    #secret 5a1f00c2e48b9d07
    #image 0 2a select
    C 7 a
    R 9 2008 8

Hex fields are lowercase without a ``0x`` prefix; sizes are decimal.
"""

import re
from pathlib import Path
from typing import List, Optional, Union

from core.errors import TraceFormatError
from tracing.model import ADDRESS_MAX, ImageRange, RecordKind, Trace, TraceRecord

MAGIC = "#trace v1"

_HEX = r"[0-9a-f]+"
_RECORD_RE = re.compile(rf"^([CRW]) ({_HEX}) ({_HEX})(?: ([0-9]+))?$")
_RUN_RE = re.compile(r"^#run ([0-9]+)$")
_SECRET_RE = re.compile(rf"^#secret ({_HEX})$")
_IMAGE_RE = re.compile(rf"^#image ({_HEX}) ({_HEX})(?: (.*))?$")


def encode_trace(trace: Trace) -> bytes:
    """Serialize ``trace`` to its canonical UTF-8 text form."""
    if not re.fullmatch(_HEX, trace.secret_id):
        raise ValueError(f"secret id {trace.secret_id!r} is not lowercase hex")
    lines: List[str] = [MAGIC, f"#run {trace.run_index}", f"#secret {trace.secret_id}"]
    for image in trace.image_ranges:
        if "\n" in image.name or "\r" in image.name:
            raise ValueError(f"image name {image.name!r} spans lines")
        head = f"#image {image.base:x} {image.length:x}"
        lines.append(f"{head} {image.name}" if image.name else head)
    for rec in trace.records:
        if rec.kind is RecordKind.CONTROL_TRANSFER:
            lines.append(f"C {rec.pc:x} {rec.target_or_addr:x}")
        else:
            lines.append(f"{rec.kind.value} {rec.pc:x} {rec.target_or_addr:x} {rec.size}")
    return ("\n".join(lines) + "\n").encode("utf-8")


def _u64(text: str, lineno: int, what: str) -> int:
    value = int(text, 16)
    if value > ADDRESS_MAX:
        raise TraceFormatError(f"{what} {text} exceeds 64 bits", lineno)
    return value


def decode_trace(data: Union[bytes, str]) -> Trace:
    """Parse trace text produced by :func:`encode_trace` or an external adapter.

    Raises:
        TraceFormatError: with the 1-based line number of the first bad line.
    """
    if isinstance(data, bytes):
        try:
            text = data.decode("utf-8")
        except UnicodeDecodeError as e:
            raise TraceFormatError(f"not UTF-8: {e.reason}") from e
    else:
        text = data

    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines or lines[0] != MAGIC:
        raise TraceFormatError(f"expected {MAGIC!r} header", 1)

    run_index: Optional[int] = None
    secret_id: Optional[str] = None
    images: List[ImageRange] = []
    records: List[TraceRecord] = []

    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        if line.startswith("#"):
            if records:
                raise TraceFormatError("header line after first record", lineno)
            m = _RUN_RE.match(line)
            if m:
                if run_index is not None:
                    raise TraceFormatError("duplicate #run header", lineno)
                run_index = int(m.group(1))
                continue
            m = _SECRET_RE.match(line)
            if m:
                if secret_id is not None:
                    raise TraceFormatError("duplicate #secret header", lineno)
                secret_id = m.group(1)
                continue
            m = _IMAGE_RE.match(line)
            if m:
                base = _u64(m.group(1), lineno, "image base")
                length = _u64(m.group(2), lineno, "image length")
                images.append(ImageRange(base, length, m.group(3) or ""))
                continue
            raise TraceFormatError(f"unknown header {line.split(' ', 1)[0]!r}", lineno)

        m = _RECORD_RE.match(line)
        if not m:
            letter = line.split(" ", 1)[0]
            if letter not in ("C", "R", "W"):
                raise TraceFormatError(f"unknown record letter {letter!r}", lineno)
            raise TraceFormatError(f"malformed {letter} record {line!r}", lineno)
        letter, pc_hex, val_hex, size_text = m.groups()
        pc = _u64(pc_hex, lineno, "pc")
        value = _u64(val_hex, lineno, "address")
        if letter == "C":
            if size_text is not None:
                raise TraceFormatError("control transfer takes no size field", lineno)
            records.append(TraceRecord.control(pc, value))
        else:
            if size_text is None:
                raise TraceFormatError(f"{letter} record missing size", lineno)
            size = int(size_text)
            if size < 1:
                raise TraceFormatError("memory access size must be >= 1", lineno)
            records.append(TraceRecord(RecordKind(letter), pc, value, size))

    if run_index is None:
        raise TraceFormatError("missing #run header")
    if secret_id is None:
        raise TraceFormatError("missing #secret header")
    return Trace(run_index, secret_id, tuple(records), tuple(images))


def write_trace(trace: Trace, path: Union[str, Path]) -> Path:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    p.write_bytes(encode_trace(trace))
    return p


def read_trace(path: Union[str, Path]) -> Trace:
    p = Path(path)
    try:
        return decode_trace(p.read_bytes())
    except TraceFormatError as e:
        raise TraceFormatError(f"{p}: {e.message}", e.line) from e
