"""Portable file formats: MMCAL1 binary matrices, PGM images, CSV tables.

The binary matrix format is deliberately trivial to parse from any
language: magic "MMCAL1\\0", u32 rows, u32 cols (little-endian), one
precision tag byte (4 or 8 = bytes per scalar), then the row-major
little-endian IEEE-754 payload. All writes go through a temp file plus
rename so partially written artifacts never appear under the final name.
"""

from __future__ import annotations

import math
import os
import struct
from pathlib import Path

import numpy as np

from .errors import ParseError
from .precision import Precision

__all__ = [
    "MAGIC",
    "atomic_write_bytes",
    "format_float",
    "read_matrix",
    "read_pgm",
    "read_matrix_csv",
    "write_curve_csv",
    "write_matrix",
    "write_matrix_csv",
    "write_pgm",
    "write_rows_csv",
    "write_vector",
    "read_vector",
]

MAGIC = b"MMCAL1\x00"
_HEADER = struct.Struct("<IIB")


def atomic_write_bytes(path, data: bytes) -> Path:
    """Write via temp file + rename so readers never see partial content."""
    path = Path(path)
    tmp = path.with_name(path.name + f".tmp{os.getpid()}")
    tmp.write_bytes(data)
    os.replace(tmp, path)
    return path


def atomic_write_text(path, text: str) -> Path:
    return atomic_write_bytes(path, text.encode("utf-8"))


def write_matrix(path, arr) -> Path:
    """Serialize a 2-D float array to the MMCAL1 binary format."""
    arr = np.asarray(arr)
    if arr.ndim != 2:
        raise ValueError(f"expected a 2-D array, got shape {arr.shape}")
    prec = Precision.from_dtype(arr.dtype)
    tag = 4 if prec is Precision.BITS32 else 8
    payload = np.ascontiguousarray(arr, dtype=arr.dtype.newbyteorder("<")).tobytes()
    data = MAGIC + _HEADER.pack(arr.shape[0], arr.shape[1], tag) + payload
    return atomic_write_bytes(path, data)


def read_matrix(path) -> np.ndarray:
    data = Path(path).read_bytes()
    if len(data) < len(MAGIC) or data[: len(MAGIC)] != MAGIC:
        raise ParseError(f"{path}: bad magic (expected MMCAL1)", offset=0)
    off = len(MAGIC)
    if len(data) < off + _HEADER.size:
        raise ParseError(f"{path}: truncated header", offset=len(data))
    rows, cols, tag = _HEADER.unpack_from(data, off)
    off += _HEADER.size
    if tag == 4:
        dtype = np.dtype("<f4")
    elif tag == 8:
        dtype = np.dtype("<f8")
    else:
        raise ParseError(f"{path}: bad precision tag {tag} (expected 4 or 8)", offset=off - 1)
    expected = rows * cols * tag
    if len(data) - off != expected:
        raise ParseError(
            f"{path}: payload is {len(data) - off} bytes, expected {expected}",
            offset=off,
        )
    flat = np.frombuffer(data, dtype=dtype, count=rows * cols, offset=off)
    out = flat.reshape(rows, cols).astype(dtype.newbyteorder("="), copy=True)
    return np.ascontiguousarray(out)


def write_vector(path, vec) -> Path:
    """Vectors travel as single-row matrices."""
    vec = np.asarray(vec)
    if vec.ndim != 1:
        raise ValueError(f"expected a 1-D array, got shape {vec.shape}")
    return write_matrix(path, vec.reshape(1, -1))


def read_vector(path) -> np.ndarray:
    mat = read_matrix(path)
    if mat.shape[0] != 1:
        raise ParseError(f"{path}: expected a single-row matrix, got {mat.shape}")
    return np.ascontiguousarray(mat.reshape(-1))


# ---------------------------------------------------------------------------
# PGM images (P2 ASCII and P5 binary), scaled to [0, 1] by 1/maxval.

def read_pgm(path) -> np.ndarray:
    data = Path(path).read_bytes()
    pos = 0

    def _token():
        nonlocal pos
        while pos < len(data):
            if data[pos : pos + 1].isspace():
                pos += 1
            elif data[pos : pos + 1] == b"#":
                while pos < len(data) and data[pos] != 0x0A:
                    pos += 1
            else:
                break
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise ParseError(f"{path}: unexpected end of header", offset=start)
        return data[start:pos]

    magic = _token()
    if magic not in (b"P2", b"P5"):
        raise ParseError(f"{path}: not a PGM file (magic {magic!r})", offset=0)
    try:
        width = int(_token())
        height = int(_token())
        maxval = int(_token())
    except ValueError as exc:
        raise ParseError(f"{path}: malformed header field: {exc}", offset=pos) from exc
    if width <= 0 or height <= 0 or not (0 < maxval < 65536):
        raise ParseError(f"{path}: bad dimensions {width}x{height} maxval {maxval}", offset=pos)
    count = width * height
    if magic == b"P2":
        try:
            values = np.array([int(tok) for tok in data[pos:].split()], dtype=np.int64)
        except ValueError as exc:
            raise ParseError(f"{path}: malformed ASCII sample: {exc}", offset=pos) from exc
        if values.size != count:
            raise ParseError(f"{path}: expected {count} samples, got {values.size}", offset=pos)
    else:
        pos += 1  # single whitespace byte after maxval
        width_bytes = 2 if maxval > 255 else 1
        need = count * width_bytes
        raw = data[pos : pos + need]
        if len(raw) != need:
            raise ParseError(f"{path}: expected {need} payload bytes, got {len(raw)}", offset=pos)
        dtype = ">u2" if width_bytes == 2 else "u1"
        values = np.frombuffer(raw, dtype=dtype).astype(np.int64)
    if values.min() < 0 or values.max() > maxval:
        raise ParseError(f"{path}: sample out of range [0, {maxval}]", offset=pos)
    img = values.reshape(height, width).astype(np.float64) / float(maxval)
    return img


def write_pgm(path, image, maxval: int = 255, binary: bool = True) -> Path:
    """Quantize a [0, 1] 2-D image to P5 (or P2) at the given maxval."""
    image = np.asarray(image, dtype=np.float64)
    if image.ndim != 2:
        raise ValueError(f"expected a 2-D image, got shape {image.shape}")
    if not (0 < maxval < 65536):
        raise ValueError(f"maxval must lie in [1, 65535], got {maxval}")
    q = np.rint(np.clip(image, 0.0, 1.0) * maxval).astype(np.int64)
    h, w = image.shape
    header = f"{'P5' if binary else 'P2'}\n{w} {h}\n{maxval}\n".encode("ascii")
    if binary:
        payload = q.astype(">u2" if maxval > 255 else "u1").tobytes()
    else:
        payload = ("\n".join(" ".join(str(v) for v in line) for line in q) + "\n").encode("ascii")
    return atomic_write_bytes(path, header + payload)


# ---------------------------------------------------------------------------
# CSV

def format_float(x) -> str:
    """Shortest decimal that round-trips (exact for the stored width)."""
    if isinstance(x, float) and math.isinf(x):
        return "inf"
    return repr(float(x))


def write_curve_csv(path, errors) -> Path:
    lines = ["epoch,error"]
    for epoch, err in enumerate(errors, start=1):
        lines.append(f"{epoch},{format_float(err)}")
    return atomic_write_text(path, "\n".join(lines) + "\n")


def write_rows_csv(path, header, rows) -> Path:
    def _cell(v):
        if isinstance(v, str):
            return v
        if isinstance(v, bool):
            return "true" if v else "false"
        if isinstance(v, (int, np.integer)):
            return str(int(v))
        return format_float(v)

    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_cell(v) for v in row))
    return atomic_write_text(path, "\n".join(lines) + "\n")


def write_matrix_csv(path, arr) -> Path:
    """Lossless CSV form of a matrix; precision kept in a comment header."""
    arr = np.asarray(arr)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    prec = Precision.from_dtype(arr.dtype)
    lines = [f"# mmcal-matrix precision={prec.value} rows={arr.shape[0]} cols={arr.shape[1]}"]
    for row in arr:
        lines.append(",".join(format_float(v) for v in row))
    return atomic_write_text(path, "\n".join(lines) + "\n")


def read_matrix_csv(path) -> np.ndarray:
    text = Path(path).read_text(encoding="utf-8")
    lines = [ln for ln in text.splitlines() if ln.strip()]
    precision = Precision.BITS64
    rows = []
    for ln in lines:
        if ln.startswith("#"):
            for field in ln[1:].split():
                if field.startswith("precision="):
                    precision = Precision.parse(field.split("=", 1)[1])
            continue
        try:
            rows.append([float(tok) for tok in ln.split(",")])
        except ValueError as exc:
            raise ParseError(f"{path}: bad CSV row {ln[:40]!r}: {exc}") from exc
    if not rows:
        raise ParseError(f"{path}: no data rows")
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise ParseError(f"{path}: ragged rows")
    return np.ascontiguousarray(np.array(rows, dtype=precision.dtype))
