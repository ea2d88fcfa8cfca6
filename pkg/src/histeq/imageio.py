"""Reading and writing grayscale images: PGM (P2/P5) and PNG.

The format is sniffed from the leading magic bytes, never from the file
extension. Colour PNGs are reduced to luma with BT.601 weights
(0.299, 0.587, 0.114) and round-half-up, computed in integer arithmetic.
PGM files with maxval other than 255 are rescaled to 8 bits.

JPEG is deliberately unsupported; convert to PNG or PGM first.
"""

from __future__ import annotations

import enum
import io
import os
from pathlib import Path

import numpy as np
from PIL import Image

from .core import GrayImage

PNG_MAGIC = b"\x89PNG\r\n\x1a\n"
_WHITESPACE = b" \t\n\r\v\f"


class ImageFormat(enum.Enum):
    PGM_ASCII = "pgm_ascii"
    PGM_BINARY = "pgm_binary"
    PNG = "png"


class ImageReadError(ValueError):
    """Base class for load failures. ``offset`` is the byte offset of the
    offending data, when one applies."""

    def __init__(self, message: str, offset: int | None = None):
        self.offset = offset
        if offset is not None:
            message = f"{message} (at byte offset {offset})"
        super().__init__(message)


class UnsupportedFormatError(ImageReadError):
    pass


class MalformedHeaderError(ImageReadError):
    pass


class TruncatedDataError(ImageReadError):
    pass


def detect_format(data: bytes) -> ImageFormat:
    if data.startswith(PNG_MAGIC):
        return ImageFormat.PNG
    if data[:2] == b"P2":
        return ImageFormat.PGM_ASCII
    if data[:2] == b"P5":
        return ImageFormat.PGM_BINARY
    raise UnsupportedFormatError(f"unsupported image format (magic {data[:8]!r})", 0)


def format_for_path(path: str | os.PathLike) -> ImageFormat:
    """Output format implied by a file name: ``.png`` is PNG, anything else binary PGM."""
    return ImageFormat.PNG if Path(path).suffix.lower() == ".png" else ImageFormat.PGM_BINARY


def rescale_to_8bit(values: np.ndarray, maxval: int) -> np.ndarray:
    if maxval == 255:
        return values.astype(np.uint8)
    v = values.astype(np.int64)
    # round(v * 255 / maxval), ties up, in exact integers
    return ((2 * 255 * v + maxval) // (2 * maxval)).astype(np.uint8)


def luma_bt601(rgb: np.ndarray) -> np.ndarray:
    rgb = rgb.astype(np.int64)
    y = 299 * rgb[..., 0] + 587 * rgb[..., 1] + 114 * rgb[..., 2]
    return ((y + 500) // 1000).astype(np.uint8)


class _PgmHeaderReader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 2

    def _skip_space(self) -> None:
        data = self.data
        while self.pos < len(data):
            ch = data[self.pos : self.pos + 1]
            if ch in _WHITESPACE and ch:
                self.pos += 1
            elif ch == b"#":
                nl = data.find(b"\n", self.pos)
                self.pos = len(data) if nl < 0 else nl + 1
            else:
                break

    def integer(self, what: str) -> int:
        start_ws = self.pos
        self._skip_space()
        if self.pos == start_ws and self.pos < len(self.data):
            raise MalformedHeaderError(f"expected whitespace before {what}", self.pos)
        start = self.pos
        while self.pos < len(self.data) and self.data[self.pos : self.pos + 1].isdigit():
            self.pos += 1
        if self.pos == start:
            if start >= len(self.data):
                raise MalformedHeaderError(f"header ends before {what}", start)
            raise MalformedHeaderError(f"invalid {what}", start)
        return int(self.data[start : self.pos])


def _parse_pgm(data: bytes, binary: bool) -> GrayImage:
    hdr = _PgmHeaderReader(data)
    width = hdr.integer("width")
    height = hdr.integer("height")
    max_offset = hdr.pos
    maxval = hdr.integer("maxval")
    if width < 1 or height < 1:
        raise MalformedHeaderError(f"invalid dimensions {width}x{height}", 2)
    if not 1 <= maxval <= 65535:
        raise MalformedHeaderError(f"maxval {maxval} outside 1..65535", max_offset)
    n = width * height
    pos = hdr.pos
    if pos >= len(data) or data[pos : pos + 1] not in _WHITESPACE:
        raise MalformedHeaderError("missing whitespace after maxval", pos)
    pos += 1

    if binary:
        itemsize = 1 if maxval < 256 else 2
        need = n * itemsize
        raster = data[pos : pos + need]
        if len(raster) < need:
            raise TruncatedDataError(
                f"pixel data truncated: expected {need} bytes, found {len(raster)}",
                pos + len(raster),
            )
        values = np.frombuffer(raster, dtype=np.uint8 if itemsize == 1 else ">u2")
        bad = np.flatnonzero(values > maxval)
        if bad.size:
            raise MalformedHeaderError(
                f"sample {int(values[bad[0]])} exceeds maxval {maxval}", pos + int(bad[0]) * itemsize
            )
    else:
        values = np.empty(n, dtype=np.int64)
        text = data
        for i in range(n):
            while pos < len(text) and text[pos : pos + 1] in _WHITESPACE:
                pos += 1
            start = pos
            while pos < len(text) and text[pos : pos + 1].isdigit():
                pos += 1
            if pos == start:
                if start >= len(text):
                    raise TruncatedDataError(f"pixel data truncated after {i} of {n} samples", start)
                raise MalformedHeaderError("invalid ASCII sample", start)
            v = int(text[start:pos])
            if v > maxval:
                raise MalformedHeaderError(f"sample {v} exceeds maxval {maxval}", start)
            values[i] = v
    return GrayImage(rescale_to_8bit(values, maxval).reshape(height, width))


def _decode_png(data: bytes) -> GrayImage:
    try:
        im = Image.open(io.BytesIO(data))
        im.load()
    except Exception as exc:  # Pillow raises a variety of types for corrupt files
        raise ImageReadError(f"cannot decode PNG: {exc}") from exc
    mode = im.mode
    if mode in ("P", "PA"):
        im = im.convert("RGBA")
        mode = "RGBA"
    elif mode == "1":
        im = im.convert("L")
        mode = "L"
    arr = np.asarray(im)
    if mode == "L":
        return GrayImage(arr)
    if mode == "LA":
        return GrayImage(arr[..., 0])
    if mode in ("I;16", "I;16B", "I;16L", "I"):
        return GrayImage(rescale_to_8bit(arr, 65535))
    if mode in ("RGB", "RGBA"):
        return GrayImage(luma_bt601(arr[..., :3]))
    raise UnsupportedFormatError(f"unsupported PNG mode {mode}")


def decode_image(data: bytes) -> GrayImage:
    fmt = detect_format(data)
    if fmt is ImageFormat.PNG:
        return _decode_png(data)
    return _parse_pgm(data, binary=fmt is ImageFormat.PGM_BINARY)


def load_image(path: str | os.PathLike) -> GrayImage:
    """Load a PGM or PNG file as an 8-bit grayscale image."""
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise ImageReadError(f"cannot read {path}: {exc.strerror or exc}") from exc
    return decode_image(data)


def encode_image(img: GrayImage, fmt: ImageFormat = ImageFormat.PGM_BINARY) -> bytes:
    px = img.pixels
    if fmt is ImageFormat.PGM_BINARY:
        return f"P5\n{img.width} {img.height}\n255\n".encode("ascii") + px.tobytes()
    if fmt is ImageFormat.PGM_ASCII:
        rows = "\n".join(" ".join(str(v) for v in row) for row in px.tolist())
        return f"P2\n{img.width} {img.height}\n255\n{rows}\n".encode("ascii")
    if fmt is ImageFormat.PNG:
        buf = io.BytesIO()
        Image.fromarray(np.ascontiguousarray(px)).save(buf, format="PNG")
        return buf.getvalue()
    raise ValueError(f"unknown format {fmt!r}")


def save_image(img: GrayImage, path: str | os.PathLike, fmt: ImageFormat | str | None = None) -> None:
    """Write ``img`` to ``path``; ``fmt`` defaults to the one implied by the suffix."""
    if fmt is None:
        fmt = format_for_path(path)
    fmt = ImageFormat(fmt)
    Path(path).write_bytes(encode_image(img, fmt))
