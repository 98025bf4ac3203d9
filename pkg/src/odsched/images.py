"""Grayscale frame images: in-memory representation plus PGM and base64 I/O.

Pixels are stored as float64 in [0, 255] so that correlation math runs
without per-call casts; file formats are 8-bit.
"""

from __future__ import annotations

import base64
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


@dataclass(frozen=True, eq=False)
class GrayscaleImage:
    """A single-channel image, row-major, intensities in [0, 255]."""

    pixels: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        px = np.asarray(self.pixels, dtype=np.float64)
        if px.ndim != 2 or px.shape[0] < 1 or px.shape[1] < 1:
            raise ValueError(f"image must be a 2-D array, got shape {px.shape}")
        if not np.all(np.isfinite(px)):
            raise ValueError("image contains non-finite intensities")
        if px.min() < 0.0 or px.max() > 255.0:
            raise ValueError("image intensities must lie in [0, 255]")
        object.__setattr__(self, "pixels", px)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @classmethod
    def from_bytes(cls, width: int, height: int, raw: bytes) -> GrayscaleImage:
        if width < 1 or height < 1:
            raise ValueError("image dimensions must be positive")
        if len(raw) != width * height:
            raise ValueError(
                f"pixel count {len(raw)} does not match {width}x{height}"
            )
        px = np.frombuffer(raw, dtype=np.uint8).reshape(height, width)
        return cls(px.astype(np.float64))

    def to_bytes(self) -> bytes:
        """Quantize to 8-bit (round-half-even) and return row-major bytes."""
        return np.rint(self.pixels).astype(np.uint8).tobytes()


def encode_inline(img: GrayscaleImage) -> dict:
    """Inline trace-file form: dimensions plus base64 of the 8-bit pixels."""
    return {
        "width": img.width,
        "height": img.height,
        "pixels_b64": base64.b64encode(img.to_bytes()).decode("ascii"),
    }


def decode_inline(obj: dict) -> GrayscaleImage:
    try:
        width = int(obj["width"])
        height = int(obj["height"])
        raw = base64.b64decode(obj["pixels_b64"], validate=True)
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"bad inline image block: {exc}") from exc
    return GrayscaleImage.from_bytes(width, height, raw)


def read_pgm(path: str | Path) -> GrayscaleImage:
    """Read a binary (P5) PGM file with maxval <= 255."""
    data = Path(path).read_bytes()
    fields: list[bytes] = []
    pos = 0
    # Header: magic, width, height, maxval -- whitespace separated, with
    # '#' comments allowed between tokens.
    while len(fields) < 4:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos : pos + 1] != b"\n":
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise ValueError(f"{path}: truncated PGM header")
        fields.append(data[start:pos])
    if fields[0] != b"P5":
        raise ValueError(f"{path}: not a binary PGM (P5) file")
    try:
        width, height, maxval = int(fields[1]), int(fields[2]), int(fields[3])
    except ValueError as exc:
        raise ValueError(f"{path}: bad PGM header: {exc}") from exc
    if maxval < 1 or maxval > 255:
        raise ValueError(f"{path}: PGM maxval {maxval} unsupported (need <= 255)")
    pos += 1  # single whitespace byte after maxval
    raw = data[pos : pos + width * height]
    if len(raw) != width * height:
        raise ValueError(f"{path}: PGM pixel data truncated")
    return GrayscaleImage.from_bytes(width, height, raw)


def write_pgm(img: GrayscaleImage, path: str | Path) -> None:
    header = f"P5\n{img.width} {img.height}\n255\n".encode("ascii")
    Path(path).write_bytes(header + img.to_bytes())
