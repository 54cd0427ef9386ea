"""Portable bitmap (PBM) reader/writer for binary feature images.

Supports ASCII (P1) and binary (P4) variants. Images are numpy uint8
arrays of shape (height, width), row-major from the top-left; a black
pixel is bit 1.
"""

from __future__ import annotations

import numpy as np


def _tokens(data: bytes):
    """Yield whitespace-separated header tokens, skipping # comments."""
    i = 0
    while i < len(data):
        c = data[i : i + 1]
        if c.isspace():
            i += 1
        elif c == b"#":
            while i < len(data) and data[i : i + 1] != b"\n":
                i += 1
        else:
            j = i
            while j < len(data) and not data[j : j + 1].isspace():
                j += 1
            yield data[i:j], j
            i = j


def read_pbm(path) -> np.ndarray:
    with open(path, "rb") as fh:
        data = fh.read()
    toks = _tokens(data)
    try:
        magic, _ = next(toks)
        width_tok, _ = next(toks)
        height_tok, end = next(toks)
    except StopIteration:
        raise ValueError(f"{path}: truncated PBM header") from None
    if magic not in (b"P1", b"P4"):
        raise ValueError(f"{path}: not a PBM file (magic {magic!r})")
    width, height = int(width_tok), int(height_tok)
    if width < 1 or height < 1:
        raise ValueError(f"{path}: bad dimensions {width}x{height}")
    if magic == b"P1":
        bits = []
        for tok, _ in _tokens(data[end:]):
            bits.extend(int(ch) for ch in tok.decode("ascii"))
        if len(bits) < width * height:
            raise ValueError(f"{path}: expected {width * height} pixels, got {len(bits)}")
        img = np.array(bits[: width * height], dtype=np.uint8)
        if img.max(initial=0) > 1:
            raise ValueError(f"{path}: P1 pixels must be 0 or 1")
        return img.reshape(height, width)
    # P4: single whitespace byte after height, then packed rows (MSB first)
    raster = data[end + 1 :]
    row_bytes = (width + 7) // 8
    if len(raster) < row_bytes * height:
        raise ValueError(f"{path}: truncated P4 raster")
    raw = np.frombuffer(raster[: row_bytes * height], dtype=np.uint8)
    rows = np.unpackbits(raw.reshape(height, row_bytes), axis=1, bitorder="big")
    return rows[:, :width].copy()


def write_pbm(path, image: np.ndarray, binary: bool = True) -> None:
    image = np.asarray(image, dtype=np.uint8)
    if image.ndim != 2:
        raise ValueError("image must be 2-D")
    if image.size and image.max() > 1:
        raise ValueError("image pixels must be 0 or 1")
    height, width = image.shape
    with open(path, "wb") as fh:
        if binary:
            fh.write(f"P4\n{width} {height}\n".encode("ascii"))
            packed = np.packbits(image, axis=1, bitorder="big")
            fh.write(packed.tobytes())
        else:
            fh.write(f"P1\n{width} {height}\n".encode("ascii"))
            for row in image:
                fh.write(("".join(str(int(b)) for b in row) + "\n").encode("ascii"))
