"""Binary PGM (P5) and PPM (P6) images with 8-bit samples."""

from __future__ import annotations

import numpy as np

from .errors import FormatError

_WHITESPACE = b" \t\r\n\v\f"


class ImageFormatError(FormatError):
    """Malformed or unsupported PNM data."""


def _header_tokens(data: bytes, count: int):
    """First ``count`` header tokens and the offset just past the single whitespace byte after the last."""
    tokens = []
    pos = 0
    n = len(data)
    while len(tokens) < count:
        while pos < n and data[pos] in _WHITESPACE:
            pos += 1
        if pos < n and data[pos] == ord("#"):
            while pos < n and data[pos] not in b"\r\n":
                pos += 1
            continue
        start = pos
        while pos < n and data[pos] not in _WHITESPACE and data[pos] != ord("#"):
            pos += 1
        if start == pos:
            raise ImageFormatError("truncated PNM header")
        tokens.append(data[start:pos])
    if pos >= n or data[pos] not in _WHITESPACE:
        raise ImageFormatError("PNM header must end with one whitespace byte")
    return tokens, pos + 1


def decode_pnm(data: bytes) -> np.ndarray:
    """Decode P5/P6 bytes into ``(H, W)`` or ``(H, W, 3)`` uint8."""
    tokens, offset = _header_tokens(data, 4)
    magic = tokens[0]
    if magic not in (b"P5", b"P6"):
        raise ImageFormatError(f"unsupported PNM magic {magic!r}; only P5 and P6 are read")
    try:
        width, height, maxval = (int(t) for t in tokens[1:])
    except ValueError:
        raise ImageFormatError("non-integer PNM header field") from None
    if width <= 0 or height <= 0:
        raise ImageFormatError(f"image dimensions must be positive, got {width}x{height}")
    if maxval != 255:
        raise ImageFormatError(f"only maxval 255 is supported, got {maxval}")
    channels = 1 if magic == b"P5" else 3
    size = width * height * channels
    payload = data[offset : offset + size]
    if len(payload) != size:
        raise ImageFormatError(f"expected {size} sample bytes, found {len(payload)}")
    img = np.frombuffer(payload, dtype=np.uint8).reshape(height, width, channels)
    return img[..., 0].copy() if channels == 1 else img.copy()


def encode_pnm(image) -> bytes:
    """Encode a uint8 image with the header ``P5\\n{w} {h}\\n255\\n`` (P6 for three channels)."""
    img = np.asarray(image)
    if img.dtype != np.uint8:
        raise ImageFormatError(f"image must be uint8, got {img.dtype}")
    if img.ndim == 2:
        magic = b"P5"
    elif img.ndim == 3 and img.shape[2] == 3:
        magic = b"P6"
    else:
        raise ImageFormatError(f"image must be (H, W) or (H, W, 3), got shape {img.shape}")
    h, w = img.shape[:2]
    if h == 0 or w == 0:
        raise ImageFormatError("image is empty")
    return magic + f"\n{w} {h}\n255\n".encode("ascii") + np.ascontiguousarray(img).tobytes()


def read_pnm(path) -> np.ndarray:
    with open(path, "rb") as fh:
        return decode_pnm(fh.read())


def write_pnm(path, image) -> None:
    data = encode_pnm(image)
    with open(path, "wb") as fh:
        fh.write(data)
