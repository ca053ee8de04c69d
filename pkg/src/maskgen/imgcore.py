"""Image substrate shared by every stage.

Images are plain numpy arrays:

* gray image   -- ``uint8`` array of shape ``(height, width)``
* color image  -- ``uint8`` array of shape ``(height, width, 3)``, RGB order
* binary mask  -- ``uint8`` array of shape ``(height, width)`` holding only 0 and 255

Boxes are half-open integer rectangles ``[x0, x1) x [y0, y1)``.
"""

from __future__ import annotations

import io
from pathlib import Path
from typing import Iterable, NamedTuple

import numpy as np
from PIL import Image

WHITE = 255
BLACK = 0


class MaskgenError(Exception):
    """Base class for all errors raised by this package."""


class DimensionMismatch(MaskgenError, ValueError):
    pass


class DecodeError(MaskgenError):
    pass


class ImageIOError(MaskgenError, OSError):
    pass


class Box(NamedTuple):
    x0: int
    y0: int
    x1: int
    y1: int

    @property
    def area(self) -> int:
        return (self.x1 - self.x0) * (self.y1 - self.y0)

    def clip(self, width: int, height: int) -> Box | None:
        """Clip to the image frame; None when nothing is left."""
        x0, y0 = max(self.x0, 0), max(self.y0, 0)
        x1, y1 = min(self.x1, width), min(self.y1, height)
        if x0 >= x1 or y0 >= y1:
            return None
        return Box(x0, y0, x1, y1)


def _check_same_shape(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape[:2] != b.shape[:2]:
        raise DimensionMismatch(
            f"size mismatch: {a.shape[1]}x{a.shape[0]} vs {b.shape[1]}x{b.shape[0]}"
        )


def to_gray(img: np.ndarray) -> np.ndarray:
    """BT.601 luma, rounded half away from zero.

    Done in integer arithmetic (weights scaled by 1000) so that exact
    half-way sums round the same way on every platform.
    """
    rgb = np.asarray(img, dtype=np.int64)
    if rgb.ndim != 3 or rgb.shape[2] != 3:
        raise ValueError(f"expected an (H, W, 3) color image, got shape {rgb.shape}")
    weighted = 299 * rgb[..., 0] + 587 * rgb[..., 1] + 114 * rgb[..., 2]
    # all terms are non-negative, so half-up equals half-away-from-zero
    gray = (weighted + 500) // 1000
    return np.clip(gray, 0, 255).astype(np.uint8)


def abs_diff(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    _check_same_shape(a, b)
    return np.abs(a.astype(np.int16) - b.astype(np.int16)).astype(np.uint8)


def binarize(img: np.ndarray, threshold: int) -> np.ndarray:
    """255 where ``img >= threshold``, else 0."""
    if not 0 <= threshold <= 255:
        raise ValueError(f"threshold must be in [0, 255], got {threshold}")
    return np.where(np.asarray(img) >= threshold, WHITE, BLACK).astype(np.uint8)


def union(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    _check_same_shape(a, b)
    return np.where((a == WHITE) | (b == WHITE), WHITE, BLACK).astype(np.uint8)


def fill_boxes(width: int, height: int, boxes: Iterable[Box]) -> np.ndarray:
    mask = np.zeros((height, width), dtype=np.uint8)
    for box in boxes:
        clipped = Box(*box).clip(width, height)
        if clipped is not None:
            mask[clipped.y0:clipped.y1, clipped.x0:clipped.x1] = WHITE
    return mask


def white_fraction(mask: np.ndarray) -> float:
    return float(np.count_nonzero(mask == WHITE)) / mask.size


def load_image(path) -> np.ndarray:
    """Decode a PNG or JPEG file into an RGB ``uint8`` array.

    Grayscale files come back with R = G = B.  Filesystem failures raise
    ``ImageIOError``; anything the decoder rejects raises ``DecodeError``.
    """
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise ImageIOError(f"cannot read {path}: {exc}") from exc
    try:
        with Image.open(io.BytesIO(raw)) as im:
            if im.format not in ("PNG", "JPEG"):
                raise DecodeError(f"{path}: unsupported format {im.format}")
            im.load()
            rgb = im.convert("RGB")
    except DecodeError:
        raise
    except Exception as exc:  # Pillow raises a zoo of types for bad data
        raise DecodeError(f"cannot decode {path}: {exc}") from exc
    return np.asarray(rgb, dtype=np.uint8).copy()


def save_gray(img: np.ndarray, path) -> None:
    """Write an 8-bit single-channel PNG."""
    arr = np.ascontiguousarray(img, dtype=np.uint8)
    if arr.ndim != 2:
        raise ValueError(f"expected a 2-D image, got shape {arr.shape}")
    try:
        Image.fromarray(arr).save(path, format="PNG")
    except OSError as exc:
        raise ImageIOError(f"cannot write {path}: {exc}") from exc


def save_mask(mask: np.ndarray, path) -> None:
    values = np.unique(mask)
    if not set(values.tolist()) <= {BLACK, WHITE}:
        raise ValueError(f"mask holds values other than 0/255: {values.tolist()}")
    save_gray(mask, path)
