"""3x3 square erosion and dilation.

Gray erosion pads by replicating the edge so flat images stay flat.
Binary operations treat everything outside the frame as black, so masks
shrink away from the border under erosion.
"""

from __future__ import annotations

import numpy as np
from scipy import ndimage

from .imgcore import BLACK, WHITE

SQUARE = np.ones((3, 3), dtype=bool)


def _check_count(n: int) -> None:
    if n < 0:
        raise ValueError(f"repetition count must be >= 0, got {n}")


def erode_gray(img: np.ndarray, n: int) -> np.ndarray:
    _check_count(n)
    out = np.asarray(img, dtype=np.uint8)
    for _ in range(n):
        out = ndimage.minimum_filter(out, size=3, mode="nearest")
    return out.copy() if n == 0 else out


def _binary(op, mask: np.ndarray, n: int) -> np.ndarray:
    _check_count(n)
    white = np.asarray(mask) == WHITE
    if n > 0:
        # iterations=0 would mean "until idempotent" to scipy
        white = op(white, structure=SQUARE, iterations=n, border_value=0)
    return np.where(white, WHITE, BLACK).astype(np.uint8)


def erode_binary(mask: np.ndarray, n: int) -> np.ndarray:
    return _binary(ndimage.binary_erosion, mask, n)


def dilate_binary(mask: np.ndarray, n: int) -> np.ndarray:
    return _binary(ndimage.binary_dilation, mask, n)
