"""Greedy non-maximum suppression over scored boxes."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .imgcore import Box
from .mser import ScoredBox


def iou(a: Box, b: Box) -> float:
    """Intersection over union of two half-open boxes, counted in whole cells."""
    iw = min(a[2], b[2]) - max(a[0], b[0])
    ih = min(a[3], b[3]) - max(a[1], b[1])
    if iw <= 0 or ih <= 0:
        return 0.0
    inter = iw * ih
    area_a = (a[2] - a[0]) * (a[3] - a[1])
    area_b = (b[2] - b[0]) * (b[3] - b[1])
    return inter / (area_a + area_b - inter)


def _selection_order(detections: Sequence[ScoredBox]) -> list[ScoredBox]:
    # score desc, then larger area, then top-left first; x1/y1 only break exact ties
    return sorted(
        detections,
        key=lambda d: (-d.score, -Box(*d.box).area, d.box[1], d.box[0], d.box[3], d.box[2]),
    )


def nms(detections: Sequence[ScoredBox], iou_threshold: float = 0.4) -> list[ScoredBox]:
    """Keep the best box, drop everything overlapping it with IoU >= threshold, repeat.

    Returns the kept boxes in the order they were selected.
    """
    if not 0 < iou_threshold <= 1:
        raise ValueError(f"iou_threshold must be in (0, 1], got {iou_threshold}")
    ranked = _selection_order(detections)
    if not ranked:
        return []

    coords = np.array([d.box for d in ranked], dtype=np.int64)
    x0, y0, x1, y1 = coords.T
    areas = (x1 - x0) * (y1 - y0)
    alive = np.ones(len(ranked), dtype=bool)
    kept = []
    for i in range(len(ranked)):
        if not alive[i]:
            continue
        kept.append(ranked[i])
        rest = np.flatnonzero(alive[i + 1:]) + i + 1
        if rest.size == 0:
            break
        iw = np.minimum(x1[i], x1[rest]) - np.maximum(x0[i], x0[rest])
        ih = np.minimum(y1[i], y1[rest]) - np.maximum(y0[i], y0[rest])
        inter = np.clip(iw, 0, None) * np.clip(ih, 0, None)
        overlap = inter / (areas[i] + areas[rest] - inter)
        alive[rest[overlap >= iou_threshold]] = False
    return kept
