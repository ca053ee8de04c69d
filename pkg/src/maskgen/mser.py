"""Maximally stable extremal regions.

The component tree is built by flooding pixels in increasing intensity
order and merging 4-connected neighbours with a union-find.  A tree node
is one distinct pixel set; it appears at ``level`` and survives unchanged
until its parent's level.  For bright-on-dark regions the image is
inverted first, so "level" is always measured on the flooded image.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import Iterator, NamedTuple

import numba
import numpy as np

from .imgcore import Box

POLARITIES = ("dark", "bright", "both")


@dataclass(frozen=True)
class MserParams:
    delta: int = 5
    min_area: int = 30
    max_area_fraction: float = 0.25
    max_variation: float = 0.5
    polarity: str = "both"

    def __post_init__(self):
        if self.delta < 1:
            raise ValueError(f"delta must be >= 1, got {self.delta}")
        if self.min_area < 1:
            raise ValueError(f"min_area must be >= 1, got {self.min_area}")
        if not 0 < self.max_area_fraction <= 1:
            raise ValueError(f"max_area_fraction must be in (0, 1], got {self.max_area_fraction}")
        if not self.max_variation > 0:
            raise ValueError(f"max_variation must be > 0, got {self.max_variation}")
        if self.polarity not in POLARITIES:
            raise ValueError(f"polarity must be one of {POLARITIES}, got {self.polarity!r}")


class ScoredBox(NamedTuple):
    box: Box
    score: float
    polarity: str = "dark"

    def to_json(self) -> str:
        x0, y0, x1, y1 = self.box
        return json.dumps(
            {"x0": x0, "y0": y0, "x1": x1, "y1": y1, "score": self.score, "polarity": self.polarity}
        )


@dataclass(frozen=True)
class ExtremalRegion:
    index: int
    level: int
    area: int
    bounding_box: Box
    parent: int
    seed: tuple[int, int]
    stability: float | None = None


@dataclass(frozen=True)
class ComponentTree:
    """Flat, array-backed component tree of one polarity.

    Node ``k`` covers the threshold levels ``level[k] .. end_level[k]``;
    ``seed[k]`` is a flat pixel index belonging to the node, which pins
    down the pixel set as the 4-connected component of ``{v <= level}``
    containing it.
    """

    width: int
    height: int
    polarity: str
    level: np.ndarray
    area: np.ndarray
    x0: np.ndarray
    y0: np.ndarray
    x1: np.ndarray
    y1: np.ndarray
    parent: np.ndarray
    seed: np.ndarray
    variation: np.ndarray | None = field(default=None, compare=False)

    def __len__(self) -> int:
        return len(self.level)

    @property
    def end_level(self) -> np.ndarray:
        end = np.full(len(self), 255, dtype=np.int64)
        has_parent = self.parent >= 0
        end[has_parent] = self.level[self.parent[has_parent]] - 1
        return end

    def box(self, k: int) -> Box:
        return Box(int(self.x0[k]), int(self.y0[k]), int(self.x1[k]), int(self.y1[k]))

    def region(self, k: int) -> ExtremalRegion:
        seed = int(self.seed[k])
        return ExtremalRegion(
            index=k,
            level=int(self.level[k]),
            area=int(self.area[k]),
            bounding_box=self.box(k),
            parent=int(self.parent[k]),
            seed=(seed % self.width, seed // self.width),
            stability=None if self.variation is None else float(self.variation[k]),
        )

    def __iter__(self) -> Iterator[ExtremalRegion]:
        return (self.region(k) for k in range(len(self)))

    def level_records(self) -> list[tuple[int, int, Box]]:
        """Every (level, area, box) the tree represents, one per node per level it spans."""
        out = []
        for k, end in enumerate(self.end_level.tolist()):
            box = self.box(k)
            area = int(self.area[k])
            out.extend((lvl, area, box) for lvl in range(int(self.level[k]), end + 1))
        return out


@numba.njit(cache=True)
def _find(uf, p):
    root = p
    while uf[root] != root:
        root = uf[root]
    while uf[p] != root:
        nxt = uf[p]
        uf[p] = root
        p = nxt
    return root


@numba.njit(cache=True)
def _flood(values, order, width, height):
    n = values.size
    uf = np.full(n, -1, np.int64)
    size = np.zeros(n, np.int64)
    bx0 = np.zeros(n, np.int64)
    by0 = np.zeros(n, np.int64)
    bx1 = np.zeros(n, np.int64)
    by1 = np.zeros(n, np.int64)
    root_node = np.full(n, -1, np.int64)

    level = np.zeros(n, np.int64)
    area = np.zeros(n, np.int64)
    nx0 = np.zeros(n, np.int64)
    ny0 = np.zeros(n, np.int64)
    nx1 = np.zeros(n, np.int64)
    ny1 = np.zeros(n, np.int64)
    parent = np.full(n, -1, np.int64)
    seed = np.zeros(n, np.int64)
    touched = np.zeros(n, np.int64)
    n_nodes = 0

    nbr = np.zeros(4, np.int64)
    pos = 0
    while pos < n:
        lvl = values[order[pos]]
        start = pos
        n_touched = 0
        while pos < n and values[order[pos]] == lvl:
            p = order[pos]
            pos += 1
            x = p % width
            y = p // width
            uf[p] = p
            size[p] = 1
            bx0[p] = x
            by0[p] = y
            bx1[p] = x + 1
            by1[p] = y + 1
            root_node[p] = -1

            n_nbr = 0
            if x > 0:
                nbr[n_nbr] = p - 1
                n_nbr += 1
            if x + 1 < width:
                nbr[n_nbr] = p + 1
                n_nbr += 1
            if y > 0:
                nbr[n_nbr] = p - width
                n_nbr += 1
            if y + 1 < height:
                nbr[n_nbr] = p + width
                n_nbr += 1

            for j in range(n_nbr):
                q = nbr[j]
                if uf[q] == -1:
                    continue
                rp = _find(uf, p)
                rq = _find(uf, q)
                if rp == rq:
                    continue
                # the merged components' previous states become children
                if root_node[rp] >= 0:
                    touched[n_touched] = root_node[rp]
                    n_touched += 1
                if root_node[rq] >= 0:
                    touched[n_touched] = root_node[rq]
                    n_touched += 1
                if size[rp] < size[rq]:
                    rp, rq = rq, rp
                uf[rq] = rp
                size[rp] += size[rq]
                bx0[rp] = min(bx0[rp], bx0[rq])
                by0[rp] = min(by0[rp], by0[rq])
                bx1[rp] = max(bx1[rp], bx1[rq])
                by1[rp] = max(by1[rp], by1[rq])
                root_node[rp] = -1

        for i in range(start, pos):
            r = _find(uf, order[i])
            if root_node[r] == -1:
                m = n_nodes
                n_nodes += 1
                level[m] = lvl
                area[m] = size[r]
                nx0[m] = bx0[r]
                ny0[m] = by0[r]
                nx1[m] = bx1[r]
                ny1[m] = by1[r]
                seed[m] = r
                root_node[r] = m
        for i in range(n_touched):
            t = touched[i]
            parent[t] = root_node[_find(uf, seed[t])]

    return (
        level[:n_nodes].copy(),
        area[:n_nodes].copy(),
        nx0[:n_nodes].copy(),
        ny0[:n_nodes].copy(),
        nx1[:n_nodes].copy(),
        ny1[:n_nodes].copy(),
        parent[:n_nodes].copy(),
        seed[:n_nodes].copy(),
    )


def build_component_tree(img: np.ndarray, polarity: str = "dark") -> ComponentTree:
    """Component tree of the lower threshold sets ``{p : img(p) <= i}``.

    ``polarity="bright"`` floods ``255 - img`` instead, so bright blobs on
    a dark background become the leaves.
    """
    img = np.asarray(img, dtype=np.uint8)
    if img.ndim != 2 or img.size == 0:
        raise ValueError(f"expected a nonempty 2-D gray image, got shape {img.shape}")
    if polarity == "dark":
        values = img
    elif polarity == "bright":
        values = 255 - img
    else:
        raise ValueError(f"polarity must be 'dark' or 'bright', got {polarity!r}")
    height, width = values.shape
    flat = np.ascontiguousarray(values).ravel()
    order = np.argsort(flat, kind="stable")
    arrays = _flood(flat, order, width, height)
    return ComponentTree(width, height, polarity, *arrays)


def variation(area_lo: float, area_mid: float, area_hi: float) -> float:
    """Relative area growth across a threshold window: ``(hi - lo) / mid``."""
    return (area_hi - area_lo) / area_mid


@numba.njit(cache=True)
def _stability(level, area, parent, delta):
    n = level.size
    largest_child = np.full(n, -1, np.int64)
    for k in range(n):
        p = parent[k]
        if p >= 0:
            c = largest_child[p]
            if c == -1 or area[k] > area[c]:
                largest_child[p] = k

    var = np.empty(n, np.float64)
    for k in range(n):
        lo_level = level[k]
        hi_level = 255 if parent[k] < 0 else level[parent[k]] - 1
        if hi_level - lo_level >= 2 * delta:
            # some level has both neighbours inside this node's own lifetime
            var[k] = 0.0
            continue
        best = np.inf
        for i in range(lo_level, hi_level + 1):
            up = k
            while parent[up] >= 0 and level[parent[up]] <= i + delta:
                up = parent[up]
            down = k
            while level[down] > i - delta and largest_child[down] >= 0:
                down = largest_child[down]
            v = (area[up] - area[down]) / area[k]
            if v < best:
                best = v
        var[k] = best
    return var


def stability(tree: ComponentTree, delta: int) -> ComponentTree:
    """Annotate each region with its best stability over the levels it spans.

    At level ``i`` a region ``Q_i`` scores ``(|Q_{i+delta}| - |Q_{i-delta}|) / |Q_i|``.
    ``Q_{i+delta}`` is the enclosing ancestor alive at ``i + delta``;
    ``Q_{i-delta}`` follows the largest child down to the region alive at
    ``i - delta``.  Past either end of a branch the extreme region is reused.
    """
    if delta < 1:
        raise ValueError(f"delta must be >= 1, got {delta}")
    var = _stability(tree.level, tree.area, tree.parent, int(delta))
    return replace(tree, variation=var)


def _local_minima(tree: ComponentTree) -> np.ndarray:
    var = tree.variation
    ok = np.ones(len(tree), dtype=bool)
    child = np.flatnonzero(tree.parent >= 0)
    par = tree.parent[child]
    ok[child] &= var[child] <= var[par]
    # a parent must not exceed any of its children either
    worse_than_child = var[par] > var[child]
    ok[par[worse_than_child]] = False
    return ok


def select_regions(tree: ComponentTree, params: MserParams) -> np.ndarray:
    """Indices of the maximally stable nodes that pass the area and variation filters."""
    if tree.variation is None:
        tree = stability(tree, params.delta)
    frame = tree.width * tree.height
    keep = (
        _local_minima(tree)
        & (tree.variation <= params.max_variation)
        & (tree.area >= params.min_area)
        & (tree.area <= params.max_area_fraction * frame)
        # the whole frame has no boundary and localizes nothing
        & (tree.area < frame)
    )
    return np.flatnonzero(keep)


def detect_mser(img: np.ndarray, params: MserParams | None = None) -> list[ScoredBox]:
    params = params or MserParams()
    polarities = ("dark", "bright") if params.polarity == "both" else (params.polarity,)
    found = []
    for polarity in polarities:
        tree = stability(build_component_tree(img, polarity), params.delta)
        for k in select_regions(tree, params).tolist():
            score = 1.0 / (1.0 + float(tree.variation[k]))
            found.append(ScoredBox(tree.box(k), score, polarity))
    found.sort(key=lambda d: (d.box.y0, d.box.x0, d.box.x1, d.box.y1, d.polarity, -d.score))
    return found


def write_jsonl(detections, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for det in detections:
            fh.write(det.to_json() + "\n")
