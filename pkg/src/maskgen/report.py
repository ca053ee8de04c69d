"""Matplotlib figures written next to the masks and manifest.

Figures are built on ``matplotlib.figure.Figure`` directly, so nothing here
touches pyplot's global state and rendering is safe from worker processes.
"""

from __future__ import annotations

from collections import Counter

import numpy as np
from matplotlib.figure import Figure
from matplotlib.patches import Rectangle

from .dataset import STATUS_ORDER
from .pipeline import Stages


def _show(ax, img, title):
    ax.imshow(img, cmap="gray", vmin=0, vmax=255, interpolation="nearest")
    ax.set_title(title, fontsize=9)
    ax.set_axis_off()


def _draw_boxes(ax, detections, **style):
    for det in detections:
        x0, y0, x1, y1 = det.box
        ax.add_patch(Rectangle((x0 - 0.5, y0 - 0.5), x1 - x0, y1 - y0, fill=False, **style))


def render_pair_report(stages: Stages, path, dpi: int = 120) -> None:
    """Six-panel view of one pair: difference, boxes, denoised, binary, text, final."""
    fig = Figure(figsize=(11, 7), constrained_layout=True)
    axes = fig.subplots(2, 3)
    _show(axes[0, 0], stages.diff, "difference")
    _show(axes[0, 1], stages.diff,
          f"MSER boxes {len(stages.detections)} -> {len(stages.kept)} after NMS")
    _draw_boxes(axes[0, 1], stages.detections, edgecolor="tab:orange", linewidth=0.5, alpha=0.6)
    _draw_boxes(axes[0, 1], stages.kept, edgecolor="tab:green", linewidth=1.2)
    _show(axes[0, 2], stages.denoised, "TV denoised")
    _show(axes[1, 0], stages.binary, "binarized")
    _show(axes[1, 1], stages.text_mask, "text mask")
    _show(axes[1, 2], stages.mask, "final mask")
    fig.savefig(path, dpi=dpi)


def render_batch_report(records, path, dpi: int = 120) -> None:
    counts = Counter(r.status for r in records)
    ok = [r.stats for r in records if r.stats is not None]

    fig = Figure(figsize=(10, 7), constrained_layout=True)
    (ax_status, ax_white), (ax_boxes, ax_tv) = fig.subplots(2, 2)

    ax_status.bar(range(len(STATUS_ORDER)), [counts.get(s, 0) for s in STATUS_ORDER],
                  color=["tab:green", "tab:gray", "tab:red", "tab:red"])
    ax_status.set_xticks(range(len(STATUS_ORDER)))
    ax_status.set_xticklabels([s.replace("_", "\n") for s in STATUS_ORDER], fontsize=8)
    ax_status.set_ylabel("pairs")
    ax_status.set_title("pair status")

    white = np.array([s.white_fraction for s in ok])
    ax_white.hist(white, bins=min(20, max(1, len(white))), range=(0.0, 1.0), color="tab:blue")
    ax_white.set_xlabel("white fraction of mask")
    ax_white.set_title("mask coverage")

    before = np.array([s.boxes_before_nms for s in ok])
    after = np.array([s.boxes_after_nms for s in ok])
    ax_boxes.scatter(before, after, s=12)
    top = max(1, int(before.max())) if before.size else 1
    ax_boxes.plot([0, top], [0, top], color="0.7", linewidth=0.8)
    ax_boxes.set_xlabel("boxes before NMS")
    ax_boxes.set_ylabel("boxes after NMS")
    ax_boxes.set_title("suppression")

    e0 = np.array([s.tv_energy_before for s in ok])
    e1 = np.array([s.tv_energy_after for s in ok])
    ax_tv.scatter(e0, e1, s=12, color="tab:purple")
    top = float(e0.max()) if e0.size else 1.0
    ax_tv.plot([0, top], [0, top], color="0.7", linewidth=0.8)
    ax_tv.set_xlabel("TV of difference")
    ax_tv.set_ylabel("TV after denoising")
    ax_tv.set_title("total variation")

    fig.savefig(path, dpi=dpi)
