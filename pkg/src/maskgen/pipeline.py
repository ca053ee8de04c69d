"""One (original, tampered) pair to one binary mask.

Two branches run on the absolute gray difference: MSER boxes (after NMS)
are painted solid to keep thin strokes such as text, and the TV-denoised
difference is eroded, thresholded and cleaned up morphologically.  The
final mask is the union of both.
"""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import imgcore
from .morphology import dilate_binary, erode_binary, erode_gray
from .mser import MserParams, ScoredBox, detect_mser
from .nms import nms
from .tvdenoise import DenoiseParams, tv_denoise, tv_energy

INTERMEDIATE_NAMES = {
    "diff": "diff.png",
    "text_mask": "text.png",
    "denoised": "tv.png",
    "binary": "binary.png",
    "mask": "mask.png",
}


@dataclass(frozen=True)
class PipelineConfig:
    mser: MserParams = field(default_factory=MserParams)
    nms_iou_threshold: float = 0.4
    denoise: DenoiseParams = field(default_factory=DenoiseParams)
    pre_binarize_erosions: int = 2
    binarize_threshold: int = 15
    post_binarize_erosions: int = 8
    post_dilations: int = 2
    # alternative reading: erode once more after the union (off by default)
    post_union_erosions: int = 0
    dump_intermediates: bool = False

    def __post_init__(self):
        if not 0 < self.nms_iou_threshold <= 1:
            raise ValueError(f"nms_iou_threshold must be in (0, 1], got {self.nms_iou_threshold}")
        # 0 would turn an unchanged pixel white
        if not 1 <= self.binarize_threshold <= 255:
            raise ValueError(f"binarize_threshold must be in [1, 255], got {self.binarize_threshold}")
        for name in ("pre_binarize_erosions", "post_binarize_erosions",
                     "post_dilations", "post_union_erosions"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0, got {getattr(self, name)}")


@dataclass(frozen=True)
class PairStats:
    boxes_before_nms: int
    boxes_after_nms: int
    tv_energy_before: float
    tv_energy_after: float
    white_fraction: float
    elapsed_ms: float

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class Stages:
    diff: np.ndarray
    detections: list[ScoredBox]
    kept: list[ScoredBox]
    text_mask: np.ndarray
    denoised: np.ndarray
    binary: np.ndarray
    mask: np.ndarray


def run_stages(original: np.ndarray, tampered: np.ndarray, config: PipelineConfig) -> Stages:
    g0 = imgcore.to_gray(original)
    g1 = imgcore.to_gray(tampered)
    diff = imgcore.abs_diff(g0, g1)
    height, width = diff.shape

    detections = detect_mser(diff, config.mser)
    kept = nms(detections, config.nms_iou_threshold)
    text_mask = imgcore.fill_boxes(width, height, (d.box for d in kept))

    denoised = tv_denoise(diff, config.denoise)
    eroded = erode_gray(denoised, config.pre_binarize_erosions)
    binary = imgcore.binarize(eroded, config.binarize_threshold)
    cleaned = dilate_binary(erode_binary(binary, config.post_binarize_erosions),
                            config.post_dilations)

    mask = imgcore.union(cleaned, text_mask)
    mask = erode_binary(mask, config.post_union_erosions)
    return Stages(diff, detections, kept, text_mask, denoised, binary, mask)


def generate_mask(original: np.ndarray, tampered: np.ndarray,
                  config: PipelineConfig | None = None) -> tuple[np.ndarray, PairStats]:
    mask, stats, _ = generate_mask_with_stages(original, tampered, config)
    return mask, stats


def generate_mask_with_stages(original, tampered, config=None):
    config = config or PipelineConfig()
    started = time.perf_counter()
    stages = run_stages(original, tampered, config)
    stats = PairStats(
        boxes_before_nms=len(stages.detections),
        boxes_after_nms=len(stages.kept),
        tv_energy_before=tv_energy(stages.diff),
        tv_energy_after=tv_energy(stages.denoised),
        white_fraction=imgcore.white_fraction(stages.mask),
        elapsed_ms=(time.perf_counter() - started) * 1000.0,
    )
    return stages.mask, stats, stages


def dump_intermediates(stages: Stages, out_dir) -> list[Path]:
    """Write diff.png, text.png, tv.png, binary.png and mask.png into ``out_dir``."""
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise imgcore.ImageIOError(f"cannot create {out_dir}: {exc}") from exc
    written = []
    for attr, name in INTERMEDIATE_NAMES.items():
        path = out_dir / name
        imgcore.save_gray(getattr(stages, attr), path)
        written.append(path)
    return written
