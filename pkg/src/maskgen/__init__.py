"""Binary manipulation masks from (original, tampered) image pairs."""

from .imgcore import (
    Box,
    DecodeError,
    DimensionMismatch,
    ImageIOError,
    MaskgenError,
    abs_diff,
    binarize,
    fill_boxes,
    load_image,
    save_mask,
    to_gray,
    union,
)
from .morphology import dilate_binary, erode_binary, erode_gray
from .mser import MserParams, ScoredBox, build_component_tree, detect_mser, stability
from .nms import iou, nms
from .pipeline import PairStats, PipelineConfig, dump_intermediates, generate_mask
from .tvdenoise import DenoiseParams, tv_denoise, tv_energy, tv_gradient, tv_objective
from .dataset import PairRecord, PostGroup, run_batch, scan_corpus

__version__ = "0.1.0"
