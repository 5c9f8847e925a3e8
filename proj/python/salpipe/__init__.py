"""Desk-scale salient-object-detection pipeline.

Multi-level graph segmentation, nested-window contrast features over a small
convolutional backbone, MLP and random-forest regressors, least-squares map
fusion and dense-CRF refinement, plus the benchmark metric suite.
"""

from salpipe._core import (  # noqa: F401
    PipelineError,
    __version__,
    adaptive_prf,
    auc,
    build_stack,
    chi_square,
    color_contrast,
    crf_refine,
    dataset_check,
    evaluate,
    fit_fusion,
    fuse,
    graph_segment,
    infer,
    label_consistency,
    load_image,
    load_map,
    load_mask,
    mae,
    majority_gt,
    max_f,
    pr_roc,
    rgb_to_hsv,
    rgb_to_lab,
    save_image,
    save_map,
    save_mask,
    synth_dataset,
    synth_image,
    train,
    warp_to_square,
)

__all__ = [
    "PipelineError",
    "__version__",
    "adaptive_prf",
    "auc",
    "build_stack",
    "chi_square",
    "color_contrast",
    "crf_refine",
    "dataset_check",
    "evaluate",
    "fit_fusion",
    "fuse",
    "graph_segment",
    "infer",
    "label_consistency",
    "load_image",
    "load_map",
    "load_mask",
    "mae",
    "majority_gt",
    "max_f",
    "pr_roc",
    "rgb_to_hsv",
    "rgb_to_lab",
    "save_image",
    "save_map",
    "save_mask",
    "synth_dataset",
    "synth_image",
    "train",
    "warp_to_square",
]
