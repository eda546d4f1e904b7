"""Block-histogram feature extraction.

A label map is tiled into blocks, each block's label histogram is
L1-normalized, and the histograms are concatenated in (channel, block,
bin) order. The multi-channel variant runs the structural-pattern
operator over each orientation-partitioned magnitude channel instead of
the raw intensities.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    NON_STRUCTURAL,
    FeatureVector,
    Image,
    InvariantViolation,
    LabelMap,
    Rect,
    make_block_grid,
)
from .gradient import build_oigm
from .patterns import (
    ComparisonCounter,
    PatternDescriptorConfig,
    PatternKind,
    compute_label_map,
    sbgp_map,
)

NORM_PER_BLOCK_L1 = "per-block-l1"
NORM_NONE = "none"


@dataclass(frozen=True)
class SbgpmSettings:
    """Channel count and window side of the magnitude-channel variant."""

    s: int = 3
    window: int = 7

    def __post_init__(self):
        if self.s < 1:
            raise ValueError(f"s must be >= 1, got {self.s}")
        if self.window < 1 or self.window % 2 == 0:
            raise ValueError(f"window must be odd and >= 1, got {self.window}")


@dataclass(frozen=True)
class ExtractorConfig:
    """Full feature extraction recipe: descriptor, grid, normalization."""

    descriptor: PatternDescriptorConfig
    blocks: tuple[int, int] = (6, 6)
    sbgpm: SbgpmSettings | None = None
    normalization: str = NORM_PER_BLOCK_L1
    sqrt_transform: bool = False

    def __post_init__(self):
        if self.blocks[0] < 1 or self.blocks[1] < 1:
            raise ValueError(f"block counts must be >= 1, got {self.blocks}")
        if self.normalization not in (NORM_PER_BLOCK_L1, NORM_NONE):
            raise ValueError(f"unknown normalization {self.normalization!r}")
        if self.sbgpm is not None and self.descriptor.kind != PatternKind.SBGP:
            raise ValueError("magnitude channels only combine with the sbgp descriptor")

    @property
    def n_channels(self) -> int:
        return self.sbgpm.s if self.sbgpm is not None else 1

    def dims(self) -> int:
        return self.n_channels * self.blocks[0] * self.blocks[1] * self.descriptor.n_bins()


def block_histogram(label_map: LabelMap, rect: Rect) -> np.ndarray:
    """Label counts inside rect; NON_STRUCTURAL pixels are skipped."""
    if (
        rect.x0 < 0
        or rect.y0 < 0
        or rect.width < 1
        or rect.height < 1
        or rect.x0 + rect.width > label_map.width
        or rect.y0 + rect.height > label_map.height
    ):
        raise ValueError(f"{rect} exceeds the {label_map.width}x{label_map.height} label map")
    vals = label_map.labels[rect.y0 : rect.y0 + rect.height, rect.x0 : rect.x0 + rect.width]
    vals = vals[vals != NON_STRUCTURAL]
    hist = np.bincount(vals.ravel(), minlength=label_map.n_bins)
    if hist.size > label_map.n_bins:
        raise InvariantViolation(f"label {vals.max()} out of range for {label_map.n_bins} bins")
    return hist.astype(np.int64)


def sqrt_transform(values: np.ndarray) -> np.ndarray:
    """Element-wise square root; rejects negative inputs."""
    values = np.asarray(values, dtype=np.float64)
    if values.size and values.min() < 0.0:
        raise ValueError("sqrt_transform requires non-negative values")
    return np.sqrt(values)


def extract(
    image: Image,
    cfg: ExtractorConfig,
    counter: ComparisonCounter | None = None,
) -> FeatureVector:
    """Compute the block-histogram feature vector of one image.

    The block grid is laid over the label map (the image interior after
    the border trim), with remainder pixels going to the leading blocks.
    Histograms are concatenated channel-major, then block, then bin;
    each block histogram is L1-normalized independently (all-sentinel
    blocks stay zero). The optional square-root transform runs last.
    """
    if cfg.sbgpm is not None:
        stack = build_oigm(image, cfg.sbgpm.s, cfg.sbgpm.window)
        res = cfg.descriptor.resolution
        maps = [sbgp_map(Image(ch.m), res, counter) for ch in stack.channels]
    else:
        maps = [compute_label_map(image, cfg.descriptor, counter)]
    n_bins = cfg.descriptor.n_bins()
    grid = make_block_grid(maps[0].width, maps[0].height, cfg.blocks[0], cfg.blocks[1])
    parts = []
    for label_map in maps:
        for rect in grid.rectangles:
            hist = block_histogram(label_map, rect).astype(np.float64)
            if cfg.normalization == NORM_PER_BLOCK_L1:
                total = hist.sum()
                if total > 0.0:
                    hist /= total
            parts.append(hist)
    values = np.concatenate(parts)
    if cfg.sqrt_transform:
        values = sqrt_transform(values)
    return FeatureVector(
        values,
        n_channels=len(maps),
        n_blocks=grid.n_blocks,
        n_bins=n_bins,
    )
