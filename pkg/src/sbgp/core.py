"""Foundational value types and image I/O.

Images, sampling resolutions, label maps, block geometry and feature
vectors are small immutable values; the operators in the other modules
are pure functions over them. File input is restricted to 8-bit
grayscale PGM (P5) and PNG.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

# Sentinel stored in a LabelMap for pixels whose pattern is discarded
# rather than histogrammed.
NON_STRUCTURAL = -1

_PNG_MAGIC = b"\x89PNG\r\n\x1a\n"


class InvariantViolation(RuntimeError):
    """An internal consistency check failed; indicates a bug, not bad input."""


class ImageFormatError(ValueError):
    """Input file is not an 8-bit grayscale PGM (P5) or PNG."""


@dataclass(frozen=True)
class Image:
    """2-D grayscale intensity grid.

    Pixels are finite non-negative float64 in row-major order; 8-bit
    file input is widened on load. The array is copied and frozen so
    instances behave as immutable values.
    """

    pixels: np.ndarray

    def __post_init__(self):
        px = np.asarray(self.pixels, dtype=np.float64)
        if px.ndim != 2 or px.shape[0] < 1 or px.shape[1] < 1:
            raise ValueError(f"image must be a non-empty 2-D grid, got shape {px.shape}")
        if not np.all(np.isfinite(px)):
            raise ValueError("image intensities must be finite")
        if px.min() < 0.0:
            raise ValueError("image intensities must be non-negative")
        px = px.copy()
        px.flags.writeable = False
        object.__setattr__(self, "pixels", px)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


@dataclass(frozen=True)
class SpatialResolution:
    """Neighbor count P and sampling radius R; k = P/2 comparison directions.

    Circular operators (LBP, CS-LBP) accept any even P >= 4. The
    square-perimeter operators additionally require maximal sampling
    P == 8R, i.e. one neighbor per perimeter pixel: (8,1), (16,2), (24,3).
    """

    P: int
    R: int

    def __post_init__(self):
        if self.P < 4 or self.P % 2 != 0:
            raise ValueError(f"P must be even and >= 4, got {self.P}")
        if self.R < 1:
            raise ValueError(f"R must be >= 1, got {self.R}")

    @property
    def k(self) -> int:
        return self.P // 2

    def require_square_maximal(self) -> None:
        if self.P != 8 * self.R:
            raise ValueError(
                f"square-perimeter sampling requires P = 8R, got (P={self.P}, R={self.R})"
            )


@dataclass(frozen=True)
class LabelMap:
    """Per-pixel histogram bin indices over an image interior.

    Values are either a bin index in [0, n_bins) or NON_STRUCTURAL for
    pixels that are excluded from histograms.
    """

    labels: np.ndarray
    n_bins: int

    def __post_init__(self):
        lab = np.asarray(self.labels)
        if lab.ndim != 2 or lab.size == 0:
            raise InvariantViolation(f"label map must be non-empty 2-D, got shape {lab.shape}")
        if not np.issubdtype(lab.dtype, np.integer):
            raise InvariantViolation(f"label map must be integer, got dtype {lab.dtype}")
        if self.n_bins < 1:
            raise InvariantViolation(f"n_bins must be >= 1, got {self.n_bins}")
        lo, hi = int(lab.min()), int(lab.max())
        if lo < NON_STRUCTURAL or hi >= self.n_bins:
            raise InvariantViolation(
                f"labels must lie in [0, {self.n_bins}) or be {NON_STRUCTURAL}, "
                f"got range [{lo}, {hi}]"
            )
        lab = lab.copy()
        lab.flags.writeable = False
        object.__setattr__(self, "labels", lab)

    @property
    def width(self) -> int:
        return self.labels.shape[1]

    @property
    def height(self) -> int:
        return self.labels.shape[0]

    def non_structural_fraction(self) -> float:
        return float(np.mean(self.labels == NON_STRUCTURAL))


@dataclass(frozen=True)
class Rect:
    """Axis-aligned pixel rectangle: origin (x0, y0), extent (width, height)."""

    x0: int
    y0: int
    width: int
    height: int

    @property
    def area(self) -> int:
        return self.width * self.height


@dataclass(frozen=True)
class BlockGrid:
    """Partition of a label map into rectangular blocks, row-major order."""

    n_blocks_x: int
    n_blocks_y: int
    rectangles: tuple[Rect, ...]

    @property
    def n_blocks(self) -> int:
        return self.n_blocks_x * self.n_blocks_y


def _split_extent(total: int, n: int) -> list[int]:
    # remainder pixels go to the leading blocks, one each
    base, rem = divmod(total, n)
    return [base + 1 if i < rem else base for i in range(n)]


def make_block_grid(width: int, height: int, n_blocks_x: int, n_blocks_y: int) -> BlockGrid:
    """Tile a width x height region into n_blocks_x * n_blocks_y rectangles.

    Blocks cover the region exactly without overlap. When a dimension is
    not divisible, the first blocks along that dimension get one extra
    pixel each.
    """
    if n_blocks_x < 1 or n_blocks_y < 1:
        raise ValueError(f"block counts must be >= 1, got {n_blocks_x}x{n_blocks_y}")
    if n_blocks_x > width or n_blocks_y > height:
        raise ValueError(
            f"more blocks than pixels: {n_blocks_x}x{n_blocks_y} blocks "
            f"over a {width}x{height} map"
        )
    widths = _split_extent(width, n_blocks_x)
    heights = _split_extent(height, n_blocks_y)
    rects = []
    y0 = 0
    for h in heights:
        x0 = 0
        for w in widths:
            rects.append(Rect(x0, y0, w, h))
            x0 += w
        y0 += h
    return BlockGrid(n_blocks_x, n_blocks_y, tuple(rects))


@dataclass(frozen=True)
class FeatureVector:
    """Concatenated block histograms in (channel, block, bin) order."""

    values: np.ndarray
    n_channels: int
    n_blocks: int
    n_bins: int

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        expected = self.n_channels * self.n_blocks * self.n_bins
        if v.ndim != 1 or v.size != expected:
            raise InvariantViolation(
                f"feature vector must be 1-D with {expected} entries "
                f"({self.n_channels} channels x {self.n_blocks} blocks x "
                f"{self.n_bins} bins), got shape {v.shape}"
            )
        if v.size and v.min() < 0.0:
            raise InvariantViolation("feature values must be non-negative")
        v = v.copy()
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @property
    def dims(self) -> int:
        return self.values.size


def load_image(path: str | Path) -> Image:
    """Decode an 8-bit grayscale image file (PGM P5 or PNG).

    Color and 16-bit inputs are rejected, never converted. Intensities
    are returned as reals in [0, 255].
    """
    path = Path(path)
    data = path.read_bytes()
    if data[:2] == b"P5":
        return Image(_decode_pgm(data, path))
    if data[:8] == _PNG_MAGIC:
        return Image(_decode_png(path))
    raise ImageFormatError(f"{path}: not an 8-bit grayscale PGM (P5) or PNG file")


def _decode_pgm(data: bytes, path: Path) -> np.ndarray:
    # P5 header: magic, then width/height/maxval tokens separated by
    # whitespace, with '#' comments running to end of line.
    pos = 2
    fields: list[int] = []
    n = len(data)
    while len(fields) < 3:
        while pos < n and (data[pos : pos + 1].isspace() or data[pos : pos + 1] == b"#"):
            if data[pos : pos + 1] == b"#":
                while pos < n and data[pos] != 0x0A:
                    pos += 1
            else:
                pos += 1
        start = pos
        while pos < n and not data[pos : pos + 1].isspace():
            pos += 1
        token = data[start:pos]
        if not token.isdigit():
            raise ImageFormatError(f"{path}: malformed PGM header")
        fields.append(int(token))
    width, height, maxval = fields
    if width < 1 or height < 1:
        raise ImageFormatError(f"{path}: bad PGM dimensions {width}x{height}")
    if not 0 < maxval <= 255:
        raise ImageFormatError(f"{path}: PGM maxval {maxval} is not 8-bit")
    pos += 1  # single whitespace byte between maxval and the raster
    raster = data[pos : pos + width * height]
    if len(raster) < width * height:
        raise ImageFormatError(f"{path}: truncated PGM raster")
    return np.frombuffer(raster, dtype=np.uint8).reshape(height, width).astype(np.float64)


def _decode_png(path: Path) -> np.ndarray:
    from PIL import Image as _PILImage

    with _PILImage.open(path) as im:
        mode = im.mode
        if mode in ("RGB", "RGBA", "P", "PA", "CMYK", "YCbCr", "LAB", "HSV"):
            raise ImageFormatError(f"{path}: color image (mode {mode}); 8-bit grayscale required")
        if mode != "L":
            raise ImageFormatError(f"{path}: unsupported PNG mode {mode}; 8-bit grayscale required")
        return np.asarray(im, dtype=np.float64)


def write_pgm(path: str | Path, pixels: np.ndarray) -> None:
    """Write a 2-D array as binary 8-bit PGM (P5), rounding and clipping to [0, 255]."""
    arr = np.asarray(pixels, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"expected a 2-D array, got shape {arr.shape}")
    out = np.clip(np.rint(arr), 0, 255).astype(np.uint8)
    header = f"P5\n{out.shape[1]} {out.shape[0]}\n255\n".encode("ascii")
    Path(path).write_bytes(header + out.tobytes())
