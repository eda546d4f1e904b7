"""Binary pattern operators over image grids.

The primary descriptor compares the P/2 antipodal pixel pairs on the
square perimeter of radius R around each pixel (P = 8R), keeps only the
"structural" labels whose perimeter bit string forms one contiguous
circular run, and bins pixels by structural label. Baselines: circular
LBP with u2/riu2 label compression, center-symmetric LBP, and a
quantized-gradient-orientation histogram.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .core import NON_STRUCTURAL, Image, InvariantViolation, LabelMap, SpatialResolution
from .gradient import compute_gradients, dominant_orientation, igo

_SNAP = 1e-6  # snap circular sample offsets this close to the pixel grid


class ComparisonCounter:
    """Tallies pairwise intensity comparisons performed by pattern operators."""

    def __init__(self):
        self.total = 0

    def add(self, n: int) -> None:
        self.total += int(n)


class PatternKind(str, Enum):
    SBGP = "sbgp"
    LBP_U2 = "lbp-u2"
    LBP_RIU2 = "lbp-riu2"
    CS_LBP = "cs-lbp"
    HIGO = "higo"


@dataclass(frozen=True)
class PatternDescriptorConfig:
    """Which label map to compute and with what parameters.

    resolution is unused by HIGO; cs_threshold only applies to CS-LBP
    and higo_bins only to HIGO.
    """

    kind: PatternKind
    resolution: SpatialResolution
    cs_threshold: float = 0.01
    higo_bins: int = 4

    def __post_init__(self):
        if self.cs_threshold < 0.0:
            raise ValueError(f"cs_threshold must be >= 0, got {self.cs_threshold}")
        if self.higo_bins < 2:
            raise ValueError(f"higo_bins must be >= 2, got {self.higo_bins}")
        if self.kind == PatternKind.SBGP:
            self.resolution.require_square_maximal()

    def n_bins(self) -> int:
        P = self.resolution.P
        if self.kind == PatternKind.SBGP:
            return P
        if self.kind == PatternKind.LBP_U2:
            return P * (P - 1) + 3
        if self.kind == PatternKind.LBP_RIU2:
            return P + 2
        if self.kind == PatternKind.CS_LBP:
            return 2 ** (P // 2)
        return self.higo_bins

    def border(self) -> int:
        """Pixels trimmed from each side of the source image by the label map."""
        return 0 if self.kind == PatternKind.HIGO else self.resolution.R

    def comparisons_per_pixel(self) -> int:
        """Pairwise comparisons the operator performs per interior pixel."""
        if self.kind in (PatternKind.SBGP, PatternKind.CS_LBP):
            return self.resolution.P // 2
        if self.kind in (PatternKind.LBP_U2, PatternKind.LBP_RIU2):
            return self.resolution.P
        return 0


@dataclass(frozen=True)
class StructuralLabelSet:
    """The P structural labels for direction count k = P/2, in canonical order."""

    P: int
    labels: tuple[int, ...]

    def __post_init__(self):
        if len(set(self.labels)) != self.P:
            raise InvariantViolation(f"expected {self.P} distinct structural labels")

    def index_of(self, label: int) -> int:
        """Bin index of a raw label, or NON_STRUCTURAL."""
        try:
            return self.labels.index(label)
        except ValueError:
            return NON_STRUCTURAL

    def lut(self) -> np.ndarray:
        """Raw-label -> bin-index table of size 2^k, NON_STRUCTURAL elsewhere."""
        k = self.P // 2
        table = np.full(2**k, NON_STRUCTURAL, dtype=np.int32)
        for idx, lab in enumerate(self.labels):
            table[lab] = idx
        return table


def structural_labels(P: int) -> StructuralLabelSet:
    """The labels whose perimeter bit string has one contiguous circular run
    of ones.

    Emitted in the canonical order: the ones-prefix labels 2^(t-1) - 1
    for t = 1..k, followed by their k-bit complements in mirrored order,
    e.g. P=8 -> (0, 1, 3, 7, 8, 12, 14, 15).
    """
    if P < 4 or P % 2 != 0:
        raise ValueError(f"P must be even and >= 4, got {P}")
    k = P // 2
    labels: list[int] = []
    for t in range(1, P + 1):
        if t <= k:
            labels.append(2 ** (t - 1) - 1)
        else:
            # complement of the entry at 1-based position 2k - t + 1
            labels.append(2**k - labels[2 * k - t] - 1)
    return StructuralLabelSet(P=P, labels=tuple(labels))


def structural_oracle(principal_bits) -> bool:
    """True iff the full perimeter string is a single circular run of ones.

    The string is the k principal bits followed by their complements
    (the antipodal associated bits), length 2k. Independent check used
    to validate the closed-form structural label set.
    """
    bits = [int(b) for b in principal_bits]
    if not bits or any(b not in (0, 1) for b in bits):
        raise ValueError("principal_bits must be a non-empty 0/1 sequence")
    ring = bits + [1 - b for b in bits]
    n = len(ring)
    # count starts of circular 1-runs
    runs = sum(1 for i in range(n) if ring[i] == 1 and ring[i - 1] == 0)
    return runs == 1


def _check_interior(image: Image, R: int) -> None:
    if image.height < 2 * R + 1 or image.width < 2 * R + 1:
        raise ValueError(
            f"image {image.height}x{image.width} too small for radius {R}: "
            f"need at least {2 * R + 1}x{2 * R + 1}"
        )


def bgp_label(image: Image, i: int, j: int, res: SpatialResolution) -> int:
    """Raw k-bit gradient-sign label at pixel (i, j) = (row, col).

    Bit t-1 is 1 when the signed difference across antipodal pair t of
    the square perimeter of radius R is >= 0 (ties count as 1). The
    first 2R+1 pairs sweep the right column against the left, the
    remaining 2R-1 sweep the bottom row against the top.
    """
    res.require_square_maximal()
    px = image.pixels
    R = res.R
    if not (R <= i < px.shape[0] - R and R <= j < px.shape[1] - R):
        raise ValueError(f"pixel ({i}, {j}) is within {R} of the border")
    label = 0
    t = 0
    for n1 in range(-R, R + 1):
        if px[i + n1, j + R] - px[i - n1, j - R] >= 0.0:
            label |= 1 << t
        t += 1
    for n2 in range(-(R - 1), R):
        if px[i + R, j - n2] - px[i - R, j + n2] >= 0.0:
            label |= 1 << t
        t += 1
    return label


def _bgp_raw_labels(px: np.ndarray, res: SpatialResolution, counter=None) -> np.ndarray:
    """Vectorized raw labels for all interior pixels via shifted-array
    comparisons, one comparison per antipodal pair."""
    R = res.R
    ih = px.shape[0] - 2 * R
    iw = px.shape[1] - 2 * R
    labels = np.zeros((ih, iw), dtype=np.int32)
    t = 0
    for n1 in range(-R, R + 1):
        plus = px[R + n1 : R + n1 + ih, 2 * R : 2 * R + iw]
        minus = px[R - n1 : R - n1 + ih, 0:iw]
        bit = plus >= minus
        if counter is not None:
            counter.add(bit.size)
        labels |= bit.astype(np.int32) << t
        t += 1
    for n2 in range(-(R - 1), R):
        plus = px[2 * R : 2 * R + ih, R - n2 : R - n2 + iw]
        minus = px[0:ih, R + n2 : R + n2 + iw]
        bit = plus >= minus
        if counter is not None:
            counter.add(bit.size)
        labels |= bit.astype(np.int32) << t
        t += 1
    return labels


def sbgp_map(image: Image, res: SpatialResolution, counter: ComparisonCounter | None = None) -> LabelMap:
    """Structural-pattern bin index per interior pixel.

    Pixels whose raw label is not structural get the NON_STRUCTURAL
    sentinel and never reach a histogram. Bin index follows the
    canonical structural label order, so n_bins = P.
    """
    res.require_square_maximal()
    _check_interior(image, res.R)
    raw = _bgp_raw_labels(image.pixels, res, counter)
    return LabelMap(structural_labels(res.P).lut()[raw], n_bins=res.P)


def sbgp_map_reference(image: Image, res: SpatialResolution) -> LabelMap:
    """Naive per-pixel double loop; oracle for the vectorized sbgp_map.

    Materializes both the principal and the associated bit of every
    pair and asserts they are complementary.
    """
    res.require_square_maximal()
    _check_interior(image, res.R)
    px = image.pixels
    R, P = res.R, res.P
    sset = structural_labels(P)
    ih = px.shape[0] - 2 * R
    iw = px.shape[1] - 2 * R
    out = np.empty((ih, iw), dtype=np.int32)
    for i in range(R, R + ih):
        for j in range(R, R + iw):
            label = 0
            t = 0
            pairs = [(n1, R, -n1, -R) for n1 in range(-R, R + 1)]
            pairs += [(R, -n2, -R, n2) for n2 in range(-(R - 1), R)]
            for pr, pc, mr, mc in pairs:
                d = px[i + pr, j + pc] - px[i + mr, j + mc]
                b_plus = 1 if d >= 0.0 else 0
                b_minus = 1 if -d > 0.0 else 0
                if b_plus + b_minus != 1:
                    raise InvariantViolation("antipodal bits must be complementary")
                label |= b_plus << t
                t += 1
            out[i - R, j - R] = sset.index_of(label)
    return LabelMap(out, n_bins=P)


def _circular_offsets(P: int, R: int) -> tuple[np.ndarray, np.ndarray]:
    # neighbor p sits at angle 2*pi*p/P: (drow, dcol) = (-R sin a, R cos a)
    angles = 2.0 * np.pi * np.arange(P) / P
    dr = -R * np.sin(angles)
    dc = R * np.cos(angles)
    for arr in (dr, dc):
        near = np.abs(arr - np.rint(arr)) < _SNAP
        arr[near] = np.rint(arr[near])
    return dr, dc


def _sample_shifted(
    px: np.ndarray, dr: float, dc: float, R: int, ih: int, iw: int, anchor: np.ndarray
) -> np.ndarray:
    """Neighbor-minus-anchor at offset (dr, dc) for every interior pixel,
    bilinearly interpolated when the offset is off-grid.

    Interpolating differences instead of raw intensities keeps exact ties
    exact: on a locally constant patch every corner term is zero, so the
    interpolation weights (which only sum to 1 up to rounding) cannot
    manufacture a nonzero result.
    """
    if float(dr).is_integer() and float(dc).is_integer():
        r0, c0 = int(dr), int(dc)
        return px[R + r0 : R + r0 + ih, R + c0 : R + c0 + iw] - anchor
    fr = int(np.floor(dr))
    fc = int(np.floor(dc))
    ty = dr - fr
    tx = dc - fc

    def block(ro: int, co: int) -> np.ndarray:
        return px[R + ro : R + ro + ih, R + co : R + co + iw] - anchor

    return (
        (1 - ty) * (1 - tx) * block(fr, fc)
        + (1 - ty) * tx * block(fr, fc + 1)
        + ty * (1 - tx) * block(fr + 1, fc)
        + ty * tx * block(fr + 1, fc + 1)
    )


def _lbp_bits(px: np.ndarray, res: SpatialResolution, counter=None) -> np.ndarray:
    """(P, ih, iw) boolean stack: circular neighbor >= center."""
    P, R = res.P, res.R
    ih = px.shape[0] - 2 * R
    iw = px.shape[1] - 2 * R
    center = px[R : R + ih, R : R + iw]
    dr, dc = _circular_offsets(P, R)
    bits = np.empty((P, ih, iw), dtype=bool)
    for p in range(P):
        diff = _sample_shifted(px, dr[p], dc[p], R, ih, iw, center)
        bits[p] = diff >= 0.0
        if counter is not None:
            counter.add(bits[p].size)
    return bits


def _uniform_codes(P: int) -> np.ndarray:
    """All codes with <= 2 circular 0/1 transitions, sorted ascending.

    There are P*(P-1) + 2 of them: all-zeros, all-ones, and every
    rotation of every run length in between.
    """
    mask = (1 << P) - 1
    codes = {0, mask}
    for q in range(1, P):
        run = (1 << q) - 1
        for r in range(P):
            codes.add(((run << r) | (run >> (P - r))) & mask)
    return np.array(sorted(codes), dtype=np.uint32)


def lbp_map(
    image: Image,
    res: SpatialResolution,
    variant: str = "u2",
    counter: ComparisonCounter | None = None,
) -> LabelMap:
    """Circular LBP with bilinear sampling and center thresholding (>=).

    variant "u2": patterns with <= 2 circular transitions get distinct
    labels (ranked by code value), all others share one final label, for
    P*(P-1) + 3 bins. variant "riu2": uniform patterns are labeled by
    popcount, non-uniform share label P+1, for P+2 bins.
    """
    if variant not in ("u2", "riu2"):
        raise ValueError(f"variant must be 'u2' or 'riu2', got {variant!r}")
    _check_interior(image, res.R)
    P = res.P
    bits = _lbp_bits(image.pixels, res, counter)
    transitions = (bits ^ np.roll(bits, -1, axis=0)).sum(axis=0)
    uniform = transitions <= 2
    if variant == "riu2":
        pop = bits.sum(axis=0, dtype=np.int32)
        labels = np.where(uniform, pop, np.int32(P + 1))
        return LabelMap(labels.astype(np.int32), n_bins=P + 2)
    codes = np.zeros(bits.shape[1:], dtype=np.uint32)
    for p in range(P):
        codes |= bits[p].astype(np.uint32) << np.uint32(p)
    table = _uniform_codes(P)
    ranks = np.searchsorted(table, codes).astype(np.int32)
    labels = np.where(uniform, ranks, np.int32(len(table)))
    return LabelMap(labels.astype(np.int32), n_bins=len(table) + 1)


def cs_lbp_map(
    image: Image,
    res: SpatialResolution,
    threshold: float = 0.01,
    counter: ComparisonCounter | None = None,
) -> LabelMap:
    """Center-symmetric LBP: each of the P/2 opposite circular sample pairs
    sets a bit when their difference strictly exceeds the threshold.

    Intensities are scaled by 1/255 first (the threshold presumes unit
    range). All 2^(P/2) labels are kept.
    """
    if threshold < 0.0:
        raise ValueError(f"threshold must be >= 0, got {threshold}")
    _check_interior(image, res.R)
    P, R = res.P, res.R
    k = P // 2
    px = image.pixels / 255.0
    ih = px.shape[0] - 2 * R
    iw = px.shape[1] - 2 * R
    dr, dc = _circular_offsets(P, R)
    center = px[R : R + ih, R : R + iw]
    samples = [_sample_shifted(px, dr[p], dc[p], R, ih, iw, center) for p in range(P)]
    labels = np.zeros((ih, iw), dtype=np.int32)
    for i in range(k):
        bit = (samples[i] - samples[i + k]) > threshold
        if counter is not None:
            counter.add(bit.size)
        labels |= bit.astype(np.int32) << i
    return LabelMap(labels, n_bins=2**k)


def higo_map(image: Image, bins: int = 4) -> LabelMap:
    """Gradient-orientation bin index per pixel (full image, no border trim).

    Equal-width bins over [0, 2*pi); bins=1 is the degenerate all-zeros
    map. Performs no pairwise comparisons.
    """
    if bins < 1:
        raise ValueError(f"bins must be >= 1, got {bins}")
    theta = igo(compute_gradients(image)).theta
    labels = dominant_orientation(theta, bins)
    return LabelMap(labels.astype(np.int32), n_bins=bins)


def compute_label_map(
    image: Image,
    cfg: PatternDescriptorConfig,
    counter: ComparisonCounter | None = None,
) -> LabelMap:
    """Dispatch to the operator selected by cfg.kind."""
    if cfg.kind == PatternKind.SBGP:
        return sbgp_map(image, cfg.resolution, counter)
    if cfg.kind == PatternKind.LBP_U2:
        return lbp_map(image, cfg.resolution, "u2", counter)
    if cfg.kind == PatternKind.LBP_RIU2:
        return lbp_map(image, cfg.resolution, "riu2", counter)
    if cfg.kind == PatternKind.CS_LBP:
        return cs_lbp_map(image, cfg.resolution, cfg.cs_threshold, counter)
    return higo_map(image, cfg.higo_bins)
