"""Gradient-domain operators.

Central-difference gradient fields, full-circle orientation and
magnitude maps, the four-bin gradient sign quantization, and the
orientation-partitioned windowed magnitude averages that feed the
multi-channel descriptor variant.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Image

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class GradientField:
    """Per-pixel horizontal (gx) and vertical (gy) derivatives."""

    gx: np.ndarray
    gy: np.ndarray

    def __post_init__(self):
        gx = np.asarray(self.gx, dtype=np.float64)
        gy = np.asarray(self.gy, dtype=np.float64)
        if gx.ndim != 2 or gx.shape != gy.shape:
            raise ValueError(f"gx/gy must be matching 2-D arrays, got {gx.shape} vs {gy.shape}")
        for name, arr in (("gx", gx), ("gy", gy)):
            arr = arr.copy()
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)


@dataclass(frozen=True)
class OrientationMap:
    """Per-pixel gradient direction in [0, 2*pi)."""

    theta: np.ndarray

    def __post_init__(self):
        th = np.asarray(self.theta, dtype=np.float64)
        if th.ndim != 2:
            raise ValueError(f"orientation map must be 2-D, got shape {th.shape}")
        if th.size and (th.min() < 0.0 or th.max() >= TWO_PI):
            raise ValueError("orientations must lie in [0, 2*pi)")
        th = th.copy()
        th.flags.writeable = False
        object.__setattr__(self, "theta", th)


@dataclass(frozen=True)
class MagnitudeMap:
    """Per-pixel non-negative gradient magnitude."""

    m: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.m, dtype=np.float64)
        if m.ndim != 2:
            raise ValueError(f"magnitude map must be 2-D, got shape {m.shape}")
        if m.size and m.min() < 0.0:
            raise ValueError("magnitudes must be non-negative")
        m = m.copy()
        m.flags.writeable = False
        object.__setattr__(self, "m", m)


@dataclass(frozen=True)
class OigmStack:
    """Orientation-partitioned windowed magnitude averages, one channel per bin."""

    channels: tuple[MagnitudeMap, ...]
    s: int
    local_window: int

    def __post_init__(self):
        if len(self.channels) != self.s:
            raise ValueError(f"expected {self.s} channels, got {len(self.channels)}")

    @property
    def n(self) -> int:
        # fixed divisor: the full window area, even where the window is clipped
        return self.local_window * self.local_window


def compute_gradients(image: Image) -> GradientField:
    """Central differences, falling back to one-sided differences at the
    outermost row/column. Requires at least a 3x3 image."""
    px = image.pixels
    if px.shape[0] < 3 or px.shape[1] < 3:
        raise ValueError(f"image must be at least 3x3 for gradients, got {px.shape}")
    gy, gx = np.gradient(px)
    return GradientField(gx=gx, gy=gy)


def igo(field: GradientField) -> OrientationMap:
    """Full-circle gradient orientation atan2(gy, gx) mapped into [0, 2*pi).

    Zero-gradient pixels get orientation 0.
    """
    theta = np.arctan2(field.gy, field.gx)
    theta = np.where(theta < 0.0, theta + TWO_PI, theta)
    theta[theta >= TWO_PI] = 0.0  # guard float wrap of tiny negative angles
    return OrientationMap(theta)


def igm(field: GradientField) -> MagnitudeMap:
    """Euclidean gradient magnitude sqrt(gx^2 + gy^2)."""
    return MagnitudeMap(np.hypot(field.gx, field.gy))


def quantize_igo_four(field: GradientField) -> np.ndarray:
    """Two-bit orientation code per pixel from gradient signs.

    code = (sign_bit(gy) << 1) | sign_bit(gx) with sign_bit(v) = 1 when
    v >= 0, so e.g. gx=2, gy=3 -> 0b11 and gx=-1, gy=2 -> 0b10. Zero
    gradients count as non-negative.
    """
    bx = (field.gx >= 0.0).astype(np.int32)
    by = (field.gy >= 0.0).astype(np.int32)
    return (by << 1) | bx


def dominant_orientation(theta, s: int):
    """Equal-width orientation bin index over the full circle.

    floor(theta * s / (2*pi)), clipped into [0, s). Accepts scalars or
    arrays; theta must lie in [0, 2*pi).
    """
    if s < 1:
        raise ValueError(f"s must be >= 1, got {s}")
    th = np.asarray(theta, dtype=np.float64)
    if th.size and (th.min() < 0.0 or th.max() >= TWO_PI):
        raise ValueError("orientations must lie in [0, 2*pi)")
    idx = np.floor(th * (s / TWO_PI)).astype(np.int64)
    idx = np.clip(idx, 0, s - 1)  # guard float rounding at the wrap point
    if np.ndim(theta) == 0:
        return int(idx)
    return idx


def _windowed_sum(arr: np.ndarray, radius: int) -> np.ndarray:
    """Sum over the (2*radius+1)^2 window centered at each pixel.

    The window is clipped at image borders; clipped-out pixels
    contribute zero. Computed with an integral image.
    """
    h, w = arr.shape
    ii = np.zeros((h + 1, w + 1), dtype=np.float64)
    ii[1:, 1:] = arr.cumsum(axis=0).cumsum(axis=1)
    y = np.arange(h)
    x = np.arange(w)
    y0 = np.clip(y - radius, 0, h)
    y1 = np.clip(y + radius + 1, 0, h)
    x0 = np.clip(x - radius, 0, w)
    x1 = np.clip(x + radius + 1, 0, w)
    return ii[y1][:, x1] - ii[y0][:, x1] - ii[y1][:, x0] + ii[y0][:, x0]


def build_oigm(image: Image, s: int = 3, window: int = 7) -> OigmStack:
    """Split gradient magnitude into s orientation channels and average
    each over a window x window neighborhood.

    Channel t at a pixel is (1/n) * sum of magnitudes of the window
    pixels whose dominant orientation is t, with n = window**2 always;
    windows clipped at borders keep the full-window divisor. Summing the
    channels pointwise therefore reproduces the box-filtered magnitude
    map.
    """
    if s < 1:
        raise ValueError(f"s must be >= 1, got {s}")
    if window < 1 or window % 2 == 0:
        raise ValueError(f"window must be odd and >= 1, got {window}")
    field = compute_gradients(image)
    theta = igo(field).theta
    mag = igm(field).m
    dom = dominant_orientation(theta, s)
    radius = window // 2
    n = float(window * window)
    channels = []
    for t in range(s):
        masked = np.where(dom == t, mag, 0.0)
        summed = _windowed_sum(masked, radius)
        # cumsum cancellation can dip a true zero a few ulp below it
        channels.append(MagnitudeMap(np.maximum(summed, 0.0) / n))
    return OigmStack(tuple(channels), s=s, local_window=window)
