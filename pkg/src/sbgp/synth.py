"""Seeded synthetic texture datasets and the intensity perturbation suite
used by the robustness experiments.

Each subject gets a unique base texture (a mixture of oriented
sinusoids and Gaussian blobs). Variant 0 is the unperturbed base
(gallery); further variants cycle through the perturbation suite and
are enrolled as probes. Generation is fully determined by the seed:
regenerating produces byte-identical files.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .core import write_pgm
from .manifest import ManifestRow, write_dataset_manifest

TWO_PI = 2.0 * np.pi


def affine_intensity(px: np.ndarray, a: float, b: float) -> np.ndarray:
    """Global affine intensity change a*I + b, a > 0; clipped at 0."""
    if a <= 0.0:
        raise ValueError(f"affine gain must be > 0, got {a}")
    return np.maximum(a * px + b, 0.0)


def gamma_intensity(px: np.ndarray, g: float) -> np.ndarray:
    """Gamma curve 255 * (I/255)^g, g > 0; monotone on [0, 255]."""
    if g <= 0.0:
        raise ValueError(f"gamma must be > 0, got {g}")
    return 255.0 * (px / 255.0) ** g


def illumination_ramp(px: np.ndarray, strength: float) -> np.ndarray:
    """Smooth multiplicative left-to-right darkening.

    Column x is scaled by 1 - strength * x/(w-1); strength in [0, 1].
    """
    if not 0.0 <= strength <= 1.0:
        raise ValueError(f"ramp strength must be in [0, 1], got {strength}")
    w = px.shape[1]
    factor = 1.0 - strength * (np.arange(w) / max(w - 1, 1))
    return px * factor[np.newaxis, :]


def additive_noise(px: np.ndarray, sigma: float, rng: np.random.Generator) -> np.ndarray:
    """Additive Gaussian noise, clipped back into [0, 255]."""
    if sigma < 0.0:
        raise ValueError(f"sigma must be >= 0, got {sigma}")
    return np.clip(px + rng.normal(0.0, sigma, px.shape), 0.0, 255.0)


def occlusion_patch(
    px: np.ndarray,
    side_fraction: float,
    rng: np.random.Generator,
    fill: float = 0.0,
) -> np.ndarray:
    """Blank out a square patch at a random position inside the image."""
    if not 0.0 < side_fraction <= 1.0:
        raise ValueError(f"side_fraction must be in (0, 1], got {side_fraction}")
    h, w = px.shape
    side = max(1, int(round(side_fraction * min(h, w))))
    y0 = int(rng.integers(0, h - side + 1))
    x0 = int(rng.integers(0, w - side + 1))
    out = px.copy()
    out[y0 : y0 + side, x0 : x0 + side] = fill
    return out


def apply_perturbation(
    px: np.ndarray,
    kind: str,
    level,
    rng: np.random.Generator,
) -> np.ndarray:
    """Apply one named perturbation. level is (a, b) for affine and a
    scalar for the other kinds."""
    if kind == "affine":
        a, b = level
        return affine_intensity(px, a, b)
    if kind == "gamma":
        return gamma_intensity(px, float(level))
    if kind == "ramp":
        return illumination_ramp(px, float(level))
    if kind == "noise":
        return additive_noise(px, float(level), rng)
    if kind == "occlusion":
        return occlusion_patch(px, float(level), rng)
    raise ValueError(f"unknown perturbation kind {kind!r}")


def subject_texture(size: int, rng: np.random.Generator) -> np.ndarray:
    """One subject's base texture: oriented sinusoids plus blobs, scaled
    into [25, 230] so monotone perturbations have headroom."""
    if size < 8:
        raise ValueError(f"size must be >= 8, got {size}")
    xx, yy = np.meshgrid(np.arange(size, dtype=np.float64), np.arange(size, dtype=np.float64))
    img = np.zeros((size, size))
    for _ in range(6):
        freq = rng.uniform(2.0, 10.0)
        ang = rng.uniform(0.0, np.pi)
        phase = rng.uniform(0.0, TWO_PI)
        amp = rng.uniform(0.5, 1.0)
        img += amp * np.sin(TWO_PI * freq * (np.cos(ang) * xx + np.sin(ang) * yy) / size + phase)
    for _ in range(4):
        cx = rng.uniform(0.0, size)
        cy = rng.uniform(0.0, size)
        sig = rng.uniform(size / 12.0, size / 5.0)
        amp = rng.uniform(-1.5, 1.5)
        img += amp * np.exp(-((xx - cx) ** 2 + (yy - cy) ** 2) / (2.0 * sig * sig))
    lo, hi = img.min(), img.max()
    return 25.0 + 205.0 * (img - lo) / (hi - lo)


# Variant suite applied cyclically for variant indices >= 1. Group tags
# name the perturbation and its level.
VARIANT_SUITE: tuple[tuple[str, str, object], ...] = (
    ("affine", "affine", (0.8, 20.0)),
    ("gamma", "gamma", 0.6),
    ("ramp-0.3", "ramp", 0.3),
    ("ramp-0.6", "ramp", 0.6),
    ("ramp-0.9", "ramp", 0.9),
    ("noise-10", "noise", 10.0),
    ("noise-25", "noise", 25.0),
    ("occlusion", "occlusion", 0.25),
)


def generate_synthetic_dataset(
    out_dir: str | Path,
    n_subjects: int,
    n_variants: int,
    seed: int,
    size: int = 100,
) -> Path:
    """Write PGM images plus a manifest.csv under out_dir; returns the
    manifest path.

    Variant 0 of each subject is the clean base (role gallery, group
    "clean"); variants 1..n_variants-1 cycle through VARIANT_SUITE (role
    probe, group = suite tag).
    """
    if n_subjects < 1:
        raise ValueError(f"n_subjects must be >= 1, got {n_subjects}")
    if n_variants < 1:
        raise ValueError(f"n_variants must be >= 1, got {n_variants}")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = []
    for idx in range(n_subjects):
        subject = f"s{idx:03d}"
        base = subject_texture(size, np.random.default_rng([seed, idx]))
        for v in range(n_variants):
            if v == 0:
                px, group, role = base, "clean", "gallery"
            else:
                group, kind, level = VARIANT_SUITE[(v - 1) % len(VARIANT_SUITE)]
                rng = np.random.default_rng([seed, idx, v])
                px, role = apply_perturbation(base, kind, level, rng), "probe"
            name = f"{subject}_v{v:02d}.pgm"
            write_pgm(out_dir / name, px)
            rows.append(ManifestRow(name, subject, group, role))
    manifest_path = out_dir / "manifest.csv"
    write_dataset_manifest(manifest_path, rows)
    return manifest_path
