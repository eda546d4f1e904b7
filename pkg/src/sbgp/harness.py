"""Experiment runners behind the CLI.

Feature extraction to CSV, closed-set identification, fold-out pair
verification, complexity/timing benchmarks, and perturbation sweeps.
All runners return JSON-ready report dicts; everything except the
timing fields is deterministic for fixed inputs.
"""

from __future__ import annotations

import csv
import time
from pathlib import Path

import numpy as np

from .core import Image, InvariantViolation, load_image
from .features import ExtractorConfig, extract
from .gradient import build_oigm
from .manifest import DatasetManifest, ManifestRow, PairManifest
from .matching import Gallery, GalleryEntry, SimilarityKind, nn_classify, similarity, verify_scored_pairs
from .patterns import ComparisonCounter, PatternKind, sbgp_map, structural_labels
from .synth import apply_perturbation

FEATURE_SIG_DIGITS = 9


class ExtractionError(ValueError):
    """One or more manifest images failed to load or extract."""


def config_echo(cfg: ExtractorConfig) -> dict:
    d = cfg.descriptor
    echo = {
        "descriptor": "sbgpm" if cfg.sbgpm is not None else d.kind.value,
        "P": d.resolution.P,
        "R": d.resolution.R,
        "blocks": [cfg.blocks[0], cfg.blocks[1]],
        "normalization": cfg.normalization,
        "sqrt": cfg.sqrt_transform,
    }
    if d.kind == PatternKind.CS_LBP:
        echo["cs_threshold"] = d.cs_threshold
    if d.kind == PatternKind.HIGO:
        echo["higo_bins"] = d.higo_bins
    if cfg.sbgpm is not None:
        echo["sbgpm"] = {"s": cfg.sbgpm.s, "window": cfg.sbgpm.window}
    return echo


def _timing_summary(times: list[float], pixel_counts: list[int]) -> dict:
    total = float(np.sum(times))
    return {
        "mean_s": float(np.mean(times)),
        "median_s": float(np.median(times)),
        "pixels_per_second": float(np.sum(pixel_counts) / total) if total > 0 else 0.0,
    }


def extract_manifest_features(
    manifest: DatasetManifest,
    cfg: ExtractorConfig,
) -> tuple[list[tuple[ManifestRow, object]], dict, ComparisonCounter]:
    """Extract features for every manifest row, in manifest order.

    Raises ExtractionError listing every failing path if any row fails.
    """
    counter = ComparisonCounter()
    feats = []
    times = []
    pixels = []
    errors = []
    for row in manifest.rows:
        try:
            img = load_image(manifest.resolve(row))
            t0 = time.perf_counter()
            vec = extract(img, cfg, counter)
            times.append(time.perf_counter() - t0)
            pixels.append(img.width * img.height)
            feats.append((row, vec))
        except (OSError, ValueError) as e:
            errors.append(f"{row.path}: {e}")
    if errors:
        raise ExtractionError("failed inputs:\n" + "\n".join(errors))
    dims = {vec.dims for _, vec in feats}
    if len(dims) > 1:
        raise InvariantViolation(f"feature dims drifted across rows: {sorted(dims)}")
    return feats, _timing_summary(times, pixels), counter


def write_feature_csv(path: str | Path, rows: list[tuple[ManifestRow, object]]) -> None:
    """Feature CSV with header path,subject_id,dims,v0..v{dims-1}; values
    carry 9 significant digits."""
    if not rows:
        raise ValueError("no feature rows to write")
    dims = rows[0][1].dims
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["path", "subject_id", "dims"] + [f"v{i}" for i in range(dims)])
        for row, vec in rows:
            writer.writerow(
                [row.path, row.subject_id, dims]
                + [format(v, f".{FEATURE_SIG_DIGITS}g") for v in vec.values]
            )


def read_feature_csv(path: str | Path) -> list[tuple[str, str, np.ndarray]]:
    with open(path, newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if not header or header[:3] != ["path", "subject_id", "dims"]:
            raise ValueError(f"{path}: not a feature CSV")
        out = []
        for row in reader:
            if not row:
                continue
            dims = int(row[2])
            values = np.array([float(v) for v in row[3 : 3 + dims]])
            if values.size != dims:
                raise ValueError(f"{path}: row for {row[0]} has {values.size} values, expected {dims}")
            out.append((row[0], row[1], values))
    return out


def run_extract(manifest: DatasetManifest, cfg: ExtractorConfig, out_path: str | Path) -> dict:
    """Extract features for a manifest and write the feature CSV."""
    feats, timing, counter = extract_manifest_features(manifest, cfg)
    write_feature_csv(out_path, feats)
    return {
        "command": "extract",
        "config": config_echo(cfg),
        "n_rows": len(feats),
        "dims": feats[0][1].dims,
        "out": str(out_path),
        "timing": timing,
        "comparisons": {"total": counter.total},
    }


def _group_rates(outcomes: list[tuple[str, bool]]) -> dict:
    groups: dict[str, list[bool]] = {}
    for group, ok in outcomes:
        groups.setdefault(group, []).append(ok)
    return {
        g: {
            "correct": int(np.sum(v)),
            "total": len(v),
            "rate": float(np.mean(v)),
        }
        for g, v in sorted(groups.items())
    }


def run_evaluate_id(
    manifest: DatasetManifest,
    cfg: ExtractorConfig,
    kinds: list[SimilarityKind],
) -> dict:
    """Closed-set identification: NN-classify each probe against the
    gallery; recognition rates overall and per group tag."""
    if not manifest.gallery_rows:
        raise ValueError("manifest has no gallery rows")
    if not manifest.probe_rows:
        raise ValueError("manifest has no probe rows")
    feats, timing, counter = extract_manifest_features(manifest, cfg)
    by_role = {"gallery": [], "probe": []}
    for row, vec in feats:
        by_role[row.role].append((row, vec))
    gallery = Gallery(tuple(GalleryEntry(vec, row.subject_id, row.path) for row, vec in by_role["gallery"]))
    results = {}
    for kind in kinds:
        outcomes = []
        correct_total = 0
        for row, vec in by_role["probe"]:
            predicted, _ = nn_classify(gallery, vec, kind)
            ok = predicted == row.subject_id
            correct_total += ok
            outcomes.append((row.group, ok))
        results[kind.value] = {
            "overall": {
                "correct": int(correct_total),
                "total": len(outcomes),
                "rate": float(correct_total / len(outcomes)),
            },
            "groups": _group_rates(outcomes),
        }
    return {
        "command": "evaluate-id",
        "config": config_echo(cfg),
        "similarities": [k.value for k in kinds],
        "dims": feats[0][1].dims,
        "n_gallery": len(by_role["gallery"]),
        "n_probes": len(by_role["probe"]),
        "results": results,
        "timing": timing,
        "comparisons": {"total": counter.total},
    }


def run_evaluate_verify(
    pairs: PairManifest,
    cfg: ExtractorConfig,
    kinds: list[SimilarityKind],
) -> dict:
    """Fold-out pair verification over a pair manifest."""
    order: list[str] = []
    seen = set()
    for r in pairs.rows:
        for p in (r.path_a, r.path_b):
            if p not in seen:
                seen.add(p)
                order.append(p)
    vectors = {}
    errors = []
    for p in order:
        try:
            vectors[p] = extract(load_image(pairs.resolve(p)), cfg)
        except (OSError, ValueError) as e:
            errors.append(f"{p}: {e}")
    if errors:
        raise ExtractionError("failed inputs:\n" + "\n".join(errors))
    results = {}
    for kind in kinds:
        scores = [similarity(vectors[r.path_a], vectors[r.path_b], kind) for r in pairs.rows]
        same = [r.same for r in pairs.rows]
        folds = [r.fold for r in pairs.rows]
        res = verify_scored_pairs(scores, same, folds, kind.higher_is_better)
        results[kind.value] = {
            "fold_accuracies": list(res.fold_accuracies),
            "fold_thresholds": list(res.fold_thresholds),
            "mean_accuracy": res.mean_accuracy,
            "std_error": res.std_error,
            "roc": [[f, t] for f, t in res.roc],
            "roc_thresholds": list(res.roc_thresholds),
        }
    return {
        "command": "evaluate-verify",
        "config": config_echo(cfg),
        "similarities": [k.value for k in kinds],
        "n_pairs": len(pairs.rows),
        "n_folds": pairs.n_folds,
        "results": results,
    }


def run_bench(
    manifest: DatasetManifest,
    configs: list[ExtractorConfig],
    iterations: int = 20,
    warmup: int = 3,
) -> dict:
    """Measure per-config extraction cost on the manifest's images.

    Reports instrumented comparisons per interior pixel, comparison
    units per pixel (each pairwise comparison costs a subtract plus a
    sign test, i.e. two units), label counts, feature dims, and warm
    per-image timing (mean of per-image means, median of means).
    """
    if iterations < 1:
        raise ValueError(f"iterations must be >= 1, got {iterations}")
    images = [load_image(manifest.resolve(row)) for row in manifest.rows]
    if not images:
        raise ValueError("bench needs at least one image")
    entries = []
    for cfg in configs:
        counter = ComparisonCounter()
        interior = 0
        dims = None
        for img in images:
            border = cfg.descriptor.border()
            interior += cfg.n_channels * (img.height - 2 * border) * (img.width - 2 * border)
            dims = extract(img, cfg, counter).dims
        comparisons_per_pixel = counter.total / interior
        per_image_means = []
        pixel_counts = []
        total_time = 0.0
        for img in images:
            for _ in range(warmup):
                extract(img, cfg)
            t0 = time.perf_counter()
            for _ in range(iterations):
                extract(img, cfg)
            elapsed = time.perf_counter() - t0
            per_image_means.append(elapsed / iterations)
            pixel_counts.append(img.width * img.height * iterations)
            total_time += elapsed
        entries.append(
            {
                "config": config_echo(cfg),
                "comparisons_per_pixel": comparisons_per_pixel,
                "comp_units_per_pixel": 2.0 * comparisons_per_pixel,
                "n_labels": cfg.descriptor.n_bins(),
                "dims": dims,
                "timing": {
                    "mean_s": float(np.mean(per_image_means)),
                    "median_s": float(np.median(per_image_means)),
                    "pixels_per_second": float(np.sum(pixel_counts) / total_time) if total_time else 0.0,
                },
            }
        )
    return {
        "command": "bench",
        "n_images": len(images),
        "iterations": iterations,
        "warmup": warmup,
        "results": entries,
    }


def _non_structural_fraction(img: Image, cfg: ExtractorConfig) -> float | None:
    """Mean sentinel fraction of the structural label map(s), or None for
    descriptors without a sentinel."""
    if cfg.descriptor.kind != PatternKind.SBGP:
        return None
    res = cfg.descriptor.resolution
    if cfg.sbgpm is not None:
        stack = build_oigm(img, cfg.sbgpm.s, cfg.sbgpm.window)
        fracs = [sbgp_map(Image(ch.m), res).non_structural_fraction() for ch in stack.channels]
        return float(np.mean(fracs))
    return sbgp_map(img, res).non_structural_fraction()


def run_perturb(
    manifest: DatasetManifest,
    cfg: ExtractorConfig,
    kind: str,
    levels: list,
    sim: SimilarityKind,
    seed: int = 0,
) -> dict:
    """Identification where probes are perturbed copies of the gallery.

    Each gallery image is perturbed at each level (seeded per image and
    level), classified against the clean gallery, and scored. For the
    structural descriptor the report also carries NON_STRUCTURAL
    fraction statistics and whether each level exceeds the clean-image
    fraction.
    """
    rows = manifest.gallery_rows
    if not rows:
        raise ValueError("manifest has no gallery rows")
    if not levels:
        raise ValueError("no perturbation levels given")
    loaded = [(row, load_image(manifest.resolve(row))) for row in rows]
    gallery = Gallery(
        tuple(GalleryEntry(extract(img, cfg), row.subject_id, row.path) for row, img in loaded)
    )
    clean_fracs = [_non_structural_fraction(img, cfg) for _, img in loaded]
    have_fracs = clean_fracs[0] is not None
    clean_mean = float(np.mean(clean_fracs)) if have_fracs else None
    per_level = []
    for level_idx, level in enumerate(levels):
        correct = 0
        fracs = []
        for img_idx, (row, img) in enumerate(loaded):
            rng = np.random.default_rng([seed, level_idx, img_idx])
            perturbed = Image(apply_perturbation(img.pixels, kind, level, rng))
            vec = extract(perturbed, cfg)
            predicted, _ = nn_classify(gallery, vec, sim)
            correct += predicted == row.subject_id
            if have_fracs:
                fracs.append(_non_structural_fraction(perturbed, cfg))
        entry = {
            "level": list(level) if isinstance(level, tuple) else level,
            "rate": float(correct / len(loaded)),
            "correct": int(correct),
            "total": len(loaded),
        }
        if have_fracs:
            mean_frac = float(np.mean(fracs))
            entry["non_structural_fraction"] = mean_frac
            entry["exceeds_clean_fraction"] = bool(mean_frac > clean_mean)
        per_level.append(entry)
    report = {
        "command": "perturb",
        "config": config_echo(cfg),
        "similarity": sim.value,
        "perturbation": kind,
        "n_gallery": len(loaded),
        "levels": per_level,
    }
    if have_fracs:
        report["clean_non_structural_fraction"] = clean_mean
        report["ordering_pass"] = bool(all(e["exceeds_clean_fraction"] for e in per_level))
    return report


def labels_report(P: int) -> dict:
    """Canonical structural label sequence for neighbor count P."""
    sset = structural_labels(P)
    return {"P": P, "k": P // 2, "labels": list(sset.labels)}
