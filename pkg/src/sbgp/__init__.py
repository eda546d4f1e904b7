"""Structural binary gradient pattern descriptors and benchmark harness."""

from .core import (
    NON_STRUCTURAL,
    BlockGrid,
    FeatureVector,
    Image,
    ImageFormatError,
    InvariantViolation,
    LabelMap,
    Rect,
    SpatialResolution,
    load_image,
    make_block_grid,
    write_pgm,
)
from .features import (
    NORM_NONE,
    NORM_PER_BLOCK_L1,
    ExtractorConfig,
    SbgpmSettings,
    block_histogram,
    extract,
    sqrt_transform,
)
from .gradient import (
    GradientField,
    MagnitudeMap,
    OigmStack,
    OrientationMap,
    build_oigm,
    compute_gradients,
    dominant_orientation,
    igm,
    igo,
    quantize_igo_four,
)
from .harness import (
    ExtractionError,
    extract_manifest_features,
    labels_report,
    read_feature_csv,
    run_bench,
    run_evaluate_id,
    run_evaluate_verify,
    run_extract,
    run_perturb,
    write_feature_csv,
)
from .manifest import (
    DatasetManifest,
    ManifestError,
    ManifestRow,
    PairManifest,
    PairRow,
    load_dataset_manifest,
    load_pair_manifest,
    write_dataset_manifest,
    write_pair_manifest,
)
from .matching import (
    Gallery,
    GalleryEntry,
    SimilarityKind,
    VerificationResult,
    nn_classify,
    similarity,
    verify_pairs,
    verify_scored_pairs,
)
from .patterns import (
    ComparisonCounter,
    PatternDescriptorConfig,
    PatternKind,
    StructuralLabelSet,
    bgp_label,
    compute_label_map,
    cs_lbp_map,
    higo_map,
    lbp_map,
    sbgp_map,
    sbgp_map_reference,
    structural_labels,
    structural_oracle,
)
from .synth import (
    VARIANT_SUITE,
    affine_intensity,
    additive_noise,
    apply_perturbation,
    gamma_intensity,
    generate_synthetic_dataset,
    illumination_ramp,
    occlusion_patch,
    subject_texture,
)

__version__ = "0.1.0"

__all__ = [
    "NON_STRUCTURAL",
    "NORM_NONE",
    "NORM_PER_BLOCK_L1",
    "VARIANT_SUITE",
    "BlockGrid",
    "ComparisonCounter",
    "DatasetManifest",
    "ExtractionError",
    "ExtractorConfig",
    "FeatureVector",
    "Gallery",
    "GalleryEntry",
    "GradientField",
    "Image",
    "ImageFormatError",
    "InvariantViolation",
    "LabelMap",
    "MagnitudeMap",
    "ManifestError",
    "ManifestRow",
    "OigmStack",
    "OrientationMap",
    "PairManifest",
    "PairRow",
    "PatternDescriptorConfig",
    "PatternKind",
    "Rect",
    "SbgpmSettings",
    "SimilarityKind",
    "SpatialResolution",
    "StructuralLabelSet",
    "VerificationResult",
    "additive_noise",
    "affine_intensity",
    "apply_perturbation",
    "bgp_label",
    "block_histogram",
    "build_oigm",
    "compute_gradients",
    "compute_label_map",
    "cs_lbp_map",
    "dominant_orientation",
    "extract",
    "extract_manifest_features",
    "gamma_intensity",
    "generate_synthetic_dataset",
    "higo_map",
    "igm",
    "igo",
    "illumination_ramp",
    "labels_report",
    "lbp_map",
    "load_dataset_manifest",
    "load_image",
    "load_pair_manifest",
    "make_block_grid",
    "nn_classify",
    "occlusion_patch",
    "quantize_igo_four",
    "read_feature_csv",
    "run_bench",
    "run_evaluate_id",
    "run_evaluate_verify",
    "run_extract",
    "run_perturb",
    "sbgp_map",
    "sbgp_map_reference",
    "similarity",
    "sqrt_transform",
    "structural_labels",
    "structural_oracle",
    "subject_texture",
    "verify_pairs",
    "verify_scored_pairs",
    "write_dataset_manifest",
    "write_feature_csv",
    "write_pair_manifest",
    "write_pgm",
]
