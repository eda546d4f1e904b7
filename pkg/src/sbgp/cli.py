"""Command-line interface.

Subcommands: extract, evaluate-id, evaluate-verify, bench, perturb,
labels, synth. Exit codes: 0 success, 1 input error, 2 internal
invariant violation.
"""

from __future__ import annotations

import argparse
import json
import sys
import traceback

from .core import InvariantViolation, SpatialResolution
from .features import ExtractorConfig, SbgpmSettings
from .harness import (
    labels_report,
    run_bench,
    run_evaluate_id,
    run_evaluate_verify,
    run_extract,
    run_perturb,
)
from .manifest import load_dataset_manifest, load_pair_manifest
from .matching import SimilarityKind
from .patterns import PatternDescriptorConfig, PatternKind
from .synth import generate_synthetic_dataset

DESCRIPTOR_NAMES = ["sbgp", "sbgpm", "lbp-u2", "lbp-riu2", "cs-lbp", "higo"]
BENCH_MATRIX_PR = [(8, 1), (16, 2), (24, 3)]
BENCH_MATRIX_DESCRIPTORS = ["sbgp", "lbp-u2", "lbp-riu2"]


class _UsageError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with code 2 on usage errors; route them through the
    # input-error path (exit 1) instead.
    def error(self, message):
        raise _UsageError(f"{self.prog}: {message}")


def _parse_pr(text: str) -> tuple[int, int]:
    parts = text.split(",")
    if len(parts) != 2:
        raise _UsageError(f"--pr expects P,R (e.g. 16,2), got {text!r}")
    try:
        return int(parts[0]), int(parts[1])
    except ValueError:
        raise _UsageError(f"--pr expects integers, got {text!r}") from None


def _parse_blocks(text: str) -> tuple[int, int]:
    parts = text.lower().split("x")
    if len(parts) != 2:
        raise _UsageError(f"--blocks expects NxM (e.g. 6x6), got {text!r}")
    try:
        return int(parts[0]), int(parts[1])
    except ValueError:
        raise _UsageError(f"--blocks expects integers, got {text!r}") from None


def _parse_levels(text: str, kind: str) -> list:
    levels: list = []
    for token in text.split(","):
        token = token.strip()
        if not token:
            continue
        try:
            if kind == "affine":
                a, _, b = token.partition(":")
                levels.append((float(a), float(b) if b else 0.0))
            else:
                levels.append(float(token))
        except ValueError:
            raise _UsageError(f"bad level {token!r} for kind {kind}") from None
    if not levels:
        raise _UsageError("--levels is empty")
    return levels


def _add_descriptor_flags(p: argparse.ArgumentParser, descriptor_default: str | None = "sbgp") -> None:
    p.add_argument("--descriptor", choices=DESCRIPTOR_NAMES, default=descriptor_default)
    p.add_argument("--pr", default="16,2", metavar="P,R", help="neighbor count and radius (default 16,2)")
    p.add_argument("--blocks", default="6x6", metavar="NxM", help="histogram block grid (default 6x6)")
    p.add_argument("--sqrt", action="store_true", help="apply the square-root feature transform")
    p.add_argument("--sbgpm-s", type=int, default=3, metavar="N", help="magnitude channel count (default 3)")
    p.add_argument("--sbgpm-window", type=int, default=7, metavar="W", help="magnitude window side (default 7)")
    p.add_argument("--cs-threshold", type=float, default=0.01, metavar="T")
    p.add_argument("--higo-bins", type=int, default=4, metavar="B")


def _add_similarity_flag(p: argparse.ArgumentParser) -> None:
    p.add_argument(
        "--similarity",
        choices=["hi", "chi2", "l2", "cos", "all"],
        default="hi",
        help="similarity measure (default hi); 'all' reports every measure",
    )


def _config_from_args(args, descriptor: str | None = None) -> ExtractorConfig:
    name = descriptor if descriptor is not None else args.descriptor
    P, R = _parse_pr(args.pr)
    res = SpatialResolution(P, R)
    sbgpm = None
    if name == "sbgpm":
        kind = PatternKind.SBGP
        sbgpm = SbgpmSettings(s=args.sbgpm_s, window=args.sbgpm_window)
    else:
        kind = PatternKind(name)
    descr = PatternDescriptorConfig(
        kind=kind,
        resolution=res,
        cs_threshold=args.cs_threshold,
        higo_bins=args.higo_bins,
    )
    return ExtractorConfig(
        descriptor=descr,
        blocks=_parse_blocks(args.blocks),
        sbgpm=sbgpm,
        sqrt_transform=args.sqrt,
    )


def _similarity_kinds(args) -> list[SimilarityKind]:
    if args.similarity == "all":
        return list(SimilarityKind)
    return [SimilarityKind(args.similarity)]


def _emit(report: dict, out: str | None) -> None:
    text = json.dumps(report, indent=2, sort_keys=True)
    if out:
        with open(out, "w") as f:
            f.write(text + "\n")
    else:
        print(text)


def _cmd_extract(args) -> int:
    manifest = load_dataset_manifest(args.manifest)
    report = run_extract(manifest, _config_from_args(args), args.out)
    print(f"wrote {report['n_rows']} feature rows ({report['dims']} dims) to {args.out}")
    return 0


def _cmd_evaluate_id(args) -> int:
    manifest = load_dataset_manifest(args.manifest)
    report = run_evaluate_id(manifest, _config_from_args(args), _similarity_kinds(args))
    _emit(report, args.out)
    return 0


def _cmd_evaluate_verify(args) -> int:
    pairs = load_pair_manifest(args.manifest)
    report = run_evaluate_verify(pairs, _config_from_args(args), _similarity_kinds(args))
    _emit(report, args.out)
    return 0


def _cmd_bench(args) -> int:
    manifest = load_dataset_manifest(args.manifest)
    if args.descriptor is not None:
        configs = [_config_from_args(args)]
    else:
        # default matrix: the plain descriptors at maximal samplings
        configs = []
        for name in BENCH_MATRIX_DESCRIPTORS:
            for P, R in BENCH_MATRIX_PR:
                ns = argparse.Namespace(**vars(args))
                ns.pr = f"{P},{R}"
                configs.append(_config_from_args(ns, descriptor=name))
    report = run_bench(manifest, configs, iterations=args.iterations)
    _emit(report, args.out)
    return 0


def _cmd_perturb(args) -> int:
    manifest = load_dataset_manifest(args.manifest)
    levels = _parse_levels(args.levels, args.kind)
    report = run_perturb(
        manifest,
        _config_from_args(args),
        args.kind,
        levels,
        SimilarityKind(args.similarity),
        seed=args.seed,
    )
    _emit(report, args.out)
    return 0


def _cmd_labels(args) -> int:
    _emit(labels_report(args.P), args.out)
    return 0


def _cmd_synth(args) -> int:
    manifest_path = generate_synthetic_dataset(
        args.out, args.subjects, args.variants, seed=args.seed, size=args.size
    )
    print(str(manifest_path))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sbgp", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", parents=[], help="extract features for a manifest to CSV")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True)
    _add_descriptor_flags(p)
    p.set_defaults(func=_cmd_extract)

    p = sub.add_parser("evaluate-id", help="closed-set identification over a manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", default=None)
    _add_descriptor_flags(p)
    _add_similarity_flag(p)
    p.set_defaults(func=_cmd_evaluate_id)

    p = sub.add_parser("evaluate-verify", help="fold-out pair verification over a pair manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", default=None)
    _add_descriptor_flags(p)
    _add_similarity_flag(p)
    p.set_defaults(func=_cmd_evaluate_verify)

    p = sub.add_parser("bench", help="complexity and timing benchmark")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", default=None)
    p.add_argument("--iterations", type=int, default=20)
    _add_descriptor_flags(p, descriptor_default=None)
    p.set_defaults(func=_cmd_bench)

    p = sub.add_parser("perturb", help="identification under synthetic perturbations")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", default=None)
    p.add_argument("--kind", required=True, choices=["affine", "gamma", "ramp", "noise", "occlusion"])
    p.add_argument("--levels", required=True, help="comma-separated levels; affine levels are a:b pairs")
    p.add_argument("--seed", type=int, default=0)
    _add_descriptor_flags(p)
    _add_similarity_flag(p)
    p.set_defaults(func=_cmd_perturb)

    p = sub.add_parser("labels", help="canonical structural label sequence for P")
    p.add_argument("--P", type=int, required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_labels)

    p = sub.add_parser("synth", help="generate a seeded synthetic dataset")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--subjects", type=int, default=10)
    p.add_argument("--variants", type=int, default=9)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--size", type=int, default=100)
    p.set_defaults(func=_cmd_synth)

    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except InvariantViolation as e:
        print(f"internal error: {e}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except Exception:
        traceback.print_exc()
        return 2


if __name__ == "__main__":
    sys.exit(main())
