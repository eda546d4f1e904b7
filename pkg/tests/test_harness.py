import hashlib
import json

import numpy as np
import pytest

from sbgp import (
    ExtractionError,
    ExtractorConfig,
    ManifestRow,
    PairRow,
    PatternDescriptorConfig,
    PatternKind,
    SimilarityKind,
    SpatialResolution,
    apply_perturbation,
    extract_manifest_features,
    generate_synthetic_dataset,
    labels_report,
    load_dataset_manifest,
    load_pair_manifest,
    read_feature_csv,
    run_bench,
    run_evaluate_id,
    run_evaluate_verify,
    run_extract,
    run_perturb,
    subject_texture,
    write_dataset_manifest,
    write_feature_csv,
    write_pair_manifest,
)
from sbgp.cli import main


def small_config(kind=PatternKind.SBGP, P=8, R=1, blocks=(4, 4)):
    return ExtractorConfig(PatternDescriptorConfig(kind, SpatialResolution(P, R)), blocks=blocks)


def tree_digest(root):
    h = hashlib.sha256()
    for p in sorted(root.rglob("*")):
        if p.is_file():
            h.update(p.name.encode())
            h.update(p.read_bytes())
    return h.hexdigest()


class TestSynthOps:
    def test_affine_scales_and_shifts(self):
        px = np.array([[10.0, 20.0]])
        out = apply_perturbation(px, "affine", (2.0, 5.0), np.random.default_rng(0))
        assert out.tolist() == [[25.0, 45.0]]

    def test_affine_clamps_below_zero(self):
        px = np.array([[1.0]])
        out = apply_perturbation(px, "affine", (1.0, -10.0), np.random.default_rng(0))
        assert out.tolist() == [[0.0]]

    def test_gamma_preserves_range_endpoints(self):
        px = np.array([[0.0, 255.0]])
        out = apply_perturbation(px, "gamma", 0.4, np.random.default_rng(0))
        assert out.tolist() == [[0.0, 255.0]]

    def test_ramp_darkens_left_to_right(self):
        px = np.full((2, 5), 100.0)
        out = apply_perturbation(px, "ramp", 0.5, np.random.default_rng(0))
        assert np.all(out[:, 0] == 100.0)
        assert np.all(out[:, -1] == 50.0)
        assert np.all(np.diff(out[0]) < 0)

    def test_noise_is_seed_deterministic_and_clipped(self):
        px = np.full((8, 8), 250.0)
        a = apply_perturbation(px, "noise", 50.0, np.random.default_rng(9))
        b = apply_perturbation(px, "noise", 50.0, np.random.default_rng(9))
        assert np.array_equal(a, b)
        assert a.max() <= 255.0 and a.min() >= 0.0
        assert not np.array_equal(a, px)

    def test_occlusion_zeroes_a_square(self):
        px = np.full((20, 20), 7.0)
        out = apply_perturbation(px, "occlusion", 0.25, np.random.default_rng(3))
        assert int((out == 0.0).sum()) == 25
        assert out.sum() == 7.0 * (400 - 25)

    def test_unknown_kind_rejected(self):
        with pytest.raises(ValueError):
            apply_perturbation(np.zeros((2, 2)), "swirl", 1.0, np.random.default_rng(0))

    def test_subject_texture_range_and_determinism(self):
        a = subject_texture(48, np.random.default_rng([5, 1]))
        b = subject_texture(48, np.random.default_rng([5, 1]))
        assert a.shape == (48, 48)
        assert np.array_equal(a, b)
        assert a.min() == 25.0 and a.max() == 230.0


class TestGenerateSyntheticDataset:
    def test_regeneration_is_byte_identical(self, tmp_path):
        m1 = generate_synthetic_dataset(tmp_path / "one", 3, 4, seed=11, size=40)
        m2 = generate_synthetic_dataset(tmp_path / "two", 3, 4, seed=11, size=40)
        assert m1.name == "manifest.csv" and m2.name == "manifest.csv"
        assert tree_digest(tmp_path / "one") == tree_digest(tmp_path / "two")

    def test_seed_changes_content(self, tmp_path):
        generate_synthetic_dataset(tmp_path / "one", 2, 2, seed=1, size=40)
        generate_synthetic_dataset(tmp_path / "two", 2, 2, seed=2, size=40)
        assert tree_digest(tmp_path / "one") != tree_digest(tmp_path / "two")

    def test_roles_and_groups(self, tmp_path):
        m = load_dataset_manifest(generate_synthetic_dataset(tmp_path, 2, 4, seed=0, size=40))
        assert len(m.rows) == 8
        assert len(m.gallery_rows) == 2
        assert all(r.group == "clean" for r in m.gallery_rows)
        assert {r.group for r in m.probe_rows} == {"affine", "gamma", "ramp-0.3"}
        assert all(m.resolve(r).exists() for r in m.rows)


class TestFeatureCsv:
    def test_round_trip(self, tmp_path):
        manifest = load_dataset_manifest(generate_synthetic_dataset(tmp_path, 2, 2, 3, size=40))
        feats, _, _ = extract_manifest_features(manifest, small_config())
        out = tmp_path / "f.csv"
        write_feature_csv(out, feats)
        header = out.read_text().splitlines()[0].split(",")
        dims = feats[0][1].dims
        assert header == ["path", "subject_id", "dims"] + [f"v{i}" for i in range(dims)]
        back = read_feature_csv(out)
        assert [(p, s) for p, s, _ in back] == [(r.path, r.subject_id) for r, _ in feats]
        for (_, _, got), (_, vec) in zip(back, feats):
            assert np.allclose(got, vec.values, rtol=1e-8, atol=1e-12)

    def test_read_rejects_other_csv(self, tmp_path):
        p = tmp_path / "other.csv"
        p.write_text("a,b,c\n1,2,3\n")
        with pytest.raises(ValueError):
            read_feature_csv(p)


class TestRunExtract:
    def test_writes_csv_and_reports(self, tmp_path):
        manifest = load_dataset_manifest(generate_synthetic_dataset(tmp_path, 2, 2, 3, size=40))
        out = tmp_path / "f.csv"
        report = run_extract(manifest, small_config(), out)
        assert out.exists()
        assert report["n_rows"] == 4
        assert report["dims"] == 4 * 4 * 8
        assert report["timing"]["mean_s"] > 0.0
        assert report["comparisons"]["total"] == 4 * 4 * 38 * 38

    def test_any_failure_blocks_output(self, tmp_path):
        manifest_path = generate_synthetic_dataset(tmp_path, 1, 1, 3, size=40)
        rows = list(load_dataset_manifest(manifest_path).rows)
        rows.append(ManifestRow("missing.pgm", "sX", "clean", "gallery"))
        write_dataset_manifest(manifest_path, rows)
        manifest = load_dataset_manifest(manifest_path)
        out = tmp_path / "f.csv"
        with pytest.raises(ExtractionError, match="missing.pgm"):
            run_extract(manifest, small_config(), out)
        assert not out.exists()


class TestRunEvaluateId:
    def test_probe_equals_gallery_is_perfect(self, tmp_path):
        generate_synthetic_dataset(tmp_path, 3, 1, seed=4, size=40)
        rows = []
        for idx in range(3):
            name = f"s{idx:03d}_v00.pgm"
            rows.append(ManifestRow(name, f"s{idx:03d}", "clean", "gallery"))
            rows.append(ManifestRow(name, f"s{idx:03d}", "clean", "probe"))
        path = tmp_path / "manifest.csv"
        write_dataset_manifest(path, rows)
        report = run_evaluate_id(load_dataset_manifest(path), small_config(), list(SimilarityKind))
        assert report["n_gallery"] == 3 and report["n_probes"] == 3
        for kind in SimilarityKind:
            assert report["results"][kind.value]["overall"]["rate"] == 1.0

    def test_group_breakdown(self, tmp_path):
        manifest = load_dataset_manifest(generate_synthetic_dataset(tmp_path, 3, 3, 5, size=48))
        report = run_evaluate_id(manifest, small_config(), [SimilarityKind.HIST_INTERSECTION])
        groups = report["results"]["hi"]["groups"]
        assert set(groups) == {"affine", "gamma"}
        for g in groups.values():
            assert g["total"] == 3
            assert g["correct"] <= g["total"]
            assert g["rate"] == g["correct"] / g["total"]

    def test_gallery_only_manifest_rejected(self, tmp_path):
        manifest = load_dataset_manifest(generate_synthetic_dataset(tmp_path, 2, 1, 0, size=40))
        with pytest.raises(ValueError, match="probe"):
            run_evaluate_id(manifest, small_config(), [SimilarityKind.HIST_INTERSECTION])


class TestRunEvaluateVerify:
    def test_folded_pairs_report(self, tmp_path):
        generate_synthetic_dataset(tmp_path, 4, 2, seed=6, size=40)
        pairs = []
        for fold in range(2):
            a, b = 2 * fold, 2 * fold + 1
            pairs.append(PairRow(f"s{a:03d}_v00.pgm", f"s{a:03d}_v01.pgm", True, fold))
            pairs.append(PairRow(f"s{a:03d}_v00.pgm", f"s{b:03d}_v00.pgm", False, fold))
        path = tmp_path / "pairs.csv"
        write_pair_manifest(path, pairs)
        report = run_evaluate_verify(load_pair_manifest(path), small_config(), list(SimilarityKind))
        assert report["n_pairs"] == 4 and report["n_folds"] == 2
        for kind in SimilarityKind:
            block = report["results"][kind.value]
            assert len(block["fold_accuracies"]) == 2
            assert 0.0 <= block["mean_accuracy"] <= 1.0
            assert block["roc"][-1] == [1.0, 1.0]

    def test_missing_pair_image_lists_path(self, tmp_path):
        path = tmp_path / "pairs.csv"
        write_pair_manifest(path, [PairRow("a.pgm", "b.pgm", True, 0), PairRow("a.pgm", "c.pgm", False, 1)])
        with pytest.raises(ExtractionError, match="a.pgm"):
            run_evaluate_verify(load_pair_manifest(path), small_config(), [SimilarityKind.EUCLIDEAN])


class TestRunBench:
    def test_comparison_economics(self, tmp_path):
        manifest = load_dataset_manifest(generate_synthetic_dataset(tmp_path, 1, 1, 7, size=32))
        configs = [
            small_config(PatternKind.SBGP),
            small_config(PatternKind.LBP_U2),
            small_config(PatternKind.CS_LBP),
        ]
        report = run_bench(manifest, configs, iterations=2, warmup=1)
        by_kind = {e["config"]["descriptor"]: e for e in report["results"]}
        assert by_kind["sbgp"]["comparisons_per_pixel"] == 4.0
        assert by_kind["sbgp"]["comp_units_per_pixel"] == 8.0
        assert by_kind["lbp-u2"]["comparisons_per_pixel"] == 8.0
        assert by_kind["lbp-u2"]["comp_units_per_pixel"] == 16.0
        assert by_kind["cs-lbp"]["comparisons_per_pixel"] == 4.0
        assert by_kind["sbgp"]["n_labels"] == 8
        assert by_kind["lbp-u2"]["n_labels"] == 59
        for e in report["results"]:
            assert e["timing"]["mean_s"] > 0.0
            assert e["timing"]["pixels_per_second"] > 0.0


class TestRunPerturb:
    def test_affine_levels_are_perfectly_recognized(self, tmp_path):
        manifest = load_dataset_manifest(generate_synthetic_dataset(tmp_path, 3, 1, 8, size=48))
        report = run_perturb(
            manifest,
            small_config(),
            "affine",
            [(0.5, 10.0), (2.0, 30.0)],
            SimilarityKind.HIST_INTERSECTION,
            seed=1,
        )
        assert [e["rate"] for e in report["levels"]] == [1.0, 1.0]
        assert report["clean_non_structural_fraction"] >= 0.0
        for e in report["levels"]:
            assert e["non_structural_fraction"] == report["clean_non_structural_fraction"]
        assert report["ordering_pass"] is False

    def test_noise_raises_nonstructural_fraction(self, tmp_path):
        manifest = load_dataset_manifest(generate_synthetic_dataset(tmp_path, 3, 1, 8, size=48))
        report = run_perturb(
            manifest,
            small_config(P=16, R=2),
            "noise",
            [25.0],
            SimilarityKind.HIST_INTERSECTION,
            seed=1,
        )
        assert report["levels"][0]["exceeds_clean_fraction"] is True
        assert report["ordering_pass"] is True

    def test_baseline_reports_skip_fraction_keys(self, tmp_path):
        manifest = load_dataset_manifest(generate_synthetic_dataset(tmp_path, 2, 1, 8, size=40))
        report = run_perturb(
            manifest,
            small_config(PatternKind.LBP_RIU2),
            "gamma",
            [0.6],
            SimilarityKind.HIST_INTERSECTION,
        )
        assert "clean_non_structural_fraction" not in report
        assert "non_structural_fraction" not in report["levels"][0]


class TestLabelsReport:
    def test_p8(self):
        assert labels_report(8) == {"P": 8, "k": 4, "labels": [0, 1, 3, 7, 8, 12, 14, 15]}


class TestCli:
    def test_labels_json(self, tmp_path, capsys):
        out = tmp_path / "labels.json"
        assert main(["labels", "--P", "8", "--out", str(out)]) == 0
        assert json.loads(out.read_text())["labels"] == [0, 1, 3, 7, 8, 12, 14, 15]

    def test_labels_stdout(self, capsys):
        assert main(["labels", "--P", "4"]) == 0
        assert json.loads(capsys.readouterr().out)["labels"] == [0, 1, 2, 3]

    def test_synth_extract_evaluate_pipeline(self, tmp_path, capsys):
        data = tmp_path / "data"
        assert main(["synth", "--out", str(data), "--subjects", "2", "--variants", "3", "--seed", "1", "--size", "40"]) == 0
        manifest = str(data / "manifest.csv")
        feats = tmp_path / "feats.csv"
        args = ["--manifest", manifest, "--pr", "8,1", "--blocks", "4x4"]
        assert main(["extract", *args, "--out", str(feats)]) == 0
        assert len(read_feature_csv(feats)) == 6
        report_path = tmp_path / "id.json"
        assert main(["evaluate-id", *args, "--similarity", "all", "--out", str(report_path)]) == 0
        report = json.loads(report_path.read_text())
        assert set(report["results"]) == {"hi", "chi2", "l2", "cos"}

    def test_evaluate_verify_cli(self, tmp_path):
        data = tmp_path / "data"
        generate_synthetic_dataset(data, 2, 2, seed=2, size=40)
        pairs = tmp_path / "pairs.csv"
        write_pair_manifest(
            pairs,
            [
                PairRow(str(data / "s000_v00.pgm"), str(data / "s000_v01.pgm"), True, 0),
                PairRow(str(data / "s000_v00.pgm"), str(data / "s001_v00.pgm"), False, 0),
                PairRow(str(data / "s001_v00.pgm"), str(data / "s001_v01.pgm"), True, 1),
                PairRow(str(data / "s001_v00.pgm"), str(data / "s000_v01.pgm"), False, 1),
            ],
        )
        out = tmp_path / "verify.json"
        code = main(
            ["evaluate-verify", "--manifest", str(pairs), "--pr", "8,1", "--blocks", "4x4", "--out", str(out)]
        )
        assert code == 0
        report = json.loads(out.read_text())
        assert report["n_folds"] == 2
        assert "hi" in report["results"]

    def test_bench_cli_single_descriptor(self, tmp_path):
        data = tmp_path / "data"
        generate_synthetic_dataset(data, 1, 1, seed=3, size=32)
        out = tmp_path / "bench.json"
        code = main(
            [
                "bench",
                "--manifest", str(data / "manifest.csv"),
                "--descriptor", "sbgp",
                "--pr", "8,1",
                "--blocks", "4x4",
                "--iterations", "1",
                "--out", str(out),
            ]
        )
        assert code == 0
        report = json.loads(out.read_text())
        assert report["results"][0]["comparisons_per_pixel"] == 4.0

    def test_bench_cli_default_matrix(self, tmp_path):
        data = tmp_path / "data"
        generate_synthetic_dataset(data, 1, 1, seed=3, size=32)
        out = tmp_path / "bench.json"
        code = main(
            ["bench", "--manifest", str(data / "manifest.csv"), "--iterations", "1", "--out", str(out)]
        )
        assert code == 0
        report = json.loads(out.read_text())
        assert len(report["results"]) == 9
        names = {e["config"]["descriptor"] for e in report["results"]}
        assert names == {"sbgp", "lbp-u2", "lbp-riu2"}

    def test_perturb_cli(self, tmp_path):
        data = tmp_path / "data"
        generate_synthetic_dataset(data, 2, 1, seed=4, size=40)
        out = tmp_path / "perturb.json"
        code = main(
            [
                "perturb",
                "--manifest", str(data / "manifest.csv"),
                "--kind", "affine",
                "--levels", "0.5:10,2:30",
                "--pr", "8,1",
                "--blocks", "4x4",
                "--out", str(out),
            ]
        )
        assert code == 0
        report = json.loads(out.read_text())
        assert [e["level"] for e in report["levels"]] == [[0.5, 10.0], [2.0, 30.0]]

    def test_usage_error_exits_1(self, capsys):
        assert main(["extract"]) == 1
        assert main(["nonsense"]) == 1
        assert main([]) == 1
        assert main(["labels", "--P", "8", "--similarity", "hi"]) == 1

    def test_missing_manifest_exits_1(self, tmp_path, capsys):
        assert main(["extract", "--manifest", str(tmp_path / "no.csv"), "--out", str(tmp_path / "o.csv")]) == 1
        err = capsys.readouterr().err
        assert "no.csv" in err

    def test_bad_pr_value_exits_1(self, tmp_path, capsys):
        data = tmp_path / "data"
        generate_synthetic_dataset(data, 1, 1, seed=0, size=32)
        code = main(
            ["extract", "--manifest", str(data / "manifest.csv"), "--pr", "9,1", "--out", str(tmp_path / "o.csv")]
        )
        assert code == 1
