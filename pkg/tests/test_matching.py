import numpy as np
import pytest

from sbgp import (
    FeatureVector,
    Gallery,
    GalleryEntry,
    SimilarityKind,
    nn_classify,
    similarity,
    verify_pairs,
    verify_scored_pairs,
)

HI = SimilarityKind.HIST_INTERSECTION
CHI2 = SimilarityKind.CHI_SQUARE
L2 = SimilarityKind.EUCLIDEAN
COS = SimilarityKind.COSINE


def fv(values):
    values = np.asarray(values, dtype=np.float64)
    return FeatureVector(values, n_channels=1, n_blocks=1, n_bins=values.size)


class TestSimilarity:
    def test_intersection_hand_values(self):
        assert similarity(fv([1, 0]), fv([0, 1]), HI) == 0.0
        assert similarity(fv([2, 3]), fv([1, 5]), HI) == 4.0

    def test_chi_square_hand_values(self):
        assert similarity(fv([1, 0]), fv([0, 1]), CHI2) == 2.0
        assert similarity(fv([0, 1]), fv([0, 1]), CHI2) == 0.0  # 0/0 term drops

    def test_euclidean_hand_value(self):
        assert similarity(fv([3, 0]), fv([0, 4]), L2) == 5.0

    def test_cosine_hand_values(self):
        assert similarity(fv([1, 0]), fv([0, 1]), COS) == 0.0
        assert similarity(fv([2, 2]), fv([5, 5]), COS) == pytest.approx(1.0)
        assert similarity(fv([0, 0]), fv([0, 0]), COS) == 1.0
        assert similarity(fv([0, 0]), fv([1, 2]), COS) == 0.0

    def test_all_kinds_symmetric(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            a = fv(rng.uniform(0, 5, 8))
            b = fv(rng.uniform(0, 5, 8))
            for kind in SimilarityKind:
                assert similarity(a, b, kind) == pytest.approx(similarity(b, a, kind))

    def test_self_similarity_extremes(self):
        a = fv([1, 2, 3])
        assert similarity(a, a, CHI2) == 0.0
        assert similarity(a, a, L2) == 0.0
        assert similarity(a, a, COS) == pytest.approx(1.0)

    def test_orientation_flags(self):
        assert HI.higher_is_better and COS.higher_is_better
        assert not CHI2.higher_is_better and not L2.higher_is_better

    def test_dims_mismatch_rejected(self):
        with pytest.raises(ValueError):
            similarity(fv([1, 2]), fv([1, 2, 3]), HI)


class TestNnClassify:
    def test_picks_most_similar_subject(self):
        gallery = Gallery(
            (
                GalleryEntry(fv([1, 0, 0]), "a"),
                GalleryEntry(fv([0, 1, 0]), "b"),
                GalleryEntry(fv([0, 0, 1]), "c"),
            )
        )
        subject, score = nn_classify(gallery, fv([0.1, 0.9, 0.0]), HI)
        assert subject == "b"
        assert score == pytest.approx(0.9)

    def test_distance_kinds_pick_minimum(self):
        gallery = Gallery((GalleryEntry(fv([4, 0]), "far"), GalleryEntry(fv([1, 1]), "near")))
        subject, score = nn_classify(gallery, fv([1, 0]), L2)
        assert subject == "near"
        assert score == 1.0

    def test_ties_go_to_lowest_index(self):
        twin = fv([1, 2, 3])
        gallery = Gallery((GalleryEntry(twin, "first"), GalleryEntry(twin, "second")))
        for kind in SimilarityKind:
            subject, _ = nn_classify(gallery, fv([1, 2, 3]), kind)
            assert subject == "first"

    def test_empty_gallery_rejected(self):
        with pytest.raises(ValueError):
            nn_classify(Gallery(()), fv([1]), HI)

    def test_mixed_dims_gallery_rejected(self):
        with pytest.raises(ValueError):
            Gallery((GalleryEntry(fv([1]), "a"), GalleryEntry(fv([1, 2]), "b")))


class TestVerifyScoredPairs:
    def test_two_fold_hand_case(self):
        res = verify_scored_pairs(
            [0.9, 0.2, 0.6, 0.4], [True, False, True, False], [0, 0, 1, 1], True
        )
        assert res.fold_accuracies == (1.0, 0.5)
        assert res.fold_thresholds == (0.6, 0.9)
        assert res.mean_accuracy == 0.75
        assert res.std_error == pytest.approx(0.25)

    def test_two_fold_hand_case_distances(self):
        res = verify_scored_pairs(
            [0.1, 0.8, 0.3, 0.7], [True, False, True, False], [0, 0, 1, 1], False
        )
        assert res.fold_accuracies == (1.0, 0.5)
        assert res.fold_thresholds == (0.3, 0.1)
        assert res.mean_accuracy == 0.75

    def test_threshold_tie_takes_smallest(self):
        # training accuracies tie at 2/3 for t=0.6 and the reject-all
        # sentinel; the smaller explicit threshold must win
        res = verify_scored_pairs(
            [0.3, 0.6, 0.9, 0.5], [False, True, False, True], [0, 0, 0, 1], True
        )
        assert res.fold_thresholds[1] == 0.6
        assert res.fold_thresholds[0] == 0.5

    def test_all_different_training_uses_reject_all(self):
        res = verify_scored_pairs([0.5, 0.7, 0.9], [False, False, False], [0, 0, 1], True)
        assert res.fold_accuracies == (1.0, 1.0)
        assert res.mean_accuracy == 1.0

    def test_roc_hand_case(self):
        res = verify_scored_pairs(
            [0.9, 0.2, 0.6, 0.4], [True, False, True, False], [0, 0, 1, 1], True
        )
        assert res.roc == ((0.0, 0.5), (0.0, 1.0), (0.5, 1.0), (1.0, 1.0))
        assert res.roc_thresholds == (0.9, 0.6, 0.4, 0.2)

    def test_roc_far_monotone(self):
        rng = np.random.default_rng(11)
        scores = rng.uniform(0, 1, 60)
        same = rng.uniform(0, 1, 60) < 0.5
        folds = np.arange(60) % 3
        res = verify_scored_pairs(scores, same, folds, True)
        fars = [p[0] for p in res.roc]
        assert fars == sorted(fars)
        assert res.roc[-1] == (1.0, 1.0)

    def test_separable_scores_classify_perfectly(self):
        # random separable scores, but every fold anchors the class
        # boundary (one same pair at 0.6, one different pair at 0.4) so
        # the trained threshold transfers exactly to the held-out fold
        rng = np.random.default_rng(5)
        scores, same, folds = [], [], []
        for f in range(4):
            s = rng.uniform(0.6, 1.0, 14)
            d = rng.uniform(0.0, 0.4, 14)
            scores += [0.6, 0.4, *s, *d]
            same += [True, False] + [True] * 14 + [False] * 14
            folds += [f] * 30
        res = verify_scored_pairs(scores, same, folds, True)
        assert res.mean_accuracy == 1.0
        assert res.std_error == 0.0
        assert res.fold_thresholds == (0.6, 0.6, 0.6, 0.6)

    def test_input_validation(self):
        with pytest.raises(ValueError):
            verify_scored_pairs([0.1, 0.2], [True], [0, 1], True)
        with pytest.raises(ValueError):
            verify_scored_pairs([0.1, 0.2], [True, False], [0, 0], True)
        with pytest.raises(ValueError):
            verify_scored_pairs([0.1, 0.2], [True, False], [0, 2], True)
        with pytest.raises(ValueError):
            verify_scored_pairs([], [], [], True)


class TestVerifyPairs:
    def test_scores_vectors_then_verifies(self):
        a, b = fv([1, 0]), fv([0, 1])
        pairs = [(a, a, True, 0), (a, b, False, 0), (b, b, True, 1), (a, b, False, 1)]
        res = verify_pairs(pairs, HI)
        assert res.mean_accuracy == 1.0
