import numpy as np
import pytest

from voteopt import (
    ClassSet,
    ClassifierSet,
    PredictionSet,
    WeightMatrix,
    evaluate,
    predict,
)
from voteopt.ensemble import predict_batch


def make_predictions(scores, truth, n, m):
    scores = np.asarray(scores, dtype=float)
    return PredictionSet(
        tuple(f"i{t}" for t in range(scores.shape[0])),
        np.asarray(truth, dtype=np.int64),
        scores,
        ClassifierSet(tuple(f"c{i}" for i in range(n))),
        ClassSet(tuple(f"e{j}" for j in range(m))),
    )


class TestPredict:
    def test_single_classifier_passthrough(self):
        w = WeightMatrix([[1.0, 1.0, 1.0]])
        scores = np.array([[0.2, 0.5, 0.3]])
        out = predict(w, scores)
        assert out.predicted == 1
        assert not out.tie
        assert out.scores == pytest.approx([0.2, 0.5, 0.3])

    def test_hard_votes_follow_heavier_classifier(self):
        w = WeightMatrix([[0.7, 0.7], [0.3, 0.3]])
        scores = np.array([[1.0, 0.0], [0.0, 1.0]])  # one-hot disagreement
        out = predict(w, scores)
        assert out.predicted == 0
        assert not out.tie

    def test_matches_bruteforce_sum(self):
        rng = np.random.default_rng(12)
        w = WeightMatrix(rng.random((3, 3)))
        scores = rng.random((3, 3))
        out = predict(w, scores)
        expected = np.zeros(3)
        for j in range(3):
            for i in range(3):
                expected[j] += w.w[i, j] * scores[i, j]
        assert out.scores == pytest.approx(expected, abs=1e-12)
        assert out.predicted == int(np.argmax(expected))

    def test_all_zero_scores_tie_flagged(self):
        w = WeightMatrix([[0.5, 0.5]])
        out = predict(w, np.zeros((1, 2)))
        assert out.tie
        assert out.predicted == 0

    def test_negative_scores_rejected(self):
        w = WeightMatrix([[1.0]])
        with pytest.raises(ValueError, match="non-negative"):
            predict(w, np.array([[-0.1]]))

    def test_scale_invariance_of_argmax(self):
        rng = np.random.default_rng(13)
        w = rng.random((4, 3))
        scores = rng.random((10, 4, 3))
        preds = make_predictions(scores, np.zeros(10), 4, 3)
        base, base_ties = predict_batch(WeightMatrix(w), preds)
        for c in (0.1, 3.0):
            scaled, ties = predict_batch(WeightMatrix(c * w), preds)
            assert np.array_equal(base, scaled)
            assert np.array_equal(base_ties, ties)

    def test_classifier_order_independence(self):
        rng = np.random.default_rng(16)
        w = rng.random((4, 3))
        scores = rng.random((4, 3))
        perm = rng.permutation(4)
        direct = predict(WeightMatrix(w), scores)
        shuffled = predict(WeightMatrix(w[perm]), scores[perm])
        assert shuffled.scores == pytest.approx(direct.scores, abs=1e-12)
        assert shuffled.predicted == direct.predicted

    def test_zero_weight_row_is_inert(self):
        rng = np.random.default_rng(14)
        w_full = rng.random((3, 2))
        w_full[1] = 0.0
        scores = rng.random((6, 3, 2))
        preds_full = make_predictions(scores, np.zeros(6), 3, 2)
        full, _ = predict_batch(WeightMatrix(w_full), preds_full)
        reduced = make_predictions(
            scores[:, [0, 2], :], np.zeros(6), 2, 2
        )
        sliced, _ = predict_batch(WeightMatrix(w_full[[0, 2]]), reduced)
        assert np.array_equal(full, sliced)


class TestEvaluate:
    def test_perfect_predictions(self):
        scores = np.zeros((4, 1, 2))
        truth = [0, 1, 0, 1]
        for t, c in enumerate(truth):
            scores[t, 0, c] = 1.0
        preds = make_predictions(scores, truth, 1, 2)
        report = evaluate(WeightMatrix([[1.0, 1.0]]), preds)
        assert report.balanced_accuracy == 1.0
        assert report.macro_f1 == 1.0
        assert report.macro_auprc == 1.0

    def test_known_confusion_matches_hand_values(self):
        # build soft scores that reproduce true AABBBC / predicted ABBBCC
        classes = ("A", "B", "C")
        truth = [0, 0, 1, 1, 1, 2]
        predicted = [0, 1, 1, 1, 2, 2]
        scores = np.zeros((6, 1, 3))
        for t, c in enumerate(predicted):
            scores[t, 0, c] = 1.0
        preds = PredictionSet(
            tuple(str(i) for i in range(6)),
            np.array(truth),
            scores,
            ClassifierSet(("clf",)),
            ClassSet(classes),
        )
        report = evaluate(WeightMatrix([[1.0, 1.0, 1.0]]), preds)
        assert report.balanced_accuracy == pytest.approx(0.7222, abs=1e-4)
        assert report.macro_precision == pytest.approx(0.7222, abs=1e-4)
        assert report.macro_f1 == pytest.approx(2 / 3, abs=1e-4)
        assert report.per_class["A"]["support"] == 2

    def test_zero_row_matches_removed_classifier(self):
        rng = np.random.default_rng(15)
        scores = rng.random((30, 3, 2))
        truth = rng.integers(0, 2, size=30)
        w = rng.random((3, 2))
        w[2] = 0.0
        full = evaluate(
            WeightMatrix(w), make_predictions(scores, truth, 3, 2)
        )
        reduced = evaluate(
            WeightMatrix(w[:2]),
            make_predictions(scores[:, :2, :], truth, 2, 2),
        )
        assert full.balanced_accuracy == reduced.balanced_accuracy
        assert full.macro_auprc == reduced.macro_auprc

    def test_empty_prediction_set_rejected(self):
        preds = make_predictions(np.zeros((0, 1, 2)), [], 1, 2)
        with pytest.raises(ValueError, match="empty"):
            evaluate(WeightMatrix([[1.0, 1.0]]), preds)
