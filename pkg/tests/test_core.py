import numpy as np
import pytest

from voteopt import (
    AccuracyMatrix,
    ClassDistribution,
    ClassSet,
    ClassifierSet,
    HyperParams,
    UndefinedRatioError,
    WeightMatrix,
    imbalance_ratio,
    objective_value,
    uw_pc,
)

from conftest import random_accuracy_matrix


def _matrix(values):
    values = np.asarray(values, dtype=float)
    n, m = values.shape
    return AccuracyMatrix(
        values,
        ClassifierSet(tuple(f"c{i}" for i in range(n))),
        ClassSet(tuple(f"e{j}" for j in range(m))),
    )


class TestObjectiveValue:
    def test_single_pair_no_penalty(self):
        ob = objective_value(
            _matrix([[1.0]]), WeightMatrix([[1.0]]), HyperParams(k=1, lam=0.0)
        )
        assert ob.total == pytest.approx(1.0)
        assert ob.accuracy_term == pytest.approx(1.0)

    def test_zero_accuracies(self):
        ob = objective_value(
            _matrix([[0.0, 0.0], [0.0, 0.0]]),
            WeightMatrix([[0.3, 0.4], [0.7, 0.6]]),
            HyperParams(k=2, lam=0.0),
        )
        assert ob.total == pytest.approx(0.0)

    def test_d2_uniform_weights(self, d2_matrix):
        # grand sum of the 8x5 fixture is 33.43, so the class-averaged
        # uniform accuracy is 33.43 / 40
        ob = objective_value(
            d2_matrix, uw_pc(8, 5), HyperParams(k=8, lam=0.0)
        )
        assert ob.total == pytest.approx(33.43 / 40, abs=5e-4)

    def test_decomposition_identity(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            v = random_accuracy_matrix(rng)
            w = WeightMatrix(rng.random(v.values.shape))
            p = HyperParams(k=1, lam=float(rng.random()), alpha=float(rng.random()))
            ob = objective_value(v, w, p)
            expected = ob.accuracy_term - p.lam * (
                p.alpha * ob.l1_term + (1 - p.alpha) / 2 * ob.l2_term
            )
            assert ob.total == pytest.approx(expected, abs=1e-12)

    def test_shape_mismatch_rejected(self):
        with pytest.raises(ValueError, match="shape"):
            objective_value(
                _matrix([[0.5, 0.5]]), WeightMatrix([[1.0]]), HyperParams(k=1)
            )

    def test_column_stochastic_l1_equals_class_count(self):
        rng = np.random.default_rng(11)
        for _ in range(20):
            v = random_accuracy_matrix(rng)
            w = rng.random(v.values.shape)
            w /= w.sum(axis=0, keepdims=True)
            ob = objective_value(v, WeightMatrix(w), HyperParams(k=1))
            assert ob.l1_term == pytest.approx(v.m, abs=1e-12)

    def test_equal_l2_coefficient_totals_differ_by_constant(self):
        # with columns summing to one, the L1 penalty is a constant
        # lam*alpha*m, so equal lam*(1-alpha) pairs differ by exactly that
        rng = np.random.default_rng(12)
        v = random_accuracy_matrix(rng, n=4, m=3)
        p1 = HyperParams(k=2, lam=0.5, alpha=0.8)
        p2 = HyperParams(k=2, lam=0.2, alpha=0.5)
        assert p1.l2_coeff == pytest.approx(p2.l2_coeff)
        for _ in range(10):
            w = rng.random(v.values.shape)
            w /= w.sum(axis=0, keepdims=True)
            t1 = objective_value(v, WeightMatrix(w), p1).total
            t2 = objective_value(v, WeightMatrix(w), p2).total
            expected = (p2.lam * p2.alpha - p1.lam * p1.alpha) * v.m
            assert t1 - t2 == pytest.approx(expected, abs=1e-10)

    def test_concave_in_each_weight(self):
        # second difference along any coordinate equals -lam*(1-alpha)*h^2
        v = _matrix([[0.6, 0.2], [0.3, 0.9]])
        p = HyperParams(k=2, lam=0.8, alpha=0.4)
        rng = np.random.default_rng(5)
        w0 = rng.random((2, 2))
        h = 0.1
        for i in range(2):
            for j in range(2):
                totals = []
                for delta in (-h, 0.0, h):
                    w = w0.copy()
                    w[i, j] += delta
                    totals.append(objective_value(v, WeightMatrix(w), p).total)
                second = totals[0] - 2 * totals[1] + totals[2]
                assert second == pytest.approx(-p.l2_coeff * h * h, abs=1e-12)
                assert second < 0


class TestImbalanceRatio:
    def test_leak_benchmark(self):
        d = ClassDistribution(
            ("N1", "N2", "N3", "F1", "F2", "F3", "F4"),
            [17520, 448438, 88154, 1721, 1181, 812, 74],
        )
        assert imbalance_ratio(d) == pytest.approx(6059.97, abs=0.01)

    def test_intrusion_benchmark(self):
        d = ClassDistribution(
            ("N1", "A1", "A2", "A3", "A4"), [13449, 2289, 9234, 11, 209]
        )
        assert imbalance_ratio(d) == pytest.approx(1222.64, abs=0.01)

    def test_balanced(self):
        d = ClassDistribution(tuple(f"c{i}" for i in range(7)), [79700] * 7)
        assert imbalance_ratio(d) == pytest.approx(1.00, abs=1e-12)

    def test_zero_count_rejected(self):
        d = ClassDistribution(("a", "b"), [5, 0])
        with pytest.raises(UndefinedRatioError):
            imbalance_ratio(d)

    def test_at_least_one_and_one_iff_equal(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            counts = rng.integers(1, 1000, size=rng.integers(2, 8))
            d = ClassDistribution(
                tuple(f"c{i}" for i in range(counts.size)), counts
            )
            rho = imbalance_ratio(d)
            assert rho >= 1.0
            assert (rho == 1.0) == bool(counts.min() == counts.max())


class TestValidation:
    def test_accuracy_out_of_range_rejected(self):
        with pytest.raises(ValueError, match="outside|out of"):
            _matrix([[1.2]])

    def test_non_finite_rejected(self):
        with pytest.raises(ValueError, match="finite"):
            _matrix([[np.nan]])

    def test_duplicate_names_rejected(self):
        with pytest.raises(ValueError, match="duplicate"):
            ClassifierSet(("a", "a"))

    def test_negative_weight_rejected(self):
        with pytest.raises(ValueError, match="negative"):
            WeightMatrix([[-0.1]])

    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(k=0),
            dict(k=1, lam=-0.1),
            dict(k=1, alpha=1.5),
            dict(k=1, epsilon=0.01),
            dict(k=1, epsilon=0.0),
            dict(k=1, big_m=10.0),
        ],
    )
    def test_hyperparams_rejected(self, kwargs):
        with pytest.raises(ValueError):
            HyperParams(**kwargs)

    def test_types_are_frozen(self, d2_matrix):
        with pytest.raises(ValueError):
            d2_matrix.values[0, 0] = 0.5
