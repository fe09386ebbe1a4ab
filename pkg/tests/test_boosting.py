import numpy as np
import pytest

import eegboost as eb
from eegboost import boosting
from eegboost.boosting import (
    BoostConfig,
    build_tree,
    grad_hess,
    leaf_weight,
    predict_tree,
    softmax,
    split_gain,
)
from eegboost.errors import ConfigError, DegenerateError, DimensionError, LabelError


def xor_dataset():
    features = np.array([[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]])
    labels = np.array([0, 1, 1, 0])
    return eb.Dataset(features, labels, np.zeros(4, dtype=int), num_classes=2)


class TestSoftmax:
    def test_uniform_on_equal_margins(self):
        np.testing.assert_allclose(softmax(np.zeros(5)), 0.2, atol=1e-15)

    def test_hand_value(self):
        np.testing.assert_allclose(softmax([np.log(2.0), 0.0]), [2.0 / 3.0, 1.0 / 3.0],
                                   atol=1e-12)

    def test_large_margin_stable(self):
        probs = softmax([1000.0, 0.0])
        assert np.all(np.isfinite(probs))
        assert probs[0] == pytest.approx(1.0)
        assert probs[1] == pytest.approx(0.0, abs=1e-300)

    @pytest.mark.parametrize("seed", range(4))
    def test_rows_sum_to_one(self, seed):
        margins = np.random.default_rng(seed).normal(size=(7, 5)) * 10
        np.testing.assert_allclose(softmax(margins).sum(axis=1), 1.0, atol=1e-12)


class TestGradHess:
    def test_uniform_probs(self):
        grad, hess = grad_hess(np.full(5, 0.2), 1)
        np.testing.assert_allclose(grad, [0.2, -0.8, 0.2, 0.2, 0.2], atol=1e-15)
        np.testing.assert_allclose(hess, 0.32, atol=1e-15)

    def test_saturated_case_floored(self):
        grad, hess = grad_hess(np.array([1.0, 0.0]), 0)
        assert grad[0] == 0.0
        assert hess[0] == boosting.HESSIAN_FLOOR
        assert hess[1] == boosting.HESSIAN_FLOOR

    @pytest.mark.parametrize("seed", range(5))
    def test_gradients_sum_to_zero(self, seed):
        probs = softmax(np.random.default_rng(seed).normal(size=6))
        grad, _ = grad_hess(probs, seed % 6)
        assert grad.sum() == pytest.approx(0.0, abs=1e-12)


class TestLeafWeight:
    def test_hand_value(self):
        assert leaf_weight(2.0, 4.0, 1.0) == pytest.approx(-0.4)

    def test_zero_gradient(self):
        assert leaf_weight(0.0, 3.0, 1.0) == 0.0

    def test_strong_regularization_shrinks_to_zero(self):
        assert abs(leaf_weight(2.0, 4.0, 1e12)) < 1e-11

    def test_degenerate_denominator(self):
        with pytest.raises(DegenerateError):
            leaf_weight(1.0, -2.0, 1.0)


class TestSplitGain:
    def test_hand_value(self):
        assert split_gain(-2.0, 3.0, 2.0, 3.0, 1.0, 0.0) == pytest.approx(1.0)

    def test_symmetric_children_no_gain(self):
        # exactly -gamma at lambda=0; never positive for lambda > 0 either
        assert split_gain(1.5, 2.0, 1.5, 2.0, 0.0, 0.0) == pytest.approx(0.0, abs=1e-15)
        assert split_gain(1.5, 2.0, 1.5, 2.0, 0.0, 0.7) == pytest.approx(-0.7)
        assert split_gain(1.5, 2.0, 1.5, 2.0, 1.0, 0.0) <= 0.0

    def test_gamma_penalty(self):
        assert split_gain(-2.0, 3.0, 2.0, 3.0, 1.0, 2.0) == pytest.approx(-1.0)

    @pytest.mark.parametrize("seed", range(5))
    def test_equals_objective_difference_via_leaf_weights(self, seed):
        # gain must match the drop in sum(G*w + (H+lam)*w^2/2 + gamma) when
        # the optimal leaf weights are substituted on both sides
        rng = np.random.default_rng(seed)
        gl, gr = rng.normal(size=2) * 3
        hl, hr = rng.uniform(0.5, 4.0, size=2)
        lam, gamma = rng.uniform(0.0, 2.0), rng.uniform(0.0, 1.0)

        def objective(g, h, leaves):
            w = leaf_weight(g, h, lam)
            return g * w + 0.5 * (h + lam) * w * w + gamma * leaves

        parent = objective(gl + gr, hl + hr, 1)
        children = objective(gl, hl, 1) + objective(gr, hr, 1)
        assert split_gain(gl, hl, gr, hr, lam, gamma) == pytest.approx(
            parent - children, abs=1e-9)


class TestBuildTree:
    def config(self, **kw):
        base = dict(num_classes=2, num_rounds=1, eta=0.7, gamma=0.0,
                    reg_lambda=1.0, max_depth=6, subsample=1.0)
        base.update(kw)
        return BoostConfig(**base)

    def test_identical_rows_single_leaf(self):
        cfg = self.config()
        features = np.ones((4, 3))
        grad = np.array([1.0, 2.0, -0.5, 0.5])
        hess = np.ones(4)
        tree = build_tree(features, np.arange(4), grad, hess, cfg)
        assert tree.is_leaf
        assert tree.weight == pytest.approx(0.7 * (-3.0 / 5.0))

    def test_hand_enumerated_split(self):
        cfg = self.config(reg_lambda=0.0)
        features = np.array([[1.0], [2.0], [3.0], [4.0]])
        grad = np.array([-1.0, -1.0, 1.0, 1.0])
        hess = np.ones(4)
        tree = build_tree(features, np.arange(4), grad, hess, cfg)
        assert tree.feature == 0
        assert tree.threshold == pytest.approx(2.5)
        assert tree.left.is_leaf and tree.right.is_leaf
        assert tree.left.weight == pytest.approx(0.7)
        assert tree.right.weight == pytest.approx(-0.7)

    def test_gamma_blocks_all_splits(self):
        cfg = self.config(reg_lambda=0.0, gamma=100.0)
        features = np.array([[1.0], [2.0], [3.0], [4.0]])
        grad = np.array([-1.0, -1.0, 1.0, 1.0])
        tree = build_tree(features, np.arange(4), grad, np.ones(4), cfg)
        assert tree.is_leaf

    def test_max_depth_respected(self):
        rng = np.random.default_rng(2)
        features = rng.normal(size=(64, 3))
        grad = rng.normal(size=64)
        tree = build_tree(features, np.arange(64), grad, np.ones(64),
                          self.config(max_depth=2, reg_lambda=0.0))

        def depth(node):
            if node.is_leaf:
                return 0
            return 1 + max(depth(node.left), depth(node.right))

        assert depth(tree) <= 2

    def test_tie_breaks_lowest_feature_and_threshold(self):
        # identical columns: the split must land on feature 0
        column = np.array([1.0, 2.0, 3.0, 4.0])
        features = np.stack([column, column], axis=1)
        grad = np.array([-1.0, -1.0, 1.0, 1.0])
        tree = build_tree(features, np.arange(4), grad, np.ones(4),
                          self.config(reg_lambda=0.0))
        assert tree.feature == 0

    def test_leaf_weights_first_order_optimal(self):
        # perturbing any leaf's unshrunk weight must worsen its objective
        rng = np.random.default_rng(7)
        features = rng.normal(size=(40, 4))
        grad = rng.normal(size=40)
        hess = rng.uniform(0.2, 1.5, size=40)
        cfg = self.config(eta=0.7, reg_lambda=1.3, max_depth=3)
        tree = build_tree(features, np.arange(40), grad, hess, cfg)

        def check(node, idx):
            if node.is_leaf:
                g, h = grad[idx].sum(), hess[idx].sum()
                w = node.weight / cfg.eta

                def objective(weight):
                    return g * weight + 0.5 * (h + cfg.reg_lambda) * weight * weight

                assert objective(w) < objective(w + 1e-6)
                assert objective(w) < objective(w - 1e-6)
                return
            mask = features[idx, node.feature] < node.threshold
            check(node.left, idx[mask])
            check(node.right, idx[~mask])

        check(tree, np.arange(40))


class TestTrain:
    def test_separable_two_class(self):
        rng = np.random.default_rng(1)
        x = np.concatenate([rng.normal(-3, 0.5, 30), rng.normal(3, 0.5, 30)])[:, None]
        y = np.repeat([0, 1], 30)
        ds = eb.Dataset(x, y, np.zeros(60, dtype=int), num_classes=2)
        model = boosting.train(ds, BoostConfig(num_classes=2, num_rounds=10, subsample=1.0))
        _, _, predicted = boosting.predict(model, x)
        assert np.array_equal(predicted, y)

    def test_xor_with_row_subsampling(self):
        # full-batch XOR has exactly-zero split gains everywhere (perfectly
        # symmetric derivatives), so row subsampling provides the asymmetry
        ds = xor_dataset()
        model = boosting.train(ds, BoostConfig(num_classes=2, num_rounds=25,
                                               max_depth=2, subsample=0.75, seed=0))
        _, _, predicted = boosting.predict(model, ds.features)
        assert np.array_equal(predicted, ds.labels)

    def test_xor_full_batch_symmetry_deadlock(self):
        # documents the symmetric stall: every tree degenerates to a zero leaf
        ds = xor_dataset()
        model = boosting.train(ds, BoostConfig(num_classes=2, num_rounds=5,
                                               max_depth=2, subsample=1.0))
        for round_trees in model.trees:
            for tree in round_trees:
                assert tree.is_leaf
                assert tree.weight == 0.0

    def test_zero_rounds_uniform_probabilities(self):
        ds = xor_dataset()
        model = boosting.train(ds, BoostConfig(num_classes=2, num_rounds=0))
        _, probs, _ = boosting.predict(model, ds.features)
        np.testing.assert_allclose(probs, 0.5, atol=1e-15)

    def test_label_out_of_range(self):
        ds = eb.Dataset([[0.0], [1.0]], [0, 2], [0, 0], num_classes=3)
        with pytest.raises(LabelError):
            boosting.train(ds, BoostConfig(num_classes=2, num_rounds=1))

    def test_missing_class_rejected(self):
        ds = eb.Dataset([[0.0], [1.0]], [0, 0], [0, 0], num_classes=2)
        with pytest.raises(LabelError):
            boosting.train(ds, BoostConfig(num_classes=2, num_rounds=1))

    @pytest.mark.parametrize("seed", range(3))
    def test_single_unregularized_round_fits_consistent_labels(self, seed):
        # lambda=0, gamma=0, unbounded depth, distinct values: one round of
        # fully grown trees isolates gradient-sign regions and nails training
        rng = np.random.default_rng(seed)
        n, k = 50, 4
        x = rng.normal(size=(n, 3))  # continuous, distinct with probability 1
        y = rng.integers(0, k, size=n)
        y[:k] = np.arange(k)
        ds = eb.Dataset(x, y, np.zeros(n, dtype=int), num_classes=k)
        model = boosting.train(ds, BoostConfig(
            num_classes=k, num_rounds=1, eta=0.7, gamma=0.0, reg_lambda=0.0,
            max_depth=64, subsample=1.0))
        _, _, predicted = boosting.predict(model, x)
        assert np.array_equal(predicted, y)

    def test_loss_non_increasing_full_batch(self, small_synth):
        model = boosting.train(small_synth, BoostConfig(
            num_classes=3, num_rounds=30, eta=0.7, subsample=1.0))
        diffs = np.diff(model.loss_history)
        assert diffs.max() <= 1e-9

    def test_deterministic_with_subsampling(self, small_synth):
        cfg = BoostConfig(num_classes=3, num_rounds=8, subsample=0.8, seed=5)
        a = boosting.train(small_synth, cfg)
        b = boosting.train(small_synth, cfg)
        assert [[t.to_dict() for t in r] for r in a.trees] == \
               [[t.to_dict() for t in r] for r in b.trees]
        assert a.loss_history == b.loss_history

    def test_tree_count(self, small_synth):
        model = boosting.train(small_synth, BoostConfig(num_classes=3, num_rounds=4))
        assert model.tree_count() == 12


class TestPredict:
    def test_leaf_only_trees_give_exact_margins(self):
        model = boosting.BoostedModel(
            config=BoostConfig(num_classes=3, num_rounds=1), num_features=2)
        weights = [0.5, -1.0, 2.0]
        model.trees = [[boosting.TreeNode(weight=w) for w in weights]]
        margins, _, labels = boosting.predict(model, np.zeros((4, 2)))
        np.testing.assert_allclose(margins, np.tile(weights, (4, 1)))
        assert np.all(labels == 2)

    def test_duplicated_trees_double_margins(self, small_synth):
        model = boosting.train(small_synth, BoostConfig(num_classes=3, num_rounds=5, seed=2))
        margins, _, labels = boosting.predict(model, small_synth.features)
        doubled = boosting.BoostedModel(config=model.config, num_features=model.num_features)
        doubled.trees = model.trees + model.trees
        margins2, _, labels2 = boosting.predict(doubled, small_synth.features)
        np.testing.assert_allclose(margins2, 2.0 * margins, atol=1e-12)
        np.testing.assert_array_equal(labels2, labels)

    def test_dimension_mismatch(self, small_synth):
        model = boosting.train(small_synth, BoostConfig(num_classes=3, num_rounds=1))
        with pytest.raises(DimensionError):
            boosting.predict(model, np.zeros((2, small_synth.dims + 1)))


class TestConfig:
    @pytest.mark.parametrize("field,value", [
        ("num_classes", 1), ("num_rounds", -1), ("eta", 0.0), ("gamma", -0.1),
        ("reg_lambda", -1.0), ("max_depth", 0), ("subsample", 0.0), ("subsample", 1.5),
    ])
    def test_invalid_values(self, field, value):
        base = dict(num_classes=3, num_rounds=5)
        base[field] = value
        with pytest.raises(ConfigError):
            BoostConfig(**base)


class TestPersistence:
    def test_round_trip_predictions_identical(self, tmp_path, small_synth):
        model = boosting.train(small_synth, BoostConfig(num_classes=3, num_rounds=6, seed=3))
        path = tmp_path / "model_gbt.json"
        boosting.save(model, path)
        loaded = boosting.load(path)
        margins_a, _, _ = boosting.predict(model, small_synth.features)
        margins_b, _, _ = boosting.predict(loaded, small_synth.features)
        np.testing.assert_array_equal(margins_a, margins_b)
        assert loaded.config == model.config
        assert loaded.loss_history == model.loss_history

    def test_metadata_records_conventions(self, tmp_path, small_synth):
        model = boosting.train(small_synth, BoostConfig(num_classes=3, num_rounds=1))
        path = tmp_path / "model_gbt.json"
        boosting.save(model, path)
        text = path.read_text(encoding="utf-8")
        assert "hessian_floor" in text
        assert "2 * p * (1 - p)" in text
