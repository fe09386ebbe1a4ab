import numpy as np
import pytest

import eegboost as eb
from eegboost import autoencoder as ae
from eegboost.errors import ConfigError, DimensionError, DivergenceError


def finite_difference_gradients(model, x, step=1e-5):
    """Central-difference gradient of the batch loss for every parameter."""
    out = {}
    for name in ae.PARAM_NAMES:
        param = getattr(model, name)
        fd = np.zeros_like(param)
        it = np.nditer(param, flags=["multi_index"])
        while not it.finished:
            idx = it.multi_index
            original = param[idx]
            param[idx] = original + step
            loss_plus, _ = ae.batch_loss_and_gradients(model, x)
            param[idx] = original - step
            loss_minus, _ = ae.batch_loss_and_gradients(model, x)
            param[idx] = original
            fd[idx] = (loss_plus - loss_minus) / (2.0 * step)
            it.iternext()
        out[name] = fd
    return out


def gradient_relative_error(model, x):
    _, analytic = ae.batch_loss_and_gradients(model, x)
    fd = finite_difference_gradients(model, x)
    worst = 0.0
    for name in ae.PARAM_NAMES:
        diff = np.linalg.norm(analytic[name] - fd[name])
        scale = max(np.linalg.norm(analytic[name]), np.linalg.norm(fd[name]), 1e-12)
        worst = max(worst, diff / scale)
    return worst


def identity_model(dim):
    cfg = ae.AutoencoderConfig(input_dim=dim, hidden_dim=dim, seed=0)
    model = ae.init(cfg)
    model.encoder_weight = np.eye(dim)
    model.decoder_weight = np.eye(dim)
    model.encoder_bias = np.zeros(dim)
    model.decoder_bias = np.zeros(dim)
    return model


class TestInit:
    def test_glorot_bounds(self):
        cfg = ae.AutoencoderConfig(input_dim=64, hidden_dim=121, seed=1)
        model = ae.init(cfg)
        bound = np.sqrt(6.0 / (64 + 121))
        assert bound == pytest.approx(0.180090, abs=1e-6)
        assert model.encoder_weight.shape == (121, 64)
        assert model.decoder_weight.shape == (64, 121)
        for w in (model.encoder_weight, model.decoder_weight):
            assert np.abs(w).max() <= bound
            assert np.abs(w).max() >= 0.95 * bound
        assert np.all(model.encoder_bias == 0)
        assert np.all(model.decoder_bias == 0)

    def test_deterministic(self):
        cfg = ae.AutoencoderConfig(input_dim=8, hidden_dim=5, seed=77)
        a, b = ae.init(cfg), ae.init(cfg)
        for name in ae.PARAM_NAMES:
            np.testing.assert_array_equal(getattr(a, name), getattr(b, name))

    def test_zero_hidden_rejected(self):
        with pytest.raises(ConfigError):
            ae.AutoencoderConfig(input_dim=4, hidden_dim=0)

    @pytest.mark.parametrize("field,value", [
        ("learning_rate", 0.0), ("rmsprop_decay", 1.0), ("rmsprop_epsilon", 0.0),
        ("iterations", 0), ("batch_size", 0),
    ])
    def test_bad_config_values(self, field, value):
        with pytest.raises(ConfigError):
            ae.AutoencoderConfig(input_dim=4, hidden_dim=2, **{field: value})


class TestForward:
    def test_identity_construction(self):
        model = identity_model(3)
        hidden, out = ae.forward(model, [1.0, -2.0, 0.5])
        np.testing.assert_array_equal(hidden, [1.0, -2.0, 0.5])
        np.testing.assert_array_equal(out, [1.0, -2.0, 0.5])

    def test_zero_weights_constant_output(self):
        model = identity_model(2)
        model.encoder_weight = np.zeros((2, 2))
        model.decoder_weight = np.zeros((2, 2))
        model.decoder_bias = np.array([3.0, -1.0])
        for x in ([0.0, 0.0], [5.0, 7.0]):
            _, out = ae.forward(model, x)
            np.testing.assert_array_equal(out, [3.0, -1.0])

    def test_hand_worked_two_by_two(self):
        model = identity_model(2)
        model.encoder_weight = np.array([[1.0, 2.0], [3.0, 4.0]])
        model.encoder_bias = np.array([0.5, -0.5])
        model.decoder_weight = np.array([[2.0, 0.0], [1.0, 1.0]])
        model.decoder_bias = np.array([1.0, 0.0])
        hidden, out = ae.forward(model, [1.0, 2.0])
        np.testing.assert_allclose(hidden, [5.5, 10.5])
        np.testing.assert_allclose(out, [12.0, 16.0])

    def test_dimension_error(self):
        with pytest.raises(DimensionError):
            ae.forward(identity_model(3), [1.0, 2.0])

    def test_pure_function(self):
        model = ae.init(ae.AutoencoderConfig(input_dim=4, hidden_dim=3, seed=2))
        x = np.array([0.1, -0.4, 2.0, 1.0])
        first = ae.forward(model, x)
        second = ae.forward(model, x)
        np.testing.assert_array_equal(first[0], second[0])
        np.testing.assert_array_equal(first[1], second[1])


class TestMse:
    def test_zero_on_equal(self):
        assert ae.mse([1.0, 2.0], [1.0, 2.0]) == 0.0

    def test_hand_values(self):
        assert ae.mse([0.0, 0.0], [1.0, 1.0]) == 1.0
        assert ae.mse([1.0, 2.0, 3.0], [1.0, 2.0, 4.0]) == pytest.approx(1.0 / 3.0)

    def test_shape_mismatch(self):
        with pytest.raises(DimensionError):
            ae.mse([1.0], [1.0, 2.0])


class TestRmsprop:
    def test_hand_step(self):
        param, cache = ae.rmsprop_step(np.array([1.0]), np.array([2.0]), None,
                                       learning_rate=0.01, decay=0.9, epsilon=1e-8)
        assert cache[0] == pytest.approx(0.4, abs=1e-12)
        assert param[0] == pytest.approx(0.968377, abs=1e-6)

    def test_zero_gradient_no_move(self):
        param, cache = ae.rmsprop_step(np.array([2.5]), np.array([0.0]), np.array([0.0]),
                                       learning_rate=0.1, decay=0.9, epsilon=1e-8)
        assert param[0] == 2.5
        assert cache[0] == 0.0


class TestGradients:
    @pytest.mark.parametrize("activation", [ae.Activation.IDENTITY, ae.Activation.SIGMOID])
    @pytest.mark.parametrize("seed", range(3))
    def test_analytic_matches_finite_differences(self, activation, seed):
        rng = np.random.default_rng(seed)
        cfg = ae.AutoencoderConfig(input_dim=3, hidden_dim=4, activation=activation, seed=seed)
        model = ae.init(cfg)
        x = rng.normal(size=(5, 3))
        assert gradient_relative_error(model, x) < 1e-4


class TestTrain:
    def dataset(self, x):
        n = x.shape[0]
        return eb.Dataset(x, np.zeros(n, dtype=int), np.zeros(n, dtype=int))

    def test_zero_gradient_leaves_parameters(self):
        model = identity_model(3)
        model.config = ae.AutoencoderConfig(input_dim=3, hidden_dim=3, iterations=5, seed=0)
        data = self.dataset(np.random.default_rng(0).normal(size=(10, 3)))
        trained = ae.train(model, data)
        for name in ae.PARAM_NAMES:
            np.testing.assert_array_equal(getattr(trained, name), getattr(model, name))
        assert trained.loss_history == [0.0] * 5

    def test_rank_one_data_converges(self):
        rng = np.random.default_rng(4)
        x = rng.normal(size=(60, 1)) @ rng.normal(size=(1, 4))
        cfg = ae.AutoencoderConfig(input_dim=4, hidden_dim=1, iterations=800, seed=3)
        trained = ae.train(ae.init(cfg), self.dataset(x))
        assert trained.loss_history[-1] < 1e-3

    def test_loss_descends_overall(self, small_synth):
        from eegboost import normalize
        stats = normalize.fit(small_synth)
        data = normalize.apply(eb.NormalizationMethod.ZSCORE, stats, small_synth)
        cfg = ae.AutoencoderConfig(input_dim=data.dims, hidden_dim=4, iterations=200, seed=1)
        trained = ae.train(ae.init(cfg), data)
        assert trained.loss_history[-1] < trained.loss_history[0]

    def test_bitwise_deterministic(self, small_synth):
        cfg = ae.AutoencoderConfig(input_dim=small_synth.dims, hidden_dim=5,
                                   iterations=50, batch_size=16, seed=9)
        a = ae.train(ae.init(cfg), small_synth)
        b = ae.train(ae.init(cfg), small_synth)
        for name in ae.PARAM_NAMES:
            np.testing.assert_array_equal(getattr(a, name), getattr(b, name))
        assert a.loss_history == b.loss_history

    def test_input_model_untouched(self, small_synth):
        cfg = ae.AutoencoderConfig(input_dim=small_synth.dims, hidden_dim=5,
                                   iterations=10, seed=9)
        model = ae.init(cfg)
        before = {name: getattr(model, name).copy() for name in ae.PARAM_NAMES}
        ae.train(model, small_synth)
        for name in ae.PARAM_NAMES:
            np.testing.assert_array_equal(getattr(model, name), before[name])

    def test_divergence_raises_with_iteration(self):
        cfg = ae.AutoencoderConfig(input_dim=2, hidden_dim=2, iterations=3, seed=0)
        data = self.dataset(np.full((4, 2), 1e200))  # squared error overflows
        with np.errstate(over="ignore"), pytest.raises(DivergenceError, match="iteration 0"):
            ae.train(ae.init(cfg), data)


class TestEncode:
    def test_identity_model_passthrough(self, small_synth):
        model = identity_model(small_synth.dims)
        encoded = ae.encode(model, small_synth)
        np.testing.assert_array_equal(encoded.features, small_synth.features)
        np.testing.assert_array_equal(encoded.labels, small_synth.labels)

    @pytest.mark.parametrize("hidden,kind", [(121, "ascent"), (30, "reduction")])
    def test_dimensionality_change(self, hidden, kind):
        rng = np.random.default_rng(0)
        ds = eb.Dataset(rng.normal(size=(12, 64)), np.zeros(12, dtype=int),
                        np.zeros(12, dtype=int))
        model = ae.init(ae.AutoencoderConfig(input_dim=64, hidden_dim=hidden, seed=0))
        encoded = ae.encode(model, ds)
        assert encoded.dims == hidden

    def test_dimension_mismatch(self, small_synth):
        model = ae.init(ae.AutoencoderConfig(input_dim=5, hidden_dim=2, seed=0))
        with pytest.raises(DimensionError):
            ae.encode(model, small_synth)


class TestPersistence:
    def test_round_trip_exact(self, tmp_path, small_synth):
        cfg = ae.AutoencoderConfig(input_dim=small_synth.dims, hidden_dim=6,
                                   iterations=20, seed=13)
        trained = ae.train(ae.init(cfg), small_synth)
        path = tmp_path / "model_ae.json"
        ae.save(trained, path)
        loaded = ae.load(path)
        for name in ae.PARAM_NAMES:
            np.testing.assert_array_equal(getattr(loaded, name), getattr(trained, name))
        assert loaded.loss_history == trained.loss_history
        assert loaded.config == trained.config

    def test_loaded_model_encodes_identically(self, tmp_path, small_synth):
        cfg = ae.AutoencoderConfig(input_dim=small_synth.dims, hidden_dim=6,
                                   iterations=20, seed=13)
        trained = ae.train(ae.init(cfg), small_synth)
        path = tmp_path / "model_ae.json"
        ae.save(trained, path)
        original = ae.encode(trained, small_synth)
        reloaded = ae.encode(ae.load(path), small_synth)
        np.testing.assert_array_equal(original.features, reloaded.features)
