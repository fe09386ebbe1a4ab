"""Single-hidden-layer autoencoder trained with RMSProp on MSE.

The encoder and decoder are plain affine maps, optionally followed by an
elementwise sigmoid. The default is the identity activation, which makes
the model a learned linear projection pair; the hidden layer can be
narrower than the input (compression) or wider (feature ascent). Labels
are ignored during training; the hidden activations become the feature
representation handed to the classifier.
"""

from __future__ import annotations

import copy
import enum
import json
from dataclasses import dataclass, field

import numpy as np

from .data import Dataset
from .errors import ConfigError, DimensionError, DivergenceError
from .seeding import derive_seed


class Activation(enum.Enum):
    IDENTITY = "identity"
    SIGMOID = "sigmoid"

    @classmethod
    def parse(cls, name: str) -> "Activation":
        try:
            return cls(name.lower())
        except ValueError:
            raise ConfigError(f"unknown activation {name!r}") from None


@dataclass(frozen=True)
class AutoencoderConfig:
    input_dim: int
    hidden_dim: int
    learning_rate: float = 0.01
    rmsprop_decay: float = 0.9
    rmsprop_epsilon: float = 1e-8
    iterations: int = 200
    batch_size: int | None = None  # None trains full-batch
    activation: Activation = Activation.IDENTITY
    seed: int = 0

    def __post_init__(self):
        if self.input_dim < 1:
            raise ConfigError(f"input_dim must be positive, got {self.input_dim}")
        if self.hidden_dim < 1:
            raise ConfigError(f"hidden_dim must be positive, got {self.hidden_dim}")
        if self.iterations < 1:
            raise ConfigError(f"iterations must be positive, got {self.iterations}")
        if self.batch_size is not None and self.batch_size < 1:
            raise ConfigError(f"batch_size must be positive, got {self.batch_size}")
        if self.learning_rate <= 0:
            raise ConfigError("learning_rate must be > 0")
        if not 0.0 < self.rmsprop_decay < 1.0:
            raise ConfigError("rmsprop_decay must lie in (0, 1)")
        if self.rmsprop_epsilon <= 0:
            raise ConfigError("rmsprop_epsilon must be > 0")

    def to_dict(self) -> dict:
        return {
            "input_dim": self.input_dim,
            "hidden_dim": self.hidden_dim,
            "learning_rate": self.learning_rate,
            "rmsprop_decay": self.rmsprop_decay,
            "rmsprop_epsilon": self.rmsprop_epsilon,
            "iterations": self.iterations,
            "batch_size": self.batch_size,
            "activation": self.activation.value,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "AutoencoderConfig":
        payload = dict(payload)
        payload["activation"] = Activation.parse(payload.get("activation", "identity"))
        return cls(**payload)


PARAM_NAMES = ("encoder_weight", "encoder_bias", "decoder_weight", "decoder_bias")


@dataclass
class AutoencoderModel:
    """Parameters plus RMSProp caches and the recorded training loss curve."""

    config: AutoencoderConfig
    encoder_weight: np.ndarray  # (hidden, input)
    encoder_bias: np.ndarray    # (hidden,)
    decoder_weight: np.ndarray  # (input, hidden)
    decoder_bias: np.ndarray    # (input,)
    caches: dict = field(default_factory=dict)
    loss_history: list = field(default_factory=list)

    def params(self) -> dict:
        return {name: getattr(self, name) for name in PARAM_NAMES}


def init(config: AutoencoderConfig) -> AutoencoderModel:
    """Fresh model with uniform Glorot-range weights and zero biases/caches."""
    rng = np.random.Generator(np.random.PCG64(derive_seed(config.seed, "ae-init")))
    bound = np.sqrt(6.0 / (config.input_dim + config.hidden_dim))
    return AutoencoderModel(
        config=config,
        encoder_weight=rng.uniform(-bound, bound, (config.hidden_dim, config.input_dim)),
        encoder_bias=np.zeros(config.hidden_dim),
        decoder_weight=rng.uniform(-bound, bound, (config.input_dim, config.hidden_dim)),
        decoder_bias=np.zeros(config.input_dim),
        caches={name: None for name in PARAM_NAMES},
    )


def _activate(z: np.ndarray, activation: Activation) -> np.ndarray:
    if activation is Activation.IDENTITY:
        return z
    return 1.0 / (1.0 + np.exp(-z))


def _forward_batch(model: AutoencoderModel, x: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    act = model.config.activation
    pre_hidden = x @ model.encoder_weight.T + model.encoder_bias
    hidden = _activate(pre_hidden, act)
    pre_out = hidden @ model.decoder_weight.T + model.decoder_bias
    out = _activate(pre_out, act)
    return pre_hidden, hidden, pre_out, out


def forward(model: AutoencoderModel, x) -> tuple[np.ndarray, np.ndarray]:
    """Encode then decode one vector; returns (hidden, reconstruction)."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (model.config.input_dim,):
        raise DimensionError(f"expected vector of length {model.config.input_dim}, got {x.shape}")
    _, hidden, _, out = _forward_batch(model, x[None, :])
    return hidden[0], out[0]


def mse(x, reconstruction) -> float:
    """Mean squared error across dimensions of one vector pair."""
    x = np.asarray(x, dtype=np.float64)
    reconstruction = np.asarray(reconstruction, dtype=np.float64)
    if x.shape != reconstruction.shape:
        raise DimensionError(f"shape mismatch {x.shape} vs {reconstruction.shape}")
    diff = reconstruction - x
    return float(np.mean(diff * diff))


def batch_loss_and_gradients(model: AutoencoderModel, x: np.ndarray) -> tuple[float, dict]:
    """Reconstruction MSE of a batch and its gradient for every parameter.

    The loss averages over both batch rows and feature dimensions, so
    gradient scale does not depend on the batch size.
    """
    act = model.config.activation
    n, d = x.shape
    pre_hidden, hidden, pre_out, out = _forward_batch(model, x)
    diff = out - x
    loss = float(np.mean(diff * diff))

    d_out = 2.0 * diff / (n * d)
    d_pre_out = d_out if act is Activation.IDENTITY else d_out * out * (1.0 - out)
    grad_decoder_weight = d_pre_out.T @ hidden
    grad_decoder_bias = d_pre_out.sum(axis=0)
    d_hidden = d_pre_out @ model.decoder_weight
    d_pre_hidden = d_hidden if act is Activation.IDENTITY else d_hidden * hidden * (1.0 - hidden)
    grad_encoder_weight = d_pre_hidden.T @ x
    grad_encoder_bias = d_pre_hidden.sum(axis=0)
    return loss, {
        "encoder_weight": grad_encoder_weight,
        "encoder_bias": grad_encoder_bias,
        "decoder_weight": grad_decoder_weight,
        "decoder_bias": grad_decoder_bias,
    }


def rmsprop_step(param: np.ndarray, grad: np.ndarray, cache: np.ndarray | None,
                 learning_rate: float, decay: float, epsilon: float) -> tuple[np.ndarray, np.ndarray]:
    """One RMSProp update; returns (new_param, new_cache)."""
    if cache is None:
        cache = np.zeros_like(param)
    cache = decay * cache + (1.0 - decay) * grad * grad
    param = param - learning_rate * grad / (np.sqrt(cache) + epsilon)
    return param, cache


def train(model: AutoencoderModel, data: Dataset) -> AutoencoderModel:
    """Train a copy of ``model`` on the dataset's features; labels are ignored.

    Every iteration draws one seeded batch (or the full data), backpropagates
    the reconstruction MSE, and applies RMSProp. The pre-update batch loss is
    appended to the returned model's loss history.
    """
    cfg = model.config
    if data.dims != cfg.input_dim:
        raise DimensionError(f"dataset has {data.dims} columns, model expects {cfg.input_dim}")
    x_all = data.features
    n = x_all.shape[0]
    trained = copy.deepcopy(model)
    batch_rng = np.random.Generator(np.random.PCG64(derive_seed(cfg.seed, "ae-batches")))
    full_batch = cfg.batch_size is None or cfg.batch_size >= n

    for iteration in range(cfg.iterations):
        if full_batch:
            batch = x_all
        else:
            idx = batch_rng.choice(n, size=cfg.batch_size, replace=False)
            batch = x_all[idx]
        loss, grads = batch_loss_and_gradients(trained, batch)
        if not np.isfinite(loss):
            raise DivergenceError(f"non-finite training loss at iteration {iteration}")
        for name in PARAM_NAMES:
            new_param, new_cache = rmsprop_step(
                getattr(trained, name), grads[name], trained.caches[name],
                cfg.learning_rate, cfg.rmsprop_decay, cfg.rmsprop_epsilon,
            )
            if not np.all(np.isfinite(new_param)):
                raise DivergenceError(f"non-finite {name} at iteration {iteration}")
            setattr(trained, name, new_param)
            trained.caches[name] = new_cache
        trained.loss_history.append(loss)
    return trained


def encode(model: AutoencoderModel, ds: Dataset) -> Dataset:
    """Replace every sample by its hidden-layer activation vector."""
    if ds.dims != model.config.input_dim:
        raise DimensionError(f"dataset has {ds.dims} columns, model expects {model.config.input_dim}")
    _, hidden, _, _ = _forward_batch(model, ds.features)
    return ds.with_features(hidden)


def save(model: AutoencoderModel, path) -> None:
    payload = {
        "schema": "eegboost-autoencoder/1",
        "config": model.config.to_dict(),
        "parameters": {name: getattr(model, name).tolist() for name in PARAM_NAMES},
        "loss_history": [float(v) for v in model.loss_history],
    }
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(payload, handle, sort_keys=True, indent=2)
        handle.write("\n")


def load(path) -> AutoencoderModel:
    with open(path, "r", encoding="utf-8") as handle:
        payload = json.load(handle)
    config = AutoencoderConfig.from_dict(payload["config"])
    params = {
        name: np.asarray(payload["parameters"][name], dtype=np.float64)
        for name in PARAM_NAMES
    }
    return AutoencoderModel(
        config=config,
        caches={name: None for name in PARAM_NAMES},
        loss_history=[float(v) for v in payload["loss_history"]],
        **params,
    )
