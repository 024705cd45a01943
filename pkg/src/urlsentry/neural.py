"""Dense feedforward networks: forward pass, backprop, mini-batch SGD.

One set of machinery serves both the binary MLP classifier (sigmoid head,
binary cross-entropy) and the autoencoder (identity head, mean squared
error). Training is plain mini-batch gradient descent, single-threaded,
and fully determined by (data, config, seed).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatch,
    EmptyMatrix,
    LatentTooLarge,
    SingleClassTrainingSet,
)
from .pipeline import Dataset

PROB_EPS = 1e-12  # keeps probabilities strictly inside (0, 1) and logs finite


@dataclass
class LayerParams:
    weights: np.ndarray  # d_out x d_in
    biases: np.ndarray  # d_out
    activation: str  # sigmoid | relu | identity


@dataclass
class MlpModel:
    layers: list[LayerParams]


@dataclass
class AutoencoderModel:
    encoder_layers: list[LayerParams]
    decoder_layers: list[LayerParams]
    latent_dim: int

    @property
    def layers(self) -> list[LayerParams]:
        return self.encoder_layers + self.decoder_layers


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 50
    batch_size: int = 32
    learning_rate: float = 0.05
    hidden_sizes: tuple[int, ...] = (32,)
    seed: int = 0


DEFAULT_AUTOENCODER_CONFIG = TrainConfig(
    epochs=30, batch_size=32, learning_rate=0.05, hidden_sizes=(8,), seed=0
)


def sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z, dtype=np.float64)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _activate(z: np.ndarray, kind: str) -> np.ndarray:
    if kind == "sigmoid":
        return sigmoid(z)
    if kind == "relu":
        return np.maximum(z, 0.0)
    if kind == "identity":
        return z
    raise ValueError(f"unknown activation {kind!r}")


def _activation_grad(z: np.ndarray, a: np.ndarray, kind: str) -> np.ndarray:
    if kind == "sigmoid":
        return a * (1.0 - a)
    if kind == "relu":
        return (z > 0).astype(np.float64)
    if kind == "identity":
        return np.ones_like(z)
    raise ValueError(f"unknown activation {kind!r}")


def forward(model, x: np.ndarray):
    """Run a batch (or single vector) through the network.

    Returns (output, cache); the cache holds per-layer pre-activations and
    activations so gradients() can reuse them.
    """
    X = np.atleast_2d(np.asarray(x, dtype=np.float64))
    layers = model.layers
    if X.shape[1] != layers[0].weights.shape[1]:
        raise DimensionMismatch(
            f"input width {X.shape[1]} != first-layer width {layers[0].weights.shape[1]}"
        )
    activations = [X]
    pre_acts = []
    a = X
    for layer in layers:
        z = a @ layer.weights.T + layer.biases
        a = _activate(z, layer.activation)
        pre_acts.append(z)
        activations.append(a)
    out = a if np.asarray(x).ndim > 1 else a[0]
    return out, {"pre": pre_acts, "act": activations}


def bce_loss(probs: np.ndarray, targets: np.ndarray) -> float:
    p = np.clip(probs, PROB_EPS, 1.0 - PROB_EPS)
    t = targets
    return float(-np.mean(t * np.log(p) + (1.0 - t) * np.log(1.0 - p)))


def mse_loss(outputs: np.ndarray, targets: np.ndarray) -> float:
    return float(np.mean((outputs - targets) ** 2))


def gradients(model, batch_x: np.ndarray, batch_target: np.ndarray, loss: str):
    """Backprop gradients of the mean batch loss for every weight and bias.

    loss is "bce" (sigmoid head) or "mse". Returns a list of (dW, db) pairs
    aligned with model.layers.
    """
    X = np.atleast_2d(np.asarray(batch_x, dtype=np.float64))
    T = np.atleast_2d(np.asarray(batch_target, dtype=np.float64))
    layers = model.layers
    out, cache = forward(model, X)
    n = X.shape[0]

    if loss == "bce":
        # sigmoid + BCE: gradient at the pre-activation is (p - t) / n
        delta = (cache["act"][-1] - T) / n
    elif loss == "mse":
        d_out = (2.0 / (n * T.shape[1])) * (cache["act"][-1] - T)
        delta = d_out * _activation_grad(
            cache["pre"][-1], cache["act"][-1], layers[-1].activation
        )
    else:
        raise ValueError(f"unknown loss {loss!r}")

    grads: list[tuple[np.ndarray, np.ndarray]] = [None] * len(layers)
    for i in range(len(layers) - 1, -1, -1):
        a_prev = cache["act"][i]  # cache["act"][0] is the input batch
        grads[i] = (delta.T @ a_prev, delta.sum(axis=0))
        if i > 0:
            delta = (delta @ layers[i].weights) * _activation_grad(
                cache["pre"][i - 1], cache["act"][i], layers[i - 1].activation
            )
    return grads


def _init_layer(rng: np.random.Generator, d_in: int, d_out: int, activation: str) -> LayerParams:
    # fan-based uniform init keeps early activations in a sane range
    bound = np.sqrt(6.0 / (d_in + d_out))
    weights = rng.uniform(-bound, bound, size=(d_out, d_in))
    return LayerParams(weights=weights, biases=np.zeros(d_out), activation=activation)


def _sgd(model, X: np.ndarray, T: np.ndarray, cfg: TrainConfig, loss: str,
         rng: np.random.Generator) -> None:
    n = X.shape[0]
    batch = min(cfg.batch_size, n)
    layers = model.layers
    for _ in range(cfg.epochs):
        order = rng.permutation(n)
        for start in range(0, n, batch):
            idx = order[start:start + batch]
            grads = gradients(model, X[idx], T[idx], loss)
            for layer, (dw, db) in zip(layers, grads):
                layer.weights -= cfg.learning_rate * dw
                layer.biases -= cfg.learning_rate * db


def train_mlp(train: Dataset, cfg: TrainConfig | None = None) -> MlpModel:
    """Train the binary MLP classifier; deterministic given cfg.seed."""
    if cfg is None:
        cfg = TrainConfig()
    X = np.asarray(train.features, dtype=np.float64)
    y = np.asarray(train.labels, dtype=np.float64).reshape(-1, 1)
    if X.shape[0] == 0:
        raise EmptyMatrix("training set is empty")
    if len(np.unique(train.labels)) < 2:
        raise SingleClassTrainingSet("MLP training needs both classes")

    rng = np.random.default_rng(cfg.seed)
    sizes = [X.shape[1], *cfg.hidden_sizes, 1]
    layers = []
    for i in range(len(sizes) - 1):
        activation = "sigmoid" if i == len(sizes) - 2 else "relu"
        layers.append(_init_layer(rng, sizes[i], sizes[i + 1], activation))
    model = MlpModel(layers=layers)
    _sgd(model, X, y, cfg, "bce", rng)
    return model


def predict_proba_mlp(model: MlpModel, x: np.ndarray) -> float:
    """Probability the input is malicious, strictly inside (0, 1)."""
    out, _ = forward(model, x)
    return float(np.clip(out[0] if out.ndim else out, PROB_EPS, 1.0 - PROB_EPS))


def predict_proba_mlp_batch(model: MlpModel, X: np.ndarray) -> np.ndarray:
    out, _ = forward(model, np.atleast_2d(X))
    return np.clip(out[:, 0], PROB_EPS, 1.0 - PROB_EPS)


def train_autoencoder(
    train_features: np.ndarray, cfg: TrainConfig | None = None
) -> AutoencoderModel:
    """Train a reconstruction autoencoder with MSE loss.

    cfg.hidden_sizes describes the encoder stack; its last entry is the
    latent width. Hidden layers are sigmoid, the output layer identity.
    """
    if cfg is None:
        cfg = DEFAULT_AUTOENCODER_CONFIG
    X = np.asarray(train_features, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] == 0:
        raise EmptyMatrix("autoencoder training needs a non-empty matrix")
    d = X.shape[1]
    latent_dim = cfg.hidden_sizes[-1]
    if latent_dim > d:
        raise LatentTooLarge(f"latent width {latent_dim} exceeds input width {d}")

    rng = np.random.default_rng(cfg.seed)
    enc_sizes = [d, *cfg.hidden_sizes]
    dec_sizes = [*cfg.hidden_sizes[::-1], d]
    encoder = [
        _init_layer(rng, enc_sizes[i], enc_sizes[i + 1], "sigmoid")
        for i in range(len(enc_sizes) - 1)
    ]
    decoder = []
    for i in range(len(dec_sizes) - 1):
        activation = "identity" if i == len(dec_sizes) - 2 else "sigmoid"
        decoder.append(_init_layer(rng, dec_sizes[i], dec_sizes[i + 1], activation))
    model = AutoencoderModel(encoder_layers=encoder, decoder_layers=decoder,
                             latent_dim=latent_dim)
    _sgd(model, X, X, cfg, "mse", rng)
    return model


def reconstruction_mse(model: AutoencoderModel, X: np.ndarray) -> float:
    out, _ = forward(model, np.atleast_2d(X))
    return mse_loss(out, np.atleast_2d(X))


def encode(model: AutoencoderModel, x: np.ndarray) -> np.ndarray:
    """Map input(s) to the latent representation."""
    X = np.atleast_2d(np.asarray(x, dtype=np.float64))
    if X.shape[1] != model.encoder_layers[0].weights.shape[1]:
        raise DimensionMismatch(
            f"input width {X.shape[1]} != encoder width "
            f"{model.encoder_layers[0].weights.shape[1]}"
        )
    a = X
    for layer in model.encoder_layers:
        a = _activate(a @ layer.weights.T + layer.biases, layer.activation)
    return a if np.asarray(x).ndim > 1 else a[0]
