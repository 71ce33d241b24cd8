"""Three-layer sigmoid MLP with softmax cross-entropy, trained full-batch.

Parameters live in a :class:`NetworkState`; gradients come back in the same
container so optimizer steps can walk both in lockstep.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .exceptions import DimensionMismatch, EmptyBatch

PARAM_NAMES = ("W1", "b1", "W2", "b2")


class Optimizer(str, enum.Enum):
    ADAM = "adam"
    SGD_MOMENTUM = "sgd"


@dataclass(frozen=True)
class NetworkShape:
    n_in: int = 30
    n_hidden: int = 40
    n_out: int = 2

    def __post_init__(self):
        if min(self.n_in, self.n_hidden, self.n_out) < 1:
            raise ValueError(f"all layer sizes must be >= 1, got {self}")


@dataclass(eq=False)
class NetworkState:
    W1: np.ndarray
    b1: np.ndarray
    W2: np.ndarray
    b2: np.ndarray
    rng_seed: int | None = None

    @property
    def shape(self) -> NetworkShape:
        return NetworkShape(self.W1.shape[1], self.W1.shape[0], self.W2.shape[0])

    def params(self):
        return [self.W1, self.b1, self.W2, self.b2]

    def with_params(self, params) -> "NetworkState":
        return NetworkState(*params, rng_seed=self.rng_seed)

    def copy(self) -> "NetworkState":
        return self.with_params([p.copy() for p in self.params()])

    def is_finite(self):
        return all(np.all(np.isfinite(p)) for p in self.params())


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 400
    learning_rate: float = 0.01
    optimizer: Optimizer = Optimizer.ADAM
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    momentum: float = 0.9
    hidden_units: int = 40

    def __post_init__(self):
        if self.epochs < 0:
            raise ValueError("epochs must be non-negative")
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be positive")
        if not (0 <= self.adam_beta1 < 1 and 0 <= self.adam_beta2 < 1):
            raise ValueError("Adam betas must lie in [0, 1)")
        if self.hidden_units < 1:
            raise ValueError("hidden_units must be >= 1")
        object.__setattr__(self, "optimizer", Optimizer(self.optimizer))


@dataclass(eq=False)
class AdamState:
    m: list
    v: list

    @classmethod
    def zeros_like(cls, state: NetworkState):
        return cls([np.zeros_like(p) for p in state.params()],
                   [np.zeros_like(p) for p in state.params()])


@dataclass(frozen=True, eq=False)
class ErrorDistribution:
    errors: np.ndarray
    epoch: int = 0

    def __len__(self):
        return len(self.errors)


@dataclass(eq=False)
class TrainResult:
    state: NetworkState
    train_loss: list = field(default_factory=list)
    test_loss: list = field(default_factory=list)
    retained: np.ndarray | None = None


def sigmoid(z):
    # split by sign so exp never overflows
    out = np.empty_like(z, dtype=float)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def init(shape: NetworkShape, seed: int) -> NetworkState:
    """Weights uniform in +-1/sqrt(fan_in), biases zero."""
    rng = np.random.default_rng(seed)
    a1 = 1.0 / np.sqrt(shape.n_in)
    a2 = 1.0 / np.sqrt(shape.n_hidden)
    return NetworkState(
        W1=rng.uniform(-a1, a1, size=(shape.n_hidden, shape.n_in)),
        b1=np.zeros(shape.n_hidden),
        W2=rng.uniform(-a2, a2, size=(shape.n_out, shape.n_hidden)),
        b2=np.zeros(shape.n_out),
        rng_seed=seed,
    )


def zeros(shape: NetworkShape) -> NetworkState:
    return NetworkState(np.zeros((shape.n_hidden, shape.n_in)), np.zeros(shape.n_hidden),
                        np.zeros((shape.n_out, shape.n_hidden)), np.zeros(shape.n_out))


def forward(state: NetworkState, x):
    """Return ``(hidden, logits)``; accepts one pattern or a batch of rows."""
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != state.W1.shape[1]:
        raise DimensionMismatch(
            f"input has {x.shape[-1]} features, network expects {state.W1.shape[1]}")
    hidden = sigmoid(x @ state.W1.T + state.b1)
    logits = hidden @ state.W2.T + state.b2
    return hidden, logits


def _log_softmax(z):
    z = z - z.max(axis=1, keepdims=True)
    return z - np.log(np.exp(z).sum(axis=1, keepdims=True))


def _check_batch(X, y):
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=np.int64).reshape(-1)
    if X.shape[0] == 0:
        raise EmptyBatch("batch has no rows")
    if X.shape[0] != y.shape[0]:
        raise DimensionMismatch(f"{X.shape[0]} rows but {y.shape[0]} labels")
    return X, y


def loss(state: NetworkState, X, y) -> float:
    X, y = _check_batch(X, y)
    _, logits = forward(state, X)
    return float(-_log_softmax(logits)[np.arange(len(y)), y].mean())


def loss_and_gradients(state: NetworkState, X, y):
    """Mean softmax cross-entropy over the batch and its backprop gradients."""
    X, y = _check_batch(X, y)
    m = len(y)
    hidden, logits = forward(state, X)
    logp = _log_softmax(logits)
    value = float(-logp[np.arange(m), y].mean())

    dz = np.exp(logp)
    dz[np.arange(m), y] -= 1.0
    dz /= m
    gW2 = dz.T @ hidden
    gb2 = dz.sum(axis=0)
    dh = (dz @ state.W2) * hidden * (1.0 - hidden)
    gW1 = dh.T @ X
    gb1 = dh.sum(axis=0)
    return value, NetworkState(gW1, gb1, gW2, gb2)


def adam_step(state, grads, adam_state: AdamState, t: int, cfg: TrainConfig) -> NetworkState:
    """One bias-corrected Adam update. ``adam_state`` moments are updated in place."""
    if t < 1:
        raise ValueError("Adam step index starts at 1")
    b1, b2 = cfg.adam_beta1, cfg.adam_beta2
    bc1 = 1.0 - b1 ** t
    bc2 = 1.0 - b2 ** t
    new = []
    for i, (p, g) in enumerate(zip(state.params(), grads.params())):
        adam_state.m[i] = b1 * adam_state.m[i] + (1.0 - b1) * g
        adam_state.v[i] = b2 * adam_state.v[i] + (1.0 - b2) * (g * g)
        m_hat = adam_state.m[i] / bc1
        v_hat = adam_state.v[i] / bc2
        new.append(p - cfg.learning_rate * m_hat / (np.sqrt(v_hat) + cfg.adam_eps))
    return state.with_params(new)


def sgd_momentum_step(state, grads, velocity, cfg: TrainConfig) -> NetworkState:
    """v <- mu*v - lr*g; theta <- theta + v. ``velocity`` is updated in place."""
    new = []
    for i, (p, g) in enumerate(zip(state.params(), grads.params())):
        if velocity[i].shape != p.shape:
            raise DimensionMismatch("velocity shape does not match parameters")
        velocity[i] = cfg.momentum * velocity[i] - cfg.learning_rate * g
        new.append(p + velocity[i])
    return state.with_params(new)


def per_pattern_errors(state: NetworkState, X, y, epoch: int = 0) -> ErrorDistribution:
    """Distance between the winning unit's sigmoid output and its one-hot target bit."""
    X, y = _check_batch(X, y)
    _, logits = forward(state, X)
    rows = np.arange(len(y))
    winner = np.argmax(logits, axis=1)
    out = sigmoid(logits[rows, winner])
    target = (winner == y).astype(float)
    return ErrorDistribution(np.abs(target - out), epoch)


def predict(state: NetworkState, X):
    """Class index per row; ties go to the lowest index."""
    _, logits = forward(state, np.atleast_2d(X))
    return np.argmax(logits, axis=1)


def evaluate_accuracy(state: NetworkState, X, y) -> float:
    X, y = _check_batch(X, y)
    return float(np.mean(predict(state, X) == y))


def train(ds, split, cfg: TrainConfig, seed: int, hooks=(), initial_state=None) -> TrainResult:
    """Full-batch training, one optimizer step per epoch.

    Each hook is called as ``hook(epoch, state, retained)`` after that
    epoch's update, where ``retained`` holds the dataset row indices still
    used for training. A hook may return a new index array to shrink the
    training set for the following epochs, or None to leave it alone.
    """
    shape = NetworkShape(ds.n_features, cfg.hidden_units, 2)
    state = initial_state if initial_state is not None else init(shape, seed)
    retained = np.asarray(split.train_indices, dtype=int)
    result = TrainResult(state, retained=retained)
    if cfg.epochs == 0:
        return result

    X, y = ds.features, ds.labels
    X_test, y_test = X[split.test_indices], y[split.test_indices]
    has_test = len(split.test_indices) > 0
    if cfg.optimizer is Optimizer.ADAM:
        opt_state = AdamState.zeros_like(state)
    else:
        opt_state = [np.zeros_like(p) for p in state.params()]

    for epoch in range(1, cfg.epochs + 1):
        value, grads = loss_and_gradients(state, X[retained], y[retained])
        result.train_loss.append(value)
        if has_test:
            result.test_loss.append(loss(state, X_test, y_test))
        if cfg.optimizer is Optimizer.ADAM:
            state = adam_step(state, grads, opt_state, epoch, cfg)
        else:
            state = sgd_momentum_step(state, grads, opt_state, cfg)
        for hook in hooks:
            update = hook(epoch, state, retained)
            if update is not None:
                retained = np.asarray(update, dtype=int)

    result.state = state
    result.retained = retained
    return result
