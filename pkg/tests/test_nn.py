import math

import numpy as np
import pytest

from bdrga import nn
from bdrga.dataset import Dataset, Split
from bdrga.exceptions import DimensionMismatch, EmptyBatch
from oracles import two_step_adam


def _random_state(r, n_in, n_hidden, scale=1.0):
    return nn.NetworkState(
        r.normal(scale=scale, size=(n_hidden, n_in)), r.normal(scale=scale, size=n_hidden),
        r.normal(scale=scale, size=(2, n_hidden)), r.normal(scale=scale, size=2))


def _numeric_grad(state, X, y, h=1e-6):
    out = []
    params = [p.copy() for p in state.params()]
    for i, p in enumerate(params):
        g = np.zeros_like(p)
        for idx in np.ndindex(p.shape):
            orig = p[idx]
            p[idx] = orig + h
            up = nn.loss(state.with_params(params), X, y)
            p[idx] = orig - h
            down = nn.loss(state.with_params(params), X, y)
            p[idx] = orig
            g[idx] = (up - down) / (2 * h)
        out.append(g)
    return out


class TestGradients:
    def test_central_differences_on_100_instances(self):
        r = np.random.default_rng(7)
        worst = 0.0
        for _ in range(100):
            n_in, n_hidden, m = r.integers(1, 6), r.integers(1, 6), r.integers(1, 8)
            state = _random_state(r, n_in, n_hidden)
            X = r.normal(size=(m, n_in))
            y = r.integers(0, 2, size=m)
            _, grads = nn.loss_and_gradients(state, X, y)
            a = np.concatenate([g.ravel() for g in grads.params()])
            b = np.concatenate([g.ravel() for g in _numeric_grad(state, X, y)])
            # whole-vector relative error; per-element ratios blow up on
            # near-zero components where round-off in the difference dominates
            worst = max(worst, np.linalg.norm(a - b) / max(np.linalg.norm(a) + np.linalg.norm(b), 1e-12))
        assert worst < 1e-4

    def test_loss_matches_reported_value(self, rng):
        state = _random_state(rng, 4, 3)
        X, y = rng.normal(size=(5, 4)), rng.integers(0, 2, size=5)
        value, _ = nn.loss_and_gradients(state, X, y)
        assert value == nn.loss(state, X, y)


class TestLoss:
    def test_even_odds_is_ln2(self):
        state = nn.zeros(nn.NetworkShape(3, 2, 2))
        assert nn.loss(state, np.ones((1, 3)), [1]) == pytest.approx(math.log(2), abs=1e-15)

    def test_non_negative(self, rng):
        for _ in range(50):
            state = _random_state(rng, 3, 4, scale=3.0)
            assert nn.loss(state, rng.normal(size=(6, 3)), rng.integers(0, 2, size=6)) >= 0.0

    def test_empty_batch(self):
        with pytest.raises(EmptyBatch):
            nn.loss(nn.zeros(nn.NetworkShape(3, 2, 2)), np.zeros((0, 3)), [])

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            nn.forward(nn.zeros(nn.NetworkShape(3, 2, 2)), np.zeros((2, 4)))


def _const_state(shape, value):
    z = nn.zeros(shape)
    return z.with_params([np.full_like(p, value) for p in z.params()])


class TestOptimizers:
    shape = nn.NetworkShape(2, 3, 2)

    @pytest.mark.parametrize("g", [0.5, -1.3, 1e-3])
    def test_adam_two_steps_match_oracle(self, g):
        cfg = nn.TrainConfig()
        state = _const_state(self.shape, 0.25)
        grads = _const_state(self.shape, g)
        opt = nn.AdamState.zeros_like(state)
        one = nn.adam_step(state, grads, opt, 1, cfg)
        two = nn.adam_step(one, grads, opt, 2, cfg)
        for p in one.params():
            np.testing.assert_allclose(p, two_step_adam(g, theta=0.25, steps=1), rtol=0, atol=1e-9)
        for p in two.params():
            np.testing.assert_allclose(p, two_step_adam(g, theta=0.25, steps=2), rtol=0, atol=1e-9)

    def test_adam_first_step_literal(self):
        # m_hat = g, v_hat = g^2 on the first step, so the move is lr*g/(|g|+eps)
        cfg = nn.TrainConfig()
        state = nn.zeros(self.shape)
        opt = nn.AdamState.zeros_like(state)
        out = nn.adam_step(state, _const_state(self.shape, 0.5), opt, 1, cfg)
        assert out.W1[0, 0] == pytest.approx(-0.005 / 0.50000001, abs=1e-15)

    def test_sgd_momentum_two_steps(self):
        cfg = nn.TrainConfig(optimizer="sgd", learning_rate=0.1, momentum=0.9)
        state = _const_state(self.shape, 1.0)
        grads = _const_state(self.shape, 0.2)
        vel = [np.zeros_like(p) for p in state.params()]
        one = nn.sgd_momentum_step(state, grads, vel, cfg)
        two = nn.sgd_momentum_step(one, grads, vel, cfg)
        for p in one.params():
            np.testing.assert_allclose(p, 1.0 - 0.1 * 0.2, rtol=0, atol=1e-9)
        for p in two.params():
            np.testing.assert_allclose(p, 1.0 - 0.1 * 0.2 * (2 + 0.9), rtol=0, atol=1e-9)

    def test_adam_step_index_starts_at_one(self):
        state = nn.zeros(self.shape)
        with pytest.raises(ValueError):
            nn.adam_step(state, state, nn.AdamState.zeros_like(state), 0, nn.TrainConfig())

    def test_config_validation(self):
        with pytest.raises(ValueError):
            nn.TrainConfig(learning_rate=0.0)
        with pytest.raises(ValueError):
            nn.TrainConfig(adam_beta1=1.0)


class TestErrors:
    def test_range(self, rng):
        for _ in range(50):
            state = _random_state(rng, 3, 4, scale=5.0)
            e = nn.per_pattern_errors(state, rng.normal(size=(20, 3)), rng.integers(0, 2, size=20)).errors
            assert np.all((e >= 0) & (e <= 1))

    def test_confident_right_and_wrong(self):
        state = nn.zeros(nn.NetworkShape(1, 1, 2))
        state = state.with_params([np.zeros((1, 1)), np.zeros(1), np.zeros((2, 1)), np.array([0.0, 8.0])])
        e = nn.per_pattern_errors(state, np.zeros((2, 1)), [1, 0]).errors
        s = 1.0 / (1.0 + math.exp(-8.0))
        assert e[0] == pytest.approx(1.0 - s) and e[1] == pytest.approx(s)

    def test_tie_goes_to_lowest_index(self):
        state = nn.zeros(nn.NetworkShape(2, 2, 2))
        assert list(nn.predict(state, np.ones((3, 2)))) == [0, 0, 0]


def _toy_dataset(r, n=60):
    X = r.normal(size=(n, 4))
    y = (X[:, 0] + 0.5 * X[:, 1] > 0).astype(np.int64)
    return Dataset(X, y, tuple("abcd"))


class TestTraining:
    def test_deterministic(self, rng):
        ds = _toy_dataset(rng)
        sp = Split(np.arange(40), np.arange(40, 60), 0)
        cfg = nn.TrainConfig(epochs=30, hidden_units=5)
        a, b = nn.train(ds, sp, cfg, 11), nn.train(ds, sp, cfg, 11)
        for p, q in zip(a.state.params(), b.state.params()):
            np.testing.assert_array_equal(p, q)
        assert a.train_loss == b.train_loss

    def test_loss_decreases_and_state_finite(self, rng):
        ds = _toy_dataset(rng)
        sp = Split(np.arange(40), np.arange(40, 60), 0)
        res = nn.train(ds, sp, nn.TrainConfig(epochs=200, hidden_units=6), 2)
        assert res.train_loss[-1] < res.train_loss[0]
        assert res.state.is_finite()
        assert len(res.train_loss) == len(res.test_loss) == 200
        assert 0.0 <= nn.evaluate_accuracy(res.state, ds.features, ds.labels) <= 1.0

    def test_sgd_trains(self, rng):
        ds = _toy_dataset(rng)
        sp = Split(np.arange(40), np.arange(40, 60), 0)
        res = nn.train(ds, sp, nn.TrainConfig(epochs=200, hidden_units=6, optimizer="sgd",
                                              learning_rate=0.5), 2)
        assert res.train_loss[-1] < res.train_loss[0]

    def test_hook_can_shrink_training_set(self, rng):
        ds = _toy_dataset(rng)
        sp = Split(np.arange(40), np.arange(40, 60), 0)
        seen = []

        def hook(epoch, state, retained):
            seen.append(len(retained))
            return retained[:-1] if epoch == 2 else None

        res = nn.train(ds, sp, nn.TrainConfig(epochs=4, hidden_units=3), 0, hooks=[hook])
        assert seen == [40, 40, 39, 39]
        assert len(res.retained) == 39

    def test_init_bounds(self):
        st = nn.init(nn.NetworkShape(30, 40, 2), 5)
        assert np.abs(st.W1).max() <= 1 / math.sqrt(30)
        assert np.abs(st.W2).max() <= 1 / math.sqrt(40)
        assert not st.b1.any() and not st.b2.any()
