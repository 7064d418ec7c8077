import numpy as np
import pytest

from irmrank import tensor as T
from irmrank.gradcheck import finite_diff_check, EvaluationError
from irmrank.optim import Adam, SGD
from irmrank.params import ParamStore
from irmrank.recurrent import init_lstm_params, lstm_cell, run_lstm


def make_store(**arrays):
    store = ParamStore()
    for k, v in arrays.items():
        store.create(k, v)
    return store


class TestAdam:
    def test_zero_gradient_leaves_params(self):
        store = make_store(w=np.array([1.0, -2.0]))
        opt = Adam(store, lr=0.1)
        store.zero_grad()
        before = store["w"].data.copy()
        for _ in range(5):
            opt.step()
        assert np.array_equal(store["w"].data, before)
        assert np.abs(opt.m["w"]).max() == 0.0

    def test_single_step_hand_evaluated(self):
        # g=1, lr=0.01, fresh state: bias correction gives m_hat/sqrt(v_hat)=1
        store = make_store(w=np.array([0.5]))
        opt = Adam(store, lr=0.01)
        store["w"].grad = np.array([1.0])
        opt.step()
        assert abs(store["w"].data[0] - (0.5 - 0.01)) <= 1e-9

    def test_constant_gradient_step_size_bounded(self):
        store = make_store(w=np.array([0.0]))
        opt = Adam(store, lr=0.05)
        prev = 0.0
        for _ in range(200):
            store["w"].grad = np.array([2.0])
            opt.step()
            delta = abs(store["w"].data[0] - prev)
            prev = store["w"].data[0]
            assert delta <= 0.05 * (1 + 1e-6)
        # asymptotically the step approaches lr for a constant gradient
        assert delta >= 0.05 * 0.9

    def test_step_counter(self):
        store = make_store(w=np.zeros(2))
        opt = Adam(store)
        opt.step()
        opt.step()
        assert opt.t == 2


class TestSGD:
    def test_plain_descent(self):
        store = make_store(w=np.array([1.0]))
        opt = SGD(store, lr=0.5)
        store["w"].grad = np.array([1.0])
        opt.step()
        assert store["w"].data[0] == 0.5


class TestLSTM:
    def _params(self, in_dim=3, hid=4, seed=0, std=0.2):
        store = ParamStore()
        init_lstm_params(store, "cell", in_dim, hid, np.random.default_rng(seed), std)
        return store

    def test_zero_params_give_zero_state(self):
        store = ParamStore()
        init_lstm_params(store, "cell", 3, 4, np.random.default_rng(0), std=0.0)
        h, c = lstm_cell(T.constant(np.ones(3)), T.constant(np.zeros(4)),
                         T.constant(np.zeros(4)), store, "cell")
        assert np.abs(h.data).max() == 0.0
        assert np.abs(c.data).max() == 0.0

    def test_forget_bias_limit_preserves_cell(self):
        store = self._params()
        store["cell/bf"].data = np.full(4, 50.0)
        rng = np.random.default_rng(1)
        x = T.constant(rng.standard_normal(3))
        h_prev = T.constant(rng.standard_normal(4))
        c_prev = T.constant(rng.standard_normal(4))
        h, c = lstm_cell(x, h_prev, c_prev, store, "cell")
        # closed-form gate evaluation with f ~= 1: c = c_prev + i*g
        def s(v):
            return 1 / (1 + np.exp(-v))
        i = s(store["cell/Wxi"].data @ x.data + store["cell/Whi"].data @ h_prev.data
              + store["cell/bi"].data)
        g = np.tanh(store["cell/Wxg"].data @ x.data + store["cell/Whg"].data @ h_prev.data
                    + store["cell/bg"].data)
        assert np.abs(c.data - (c_prev.data + i * g)).max() <= 1e-9

    def test_cell_deterministic(self):
        store = self._params()
        x = T.constant([0.1, -0.2, 0.3])
        h0 = T.constant(np.zeros(4))
        c0 = T.constant(np.zeros(4))
        h1, c1 = lstm_cell(x, h0, c0, store, "cell")
        h2, c2 = lstm_cell(x, h0, c0, store, "cell")
        assert np.array_equal(h1.data, h2.data)
        assert np.array_equal(c1.data, c2.data)

    def test_full_cell_vjp_vs_finite_differences(self):
        store = self._params(seed=3)
        rng = np.random.default_rng(4)
        x = rng.standard_normal(3)
        cot = rng.standard_normal(4)

        def loss_builder():
            h, c = lstm_cell(T.constant(x), T.constant(np.zeros(4)),
                             T.constant(np.zeros(4)), store, "cell")
            return T.dot(h, T.constant(cot))

        report = finite_diff_check(loss_builder, store, eps=1e-5)
        assert max(report.values()) <= 1e-4

    def test_run_lstm_empty_rejected(self):
        store = self._params()
        with pytest.raises(ValueError):
            run_lstm([], store, "cell", 4)


class TestFiniteDiffCheck:
    def test_quadratic_closed_form(self):
        store = make_store(theta=np.array([1.0, 2.0]))

        def loss_builder():
            t = store["theta"]
            return T.scale(T.dot(t, t), 0.5)

        report = finite_diff_check(loss_builder, store, eps=1e-5)
        assert max(report.values()) <= 1e-9
        assert np.abs(store["theta"].grad - [1.0, 2.0]).max() <= 1e-12

    def test_constant_loss_zero_both_ways(self):
        store = make_store(theta=np.array([1.0, -1.0]))

        def loss_builder():
            return T.scale(T.dot(store["theta"], store["theta"]), 0.0)

        report = finite_diff_check(loss_builder, store)
        assert max(report.values()) <= 1e-9

    def test_eps_bounds(self):
        store = make_store(theta=np.zeros(2))
        with pytest.raises(ValueError):
            finite_diff_check(lambda: T.dot(store["theta"], store["theta"]),
                              store, eps=0.5)

    def test_nonfinite_loss_rejected(self):
        store = make_store(theta=np.array([1e308]))

        def loss_builder():
            t = store["theta"]
            return T.mul(T.dot(t, t), T.dot(t, t))

        with pytest.raises(EvaluationError):
            finite_diff_check(loss_builder, store)

    def test_corrupted_gradient_detected(self):
        store = make_store(theta=np.array([1.0, 2.0]))

        def loss_builder():
            return T.scale(T.dot(store["theta"], store["theta"]), 0.5)

        def tweak(analytic):
            analytic["theta"] = analytic["theta"] + 1.0

        report = finite_diff_check(loss_builder, store, grad_tweak=tweak)
        assert max(report.values()) > 1e-4
