import numpy as np
import pytest

from irmrank import ranking as R
from irmrank import tensor as T
from irmrank.params import ParamStore


def make_store(n_users=5, d=4, attn_dim=3, seed=0, std=0.1):
    store = ParamStore()
    R.init_ranking_params(store, n_users, d, attn_dim, np.random.default_rng(seed), std)
    return store


class TestMargin:
    def test_bounds(self):
        R.Margin(0.3)
        with pytest.raises(ValueError):
            R.Margin(0.0)
        with pytest.raises(ValueError):
            R.Margin(1.0)
        with pytest.raises(ValueError):
            R.Margin(-0.5)


class TestPersonalScore:
    def test_dot_oracle(self):
        store = make_store()
        z = np.array([1.0, 0.0, 2.0, -1.0])
        f = R.personal_score(R.user_pref(store, 2), T.constant(z))
        assert abs(f.item() - store["pref/r"].data[2] @ z) <= 1e-12

    def test_gradient_hits_one_row_only(self):
        store = make_store()
        z = T.constant(np.ones(4))
        f = R.personal_score(R.user_pref(store, 1), z)
        T.backward(f)
        g = store["pref/r"].grad
        assert np.array_equal(g[1], np.ones(4))
        assert np.abs(np.delete(g, 1, axis=0)).max() == 0


class TestSocialAttention:
    def test_empty_neighborhood(self):
        store = make_store()
        alpha, rt = R.social_attention(R.user_pref(store, 0), [], store)
        assert alpha is None and rt is None
        h = R.social_influence(rt, T.constant(np.ones(4)))
        assert h.item() == 1.0

    def test_single_neighbor_full_weight(self):
        store = make_store()
        alpha, rt = R.social_attention(R.user_pref(store, 0), [3], store)
        assert alpha.data.shape == (1,) and alpha.data[0] == 1.0
        assert np.abs(rt.data - store["pref/r"].data[3]).max() <= 1e-12

    def test_matches_formula_oracle(self):
        store = make_store(seed=2)
        r = store["pref/r"].data
        Ws, Wn = store["social/Ws"].data, store["social/Wn"].data
        p, b = store["social/p"].data, store["social/b"].data
        nbrs = [1, 2, 4]
        alpha, rt = R.social_attention(R.user_pref(store, 0), nbrs, store)
        s = np.array([p @ np.tanh(Ws @ r[0] + Wn @ r[q] + b) for q in nbrs])
        e = np.exp(s - s.max())
        a = e / e.sum()
        assert np.abs(alpha.data - a).max() <= 1e-10
        assert np.abs(rt.data - a @ r[nbrs]).max() <= 1e-10

    def test_order_invariant(self):
        store = make_store(seed=3)
        rj = R.user_pref(store, 0)
        _, rt1 = R.social_attention(rj, [3, 1, 2], store)
        _, rt2 = R.social_attention(rj, [2, 3, 1], store)
        assert np.array_equal(rt1.data, rt2.data)


class TestMultifacetedScore:
    def test_product_structure(self):
        store = make_store(seed=4)
        z = T.constant(np.random.default_rng(0).standard_normal(4))
        F = R.multifaceted_score(0, [1, 2], z, store)
        rj = R.user_pref(store, 0)
        f = R.personal_score(rj, z)
        _, rt = R.social_attention(rj, [1, 2], store)
        h = R.social_influence(rt, z)
        assert abs(F.item() - f.item() * h.item()) <= 1e-12

    def test_hfunc_drops_social(self):
        store = make_store(seed=5)
        z = T.constant(np.random.default_rng(1).standard_normal(4))
        F = R.multifaceted_score(0, [1, 2], z, store, variant="amnl_hfunc")
        f = R.personal_score(R.user_pref(store, 0), z)
        assert F.item() == f.item()

    def test_no_neighbors_reduces_to_personal(self):
        store = make_store(seed=6)
        z = T.constant(np.random.default_rng(2).standard_normal(4))
        F = R.multifaceted_score(0, [], z, store)
        f = R.personal_score(R.user_pref(store, 0), z)
        assert abs(F.item() - f.item()) <= 1e-12

    def test_quadratic_scaling_in_z(self):
        # F(alpha z) = alpha^2 F(z): both facets are linear in z
        store = make_store(seed=7)
        rng = np.random.default_rng(3)
        for alpha in (0.5, 2.0, 10.0):
            z = rng.standard_normal(4)
            F1 = R.multifaceted_score(0, [1, 3], T.constant(z), store).item()
            Fa = R.multifaceted_score(0, [1, 3], T.constant(alpha * z), store).item()
            assert abs(Fa - alpha * alpha * F1) <= 1e-9 * max(abs(Fa), 1.0)

    def test_hfunc_zero_social_gradients(self):
        store = make_store(seed=8)
        z = T.constant(np.random.default_rng(4).standard_normal(4))
        F = R.multifaceted_score(0, [1, 2], z, store, variant="amnl_hfunc")
        T.backward(F)
        for name in ("social/Ws", "social/Wn", "social/p", "social/b"):
            assert store[name].grad is None or np.abs(store[name].grad).max() == 0


class TestHingeLoss:
    def test_zero_when_margin_satisfied(self):
        loss = R.hinge_loss(T.constant(2.0), T.constant(1.0), R.Margin(0.3))
        assert loss.item() == 0.0

    def test_linear_region_value(self):
        loss = R.hinge_loss(T.constant(0.1), T.constant(0.3), R.Margin(0.3))
        assert abs(loss.item() - 0.5) <= 1e-12

    def test_gradient_signs_in_active_region(self):
        Fp = T.parameter(np.asarray(0.0))
        Fn = T.parameter(np.asarray(0.0))
        loss = R.hinge_loss(Fp, Fn, R.Margin(0.3))
        T.backward(loss)
        assert Fp.grad == -1.0 and Fn.grad == 1.0

    def test_zero_gradient_when_inactive(self):
        Fp = T.parameter(np.asarray(5.0))
        Fn = T.parameter(np.asarray(0.0))
        loss = R.hinge_loss(Fp, Fn, R.Margin(0.3))
        T.backward(loss)
        assert loss.item() == 0.0
        assert (Fp.grad or 0.0) == 0.0 and (Fn.grad or 0.0) == 0.0

    def test_nonnegative_everywhere(self):
        rng = np.random.default_rng(5)
        m = R.Margin(0.4)
        for _ in range(100):
            a, b = rng.standard_normal(2)
            val = R.hinge_loss(T.constant(a), T.constant(b), m).item()
            assert val >= 0.0
            assert abs(val - max(0.0, 0.4 + b - a)) <= 1e-12


class TestRanking:
    def test_sort_oracle(self):
        scores = {0: 1.0, 1: 3.0, 2: 2.0}
        out = R.rank_tweets_for_user(0, [0, 1, 2], lambda j, t: scores[t])
        assert [t for t, _ in out] == [1, 2, 0]

    def test_tie_break_by_id(self):
        out = R.rank_tweets_for_user(0, [5, 2, 9], lambda j, t: 1.0)
        assert [t for t, _ in out] == [2, 5, 9]
