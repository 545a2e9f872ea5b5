import numpy as np
import pytest

from gscnet.data import csbm_generate, CsbmParams, random_split
from gscnet.errors import InputError
from gscnet.graph import build_csr, permute_graph
from gscnet.model import (AdamState, ModelParams, TrainConfig, accuracy,
                          adam_step, forward, init_params, loss_and_grad,
                          predict, softmax_cross_entropy)
from gscnet.suite import _gradcheck_instance, random_connected_graph
from gscnet.train import train_single
from gscnet.basis import FilterSpec

from conftest import (K2_EDGES, connected_edges, dense_gcn_norm_ref,
                      dense_laplacian_ref, dense_shifted_ref, er_edges)


def mlp_eval(params, X):
    h1 = np.maximum(X @ params.w1 + params.b1, 0.0)
    return h1 @ params.w2 + params.b2


def matrix_power(M, k):
    out = np.eye(M.shape[0])
    for _ in range(k):
        out = out @ M
    return out


class TestInit:
    def test_filter_coefficients_all_ones(self):
        params = init_params("GSCNet", 4, 3, 2, 1, seed=0)
        assert np.array_equal(params.filter.alpha, [1.0, 1.0, 1.0])
        assert np.array_equal(params.filter.beta, [1.0, 1.0])

    def test_same_seed_bit_identical(self):
        a = init_params("GSCNet", 5, 2, 2, 2, seed=7)
        b = init_params("GSCNet", 5, 2, 2, 2, seed=7)
        assert np.array_equal(a.w1, b.w1) and np.array_equal(a.w2, b.w2)

    def test_mlp_weight_scale(self):
        # U(-s, s) with s = 1/sqrt(fan_in) has std s/sqrt(3).
        d_in = 100
        params = init_params("GSCNet", d_in, 2, 1, 1, seed=3)
        target = (1.0 / np.sqrt(d_in)) / np.sqrt(3.0)
        assert abs(params.w1.std() - target) / target < 0.2
        assert np.array_equal(params.b1, np.zeros(64))

    def test_baseline_coefficient_layouts(self):
        assert init_params("JKNet", 4, 2, 3, 0, seed=0).filter.alpha.shape == (3,)
        assert init_params("BernNet", 4, 2, 3, 0, seed=0).filter.alpha.shape == (4,)
        gcn = init_params("GCN", 4, 2, 3, 0, seed=0)
        assert gcn.filter.alpha.size == 0 and gcn.gcn_depth == 3

    def test_unknown_arch_rejected(self):
        with pytest.raises(InputError):
            init_params("GAT", 4, 2, 1, 1, seed=0)


class TestForward:
    def test_identity_filter_equals_mlp(self, rng):
        g = build_csr(K2_EDGES, 2)
        X = rng.normal(size=(2, 4))
        params = init_params("GSCNet", 4, 3, 0, -1, seed=1)
        logits, _ = forward(params, g, X)
        assert np.allclose(logits, mlp_eval(params, X))

    def test_zero_output_layer(self, rng):
        g = build_csr(K2_EDGES, 2)
        X = rng.normal(size=(2, 4))
        params = init_params("GSCNet", 4, 3, 2, 2, seed=1)
        params.w2[:] = 0.0
        params.b2[:] = 0.0
        logits, _ = forward(params, g, X)
        assert np.array_equal(logits, np.zeros((2, 3)))

    def test_crafted_1d_weights_match_dense_composition(self):
        g = build_csr(K2_EDGES, 2)
        X = np.array([[1.0], [0.0]])
        params = init_params("GSCNet", 1, 1, 1, 1, seed=0, hidden=1)
        params.w1[:] = 1.0
        params.b1[:] = 0.0
        params.w2[:] = 1.0
        params.b2[:] = 0.0
        params.filter.alpha[:] = [0.5, 2.0]
        params.filter.beta[:] = [0.25, -1.0]
        logits, _ = forward(params, g, X)
        H = np.maximum(X @ params.w1, 0.0) @ params.w2
        S = dense_shifted_ref(K2_EDGES, 2)
        L = dense_laplacian_ref(K2_EDGES, 2)
        dense = (0.5 * np.eye(2) + 2.0 * S + 0.25 * np.eye(2) - 1.0 * L) @ H
        assert np.abs(logits - dense).max() <= 1e-12

    def test_eval_deterministic_train_seeded(self, rng):
        g = build_csr(connected_edges(rng, 12), 12)
        X = rng.normal(size=(12, 5))
        params = init_params("GSCNet", 5, 2, 2, 1, seed=0)
        a, _ = forward(params, g, X)
        b, _ = forward(params, g, X)
        assert np.array_equal(a, b)
        t1, _ = forward(params, g, X, mode="train",
                        rng=np.random.default_rng(5),
                        dropout_linear=0.3, dropout_conv=0.3)
        t2, _ = forward(params, g, X, mode="train",
                        rng=np.random.default_rng(5),
                        dropout_linear=0.3, dropout_conv=0.3)
        assert np.array_equal(t1, t2)

    def test_width_mismatch_rejected(self, rng):
        g = build_csr(K2_EDGES, 2)
        params = init_params("GSCNet", 4, 2, 1, 1, seed=0)
        with pytest.raises(InputError):
            forward(params, g, rng.normal(size=(2, 3)))

    @pytest.mark.parametrize("arch,k1", [("GCN", 3), ("JKNet", 3), ("BernNet", 3)])
    def test_baselines_match_dense_formulas(self, rng, arch, k1):
        n = 18
        edges = er_edges(rng, n, 0.3)
        g = build_csr(edges, n)
        X = rng.normal(size=(n, 4))
        params = init_params(arch, 4, 3, k1, 0, seed=2)
        if params.filter.alpha.size:
            params.filter.alpha[:] = rng.normal(size=params.filter.alpha.shape)
        logits, _ = forward(params, g, X)

        H = mlp_eval(params, X)
        M = dense_gcn_norm_ref(edges, n)
        S = dense_shifted_ref(edges, n)
        L = dense_laplacian_ref(edges, n)
        if arch == "GCN":
            dense = matrix_power(M, k1) @ H
        elif arch == "JKNet":
            dense = sum(a * matrix_power(M, k + 1) @ H
                        for k, a in enumerate(params.filter.alpha))
        else:  # BernNet: coefficient k multiplies (2I-L)^k L^{K-k}
            dense = sum(a * matrix_power(S, k) @ matrix_power(L, k1 - k) @ H
                        for k, a in enumerate(params.filter.alpha))
        assert np.abs(logits - dense).max() <= 1e-9

    def test_end_to_end_permutation_equivariance(self, rng):
        for _ in range(15):
            n = int(rng.integers(4, 20))
            g = build_csr(connected_edges(rng, n), n)
            X = rng.normal(size=(n, 3))
            arch = ["GSCNet", "GCN", "JKNet", "BernNet"][int(rng.integers(4))]
            params = init_params(arch, 3, 2, 2, 2 if arch == "GSCNet" else 0,
                                 seed=int(rng.integers(1000)))
            p = rng.permutation(n)
            gp, Xp = permute_graph(g, X, p)
            base, _ = forward(params, g, X)
            perm, _ = forward(params, gp, Xp)
            assert np.abs(perm - base[p]).max() <= 1e-9
            assert np.array_equal(predict(perm), predict(base)[p])


class TestLoss:
    def test_uniform_logits_max_entropy(self):
        logits = np.zeros((5, 4))
        labels = np.array([0, 1, 2, 3, 0])
        loss, _ = softmax_cross_entropy(logits, labels,
                                        np.ones(5, dtype=bool))
        assert loss == pytest.approx(np.log(4.0))

    def test_confident_correct_logit(self):
        logits = np.zeros((3, 2))
        logits[1, 1] = 50.0
        mask = np.array([False, True, False])
        loss, _ = softmax_cross_entropy(logits, np.array([0, 1, 0]), mask)
        assert loss < 1e-12

    def test_empty_mask_rejected(self):
        with pytest.raises(InputError):
            softmax_cross_entropy(np.zeros((2, 2)), np.zeros(2, dtype=int),
                                  np.zeros(2, dtype=bool))

    def test_huge_logits_stay_finite(self):
        logits = np.array([[1e5, -1e5], [-1e5, 1e5]])
        loss, dZ = softmax_cross_entropy(logits, np.array([1, 1]),
                                         np.ones(2, dtype=bool))
        assert np.isfinite(loss) and np.isfinite(dZ).all()


class TestGradients:
    @pytest.mark.parametrize("arch", ["GSCNet", "GCN", "JKNet", "BernNet"])
    def test_matches_finite_differences(self, arch):
        rng = np.random.default_rng(hash(arch) % 2**31)
        worst = max(_gradcheck_instance(rng, arch=arch) for _ in range(5))
        assert worst <= 1e-4

    def test_pure_negative_family(self, rng):
        worst = _gradcheck_instance(rng, arch="GSCNet", k1=-1, k2=3)
        assert worst <= 1e-4


class TestAdam:
    def test_zero_gradient_keeps_params(self):
        params = init_params("GSCNet", 3, 2, 1, 1, seed=0)
        before = params.copy()
        grads = {k: np.zeros_like(v) for k, v in params.trainable().items()}
        cfg = TrainConfig(weight_decay=0.0)
        adam_step(params, grads, AdamState.for_params(params), cfg)
        for k, v in params.trainable().items():
            assert np.array_equal(v, before.trainable()[k])

    def test_first_step_size(self):
        # First bias-corrected step moves by ~lr regardless of grad scale.
        params = init_params("GSCNet", 1, 1, 0, -1, seed=0, hidden=1)
        params.w1[:] = 1.0
        grads = {k: np.zeros_like(v) for k, v in params.trainable().items()}
        grads["w1"][:] = 1.0
        cfg = TrainConfig(lr_linear=0.1, weight_decay=0.0)
        adam_step(params, grads, AdamState.for_params(params), cfg)
        delta = 1.0 - params.w1[0, 0]
        assert abs(delta - 0.1) <= 1e-7

    def test_constant_gradient_monotone(self):
        params = init_params("GSCNet", 1, 1, 0, -1, seed=0, hidden=1)
        params.w1[:] = 1.0
        state = AdamState.for_params(params)
        cfg = TrainConfig(lr_linear=0.1, weight_decay=0.0)
        grads = {k: np.zeros_like(v) for k, v in params.trainable().items()}
        grads["w1"][:] = 1.0
        values = [params.w1[0, 0]]
        for _ in range(2):
            adam_step(params, grads, state, cfg)
            values.append(params.w1[0, 0])
        assert values[0] > values[1] > values[2]

    def test_weight_decay_only_on_mlp_weights(self):
        params = init_params("GSCNet", 2, 2, 1, 1, seed=0)
        before = params.copy()
        grads = {k: np.zeros_like(v) for k, v in params.trainable().items()}
        cfg = TrainConfig(weight_decay=0.1)
        adam_step(params, grads, AdamState.for_params(params), cfg)
        # Decay moves the MLP weights but not biases or filter coefficients.
        assert not np.array_equal(params.w1, before.w1)
        assert not np.array_equal(params.w2, before.w2)
        assert np.array_equal(params.b1, before.b1)
        assert np.array_equal(params.filter.alpha, [1.0, 1.0])
        assert np.array_equal(params.filter.beta, [1.0, 1.0])
        # Large entries shrink toward zero.
        big = np.abs(before.w1) > 2 * cfg.lr_linear
        assert (np.abs(params.w1)[big] < np.abs(before.w1)[big]).all()


class TestPredict:
    def test_argmax(self):
        assert predict(np.array([[0.1, 0.9]]))[0] == 1

    def test_tie_breaks_low(self):
        assert predict(np.array([[0.5, 0.5]]))[0] == 0

    def test_row_permutation(self, rng):
        logits = rng.normal(size=(10, 3))
        p = rng.permutation(10)
        assert np.array_equal(predict(logits[p]), predict(logits)[p])


class TestCheckpoint:
    def test_json_roundtrip(self):
        params = init_params("GSCNet", 3, 2, 2, 1, seed=5)
        again = ModelParams.from_json(params.to_json())
        assert again.arch == params.arch
        for key in ("w1", "b1", "w2", "b2"):
            assert np.array_equal(getattr(again, key), getattr(params, key))
        assert np.array_equal(again.filter.alpha, params.filter.alpha)
        assert np.array_equal(again.filter.beta, params.filter.beta)


class TestTraining:
    def test_deterministic_trajectory(self):
        ds = csbm_generate(CsbmParams(n=60, d=6, seed=3))
        split = random_split(ds.n, seed=3)
        cfg = TrainConfig(epochs=20, seed=3, dropout_linear=0.3,
                          dropout_conv=0.3)
        r1 = train_single(ds, split, "GSCNet", 2, 2, cfg)
        r2 = train_single(ds, split, "GSCNet", 2, 2, cfg)
        assert [e.train_loss for e in r1.epochs] == \
            [e.train_loss for e in r2.epochs]
        assert r1.test_acc == r2.test_acc

    def test_overfits_separable_csbm(self):
        # 50 nodes, strong structure: train accuracy hits 1.0 in 200 epochs.
        ds = csbm_generate(CsbmParams(n=50, d=8, p_intra=0.5, p_inter=0.05,
                                      mu=2.0, sigma=0.5, seed=1))
        split = random_split(ds.n, seed=1)
        cfg = TrainConfig(lr_linear=0.02, lr_prop=0.02, weight_decay=0.0,
                          dropout_linear=0.0, dropout_conv=0.0,
                          epochs=200, patience=200, seed=1)
        params = init_params("GSCNet", ds.d, ds.num_classes, 2, 2, seed=1)
        state = AdamState.for_params(params)
        hit = False
        for _ in range(cfg.epochs):
            _, grads = loss_and_grad(params, ds.graph, ds.features, ds.labels,
                                     split.train, cfg)
            adam_step(params, grads, state, cfg)
            logits, _ = forward(params, ds.graph, ds.features)
            if accuracy(logits, ds.labels, split.train) == 1.0:
                hit = True
                break
        assert hit
