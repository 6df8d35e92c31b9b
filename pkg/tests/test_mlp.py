import math

import numpy as np
import pytest

from pacmlp import mlp, numerics
from conftest import params_away_from_kinks, random_params

# 50-digit reference: logsumexp([2, -1, 0.5]) = 2.2413112966571570602...
LSE_2_M1_05 = 2.241311296657157


class TestInit:
    def test_deterministic(self):
        cfg = mlp.MlpConfig(5, 4, 3, 2)
        a = mlp.init_params(cfg, 123)
        b = mlp.init_params(cfg, 123)
        for f in mlp.PARAM_FIELDS:
            assert np.array_equal(getattr(a, f), getattr(b, f))

    def test_different_seeds_differ(self):
        cfg = mlp.MlpConfig(5, 4, 3, 2)
        assert not np.array_equal(mlp.init_params(cfg, 1).w1, mlp.init_params(cfg, 2).w1)

    def test_biases_zero(self):
        p = mlp.init_params(mlp.MlpConfig(5, 4, 3, 2), 9)
        assert not p.b1.any() and not p.b2.any() and not p.by.any()

    def test_weight_mean_within_3_sigma(self):
        # 10^4 draws from uniform(-a, a): sigma_mean = a / (sqrt(3) * 100)
        p = mlp.init_params(mlp.MlpConfig(100, 100, 3, 2), 0)
        a = math.sqrt(6.0 / 200.0)
        assert abs(p.w1.mean()) < 3.0 * a / (math.sqrt(3.0) * 100.0)

    def test_weight_range(self):
        p = mlp.init_params(mlp.MlpConfig(30, 40, 3, 2), 4)
        a = math.sqrt(6.0 / 70.0)
        assert p.w1.min() >= -a and p.w1.max() <= a


class TestForward:
    def test_zero_net_uniform_output(self):
        p = mlp.MlpParams(
            np.zeros((3, 4)), np.zeros(4), np.zeros((4, 4)), np.zeros(4), np.zeros((4, 5)), np.zeros(5)
        )
        tr = mlp.forward(p, [0.3, -0.1, 2.0])
        assert np.allclose(tr.qy, 0.2, rtol=0, atol=1e-15)

    def test_identity_net_hand_computation(self):
        p = mlp.MlpParams(np.eye(2), np.zeros(2), np.eye(2), np.zeros(2), np.eye(2), np.zeros(2))
        tr = mlp.forward(p, [1.0, -1.0])
        assert np.array_equal(tr.f1, [1.0, 0.0])
        assert np.array_equal(tr.f2, [1.0, 0.0])
        assert np.array_equal(tr.gy, [1.0, 0.0])
        e = math.exp(1.0)
        assert abs(tr.qy[0] - e / (1 + e)) < 1e-12
        assert abs(tr.qy[1] - 1 / (1 + e)) < 1e-12

    def test_scaled_zero_input_matches_zero_input(self):
        p = random_params((4, 3, 3, 2), 5)
        a = mlp.forward(p, np.zeros(4))
        b = mlp.forward(p, 0.0 * np.arange(4, dtype=float))
        assert np.array_equal(a.qy, b.qy)

    def test_dimension_mismatch(self):
        p = random_params((4, 3, 3, 2), 5)
        with pytest.raises(ValueError, match="input length 3"):
            mlp.forward(p, [1.0, 2.0, 3.0])

    def test_deterministic_and_pure(self):
        p = random_params((6, 4, 5, 3), 8)
        x = np.linspace(-1, 1, 6)
        a, b = mlp.forward(p, x), mlp.forward(p, x)
        for f in ("g1", "f1", "g2", "f2", "gy", "qy"):
            assert np.array_equal(getattr(a, f), getattr(b, f))

    def test_relu_trace_consistency(self):
        p = random_params((6, 4, 5, 3), 3)
        tr = mlp.forward(p, np.linspace(-2, 2, 6))
        assert np.array_equal(tr.f1, np.maximum(tr.g1, 0.0))
        assert np.array_equal(tr.f2, np.maximum(tr.g2, 0.0))
        assert abs(tr.qy.sum() - 1.0) < 1e-12

    def test_batch_matches_per_sample(self):
        p = random_params((5, 4, 3, 4), 11)
        xs = np.linspace(-2, 2, 15).reshape(3, 5)
        bt = mlp.forward_batch(p, xs)
        for i in range(3):
            tr = mlp.forward(p, xs[i])
            assert np.abs(bt.gy[i] - tr.gy).max() < 1e-12
            assert np.abs(bt.qy[i] - tr.qy).max() < 1e-12


class TestLoss:
    def test_saturated_correct_prediction(self):
        gy = np.zeros(10)
        gy[0] = 50.0
        tr = _trace_with_logits(gy)
        assert mlp.cross_entropy_loss(tr, 0) < 1e-20

    def test_uniform_ten_classes(self):
        tr = _trace_with_logits(np.zeros(10))
        assert abs(mlp.cross_entropy_loss(tr, 3) - math.log(10.0)) < 1e-15

    def test_reference_value(self):
        tr = _trace_with_logits(np.array([2.0, -1.0, 0.5]))
        assert abs(mlp.cross_entropy_loss(tr, 0) - (LSE_2_M1_05 - 2.0)) < 1e-12

    def test_label_out_of_range(self):
        tr = _trace_with_logits(np.zeros(3))
        with pytest.raises(ValueError, match="label 3"):
            mlp.cross_entropy_loss(tr, 3)

    def test_nonnegative_and_upper_bound(self):
        rng = np.random.default_rng(0)
        for _ in range(100):
            gy = rng.standard_normal(rng.integers(2, 8)) * 5
            tr = _trace_with_logits(gy)
            for label in range(gy.size):
                loss = mlp.cross_entropy_loss(tr, label)
                assert loss >= 0.0
                assert loss <= numerics.logsumexp(gy) - gy.min() + 1e-12


def _trace_with_logits(gy):
    gy = np.asarray(gy, dtype=float)
    z = np.zeros(1)
    return mlp.ForwardTrace(x=z, g1=z, f1=z, g2=z, f2=z, gy=gy, qy=numerics.softmax(gy))


class TestBackward:
    def test_output_bias_gradient_closed_form(self):
        p = random_params((4, 3, 3, 2), 2)
        x = np.array([0.5, -1.0, 2.0, 0.1])
        tr = mlp.forward(p, x)
        g = mlp.backward(p, tr, 1)
        onehot = np.array([0.0, 1.0])
        assert np.array_equal(g.by, tr.qy - onehot)

    def test_saturated_prediction_zero_gradients(self):
        # drive the true-class logit far above the rest, then check stationarity
        p = random_params((3, 3, 3, 2), 6)
        x = np.array([1.0, -0.5, 0.25])
        tr = mlp.forward(p, x)
        boost = p.by.copy()
        boost[0] += 60.0
        p2 = mlp.MlpParams(p.w1, p.b1, p.w2, p.b2, p.w3, boost)
        tr2 = mlp.forward(p2, x)
        g = mlp.backward(p2, tr2, 0)
        for f in mlp.PARAM_FIELDS:
            assert np.abs(getattr(g, f)).max() < 1e-10

    def test_matches_central_finite_differences(self):
        x = np.array([0.9, -1.3, 0.4, 2.0])
        params = params_away_from_kinks((4, 3, 3, 2), x, min_margin=5e-2, start_seed=20)
        label = 1
        analytic = mlp.backward(params, mlp.forward(params, x), label)
        h = 1e-5
        for f in mlp.PARAM_FIELDS:
            block = getattr(params, f)
            a_block = getattr(analytic, f)
            it = np.nditer(block, flags=["multi_index"])
            for _ in it:
                idx = it.multi_index
                num = _central_diff(params, f, idx, x, label, h)
                a = a_block[idx]
                assert abs(a - num) <= 1e-4 * max(abs(a), abs(num)) + 1e-8

    def test_batch_mean_matches_per_sample_mean(self):
        p = random_params((5, 4, 4, 3), 13)
        xs = np.linspace(-1.5, 1.5, 20).reshape(4, 5)
        labels = np.array([0, 2, 1, 2])
        batch_g, batch_loss = mlp.batch_mean_gradients(p, xs, labels)
        singles = [mlp.backward(p, mlp.forward(p, xs[i]), int(labels[i])) for i in range(4)]
        losses = [mlp.cross_entropy_loss(mlp.forward(p, xs[i]), int(labels[i])) for i in range(4)]
        assert abs(batch_loss - np.mean(losses)) < 1e-12
        for f in mlp.PARAM_FIELDS:
            want = np.mean([getattr(s, f) for s in singles], axis=0)
            got = getattr(batch_g, f)
            assert np.abs(got - want).max() < 1e-12


def _central_diff(params, field, idx, x, label, h):
    def loss_at(delta):
        blocks = {f: getattr(params, f).copy() for f in mlp.PARAM_FIELDS}
        blocks[field][idx] += delta
        p = mlp.MlpParams(**blocks)
        return mlp.cross_entropy_loss(mlp.forward(p, x), label)

    return (loss_at(h) - loss_at(-h)) / (2 * h)


class TestPredict:
    def test_basic(self):
        assert mlp.predict(_trace_with_logits(np.log([0.1, 0.9]))) == 1

    def test_tie_breaks_low_index(self):
        assert mlp.predict(_trace_with_logits(np.zeros(5))) == 0

    def test_agrees_with_logit_argmax(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            gy = rng.standard_normal(6) * 3
            tr = _trace_with_logits(gy)
            assert mlp.predict(tr) == int(np.argmax(gy))


class TestCheckpoint:
    def test_round_trip_bitwise(self, tmp_path):
        p = random_params((5, 4, 3, 2), 77)
        path = tmp_path / "model.ckpt"
        mlp.save_params(p, path)
        q = mlp.load_params(path)
        for f in mlp.PARAM_FIELDS:
            assert np.array_equal(getattr(p, f), getattr(q, f))

    def test_magic_and_layout(self, tmp_path):
        p = random_params((3, 2, 2, 2), 1)
        path = tmp_path / "model.ckpt"
        mlp.save_params(p, path)
        blob = path.read_bytes()
        assert blob[:8] == b"PACMLP01"
        import struct

        assert struct.unpack("<4I", blob[8:24]) == (3, 2, 2, 2)
        w1 = np.frombuffer(blob, dtype="<f8", count=6, offset=24).reshape(3, 2)
        assert np.array_equal(w1, p.w1)

    def test_bad_magic_rejected(self, tmp_path):
        path = tmp_path / "bad.ckpt"
        path.write_bytes(b"NOTMAGIC" + b"\x00" * 32)
        with pytest.raises(ValueError, match="magic"):
            mlp.load_params(path)

    def test_truncated_rejected(self, tmp_path):
        p = random_params((3, 2, 2, 2), 1)
        path = tmp_path / "model.ckpt"
        mlp.save_params(p, path)
        path.write_bytes(path.read_bytes()[:-8])
        with pytest.raises(ValueError, match="truncated"):
            mlp.load_params(path)
