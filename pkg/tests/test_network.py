import numpy as np
import pytest

from app.core.errors import ConfigurationError, DivergenceError
from app.network import layers
from app.network.loss import TUKEY_C, mad_scale, tukey_biweight_loss
from app.network.model import (
    create_net,
    forward,
    gradient_check,
    init_with_priors,
    load_checkpoint,
    loss_and_gradients,
    predict_keypoints,
    save_checkpoint,
    sgd_step,
)
from app.network.training import EpochRecord, TrainingHistory, evaluate_loss, train
from app.priors.assemble import assemble_priors
from app.schemas.network import NetConfig, PriorConfig, TrainConfig


INPUT_SHAPE = (8, 12)
CHANNELS = 3


@pytest.fixture
def net(tiny_net_config):
    return create_net(tiny_net_config, CHANNELS, INPUT_SHAPE, seed=1)


@pytest.fixture
def batch(rng):
    x = rng.normal(size=(4, CHANNELS) + INPUT_SHAPE)
    y = rng.uniform(0.2, 0.8, size=(4, 28))
    return x, y


def finite_difference(f, x, eps=1e-5):
    grad = np.zeros_like(x)
    for index in np.ndindex(x.shape):
        plus, minus = x.copy(), x.copy()
        plus[index] += eps
        minus[index] -= eps
        grad[index] = (f(plus) - f(minus)) / (2 * eps)
    return grad


def relative_error(a, b):
    return np.linalg.norm(a - b) / max(np.linalg.norm(a) + np.linalg.norm(b), 1e-12)


class TestTukeyLoss:
    def test_zero_residual(self):
        loss, grad = tukey_biweight_loss(np.ones(28), np.ones(28), sigma=1.0)
        assert loss == 0.0
        np.testing.assert_array_equal(grad, 0.0)

    def test_outlier_gradient_is_exactly_zero(self):
        pred = np.zeros(28)
        pred[3] = 10 * TUKEY_C
        _, grad = tukey_biweight_loss(pred, np.zeros(28), sigma=1.0)
        assert grad[3] == 0.0

    def test_outlier_gradient_zero_with_mad_scale(self, rng):
        target = rng.normal(size=28)
        pred = target + rng.normal(scale=0.1, size=28)
        pred[0] += 1e3
        _, grad = tukey_biweight_loss(pred, target)
        assert grad[0] == 0.0

    def test_gradient_matches_finite_differences(self, rng):
        for _ in range(5):
            pred, target = rng.normal(size=28), rng.normal(size=28)
            _, grad = tukey_biweight_loss(pred, target, sigma=0.7)
            numeric = finite_difference(lambda p: tukey_biweight_loss(p, target, sigma=0.7)[0], pred)
            assert relative_error(grad, numeric) < 1e-4

    def test_mad_scale_fallback(self):
        assert mad_scale(np.zeros(10)) == 1.0


class TestLayers:
    def test_conv_gradients(self, rng):
        x = rng.normal(size=(2, 2, 5, 6))
        w, b = rng.normal(size=(3, 2, 3, 3)), rng.normal(size=3)
        dout = rng.normal(size=(2, 3, 5, 6))
        _, cache = layers.conv2d_forward(x, w, b)
        dx, dw, db = layers.conv2d_backward(dout, cache)
        assert relative_error(dx, finite_difference(lambda v: np.sum(layers.conv2d_forward(v, w, b)[0] * dout), x)) < 1e-6
        assert relative_error(dw, finite_difference(lambda v: np.sum(layers.conv2d_forward(x, v, b)[0] * dout), w)) < 1e-6
        assert relative_error(db, finite_difference(lambda v: np.sum(layers.conv2d_forward(x, w, v)[0] * dout), b)) < 1e-6

    def test_lrn_gradient(self, rng):
        x = rng.normal(size=(2, 6, 3, 3))
        dout = rng.normal(size=x.shape)
        args = (5, 1e-1, 0.75, 2.0)
        _, cache = layers.lrn_forward(x, *args)
        dx = layers.lrn_backward(dout, cache)
        numeric = finite_difference(lambda v: np.sum(layers.lrn_forward(v, *args)[0] * dout), x)
        assert relative_error(dx, numeric) < 1e-6

    def test_maxpool_shape_and_routing(self):
        x = np.arange(2 * 1 * 5 * 4, dtype=float).reshape(2, 1, 5, 4)
        out, cache = layers.maxpool_forward(x)
        assert out.shape == (2, 1, 2, 2)
        dx = layers.maxpool_backward(np.ones_like(out), cache)
        assert dx.sum() == out.size
        assert dx[:, :, 4].sum() == 0

    def test_inference_dropout_scales(self):
        out, _ = layers.dropout_forward(np.ones((2, 3)), 0.5, train_mode=False)
        np.testing.assert_array_equal(out, 0.5)


class TestRegressionNet:
    def test_default_output_width(self, rng):
        config = NetConfig(conv_widths=(2, 2, 2, 2), fc1_width=4)
        net = create_net(config, 147, (18, 28))
        assert forward(net, rng.normal(size=(1, 147, 18, 28))).shape == (1, 28)

    def test_zero_weights_give_zero_output(self, net, batch):
        zeroed = net.replace({k: np.zeros_like(v) for k, v in net.params.items()})
        np.testing.assert_array_equal(forward(zeroed, batch[0]), 0.0)

    def test_inference_deterministic(self, net, batch):
        np.testing.assert_array_equal(forward(net, batch[0]), forward(net, batch[0]))

    def test_wrong_channels(self, net, rng):
        with pytest.raises(ConfigurationError):
            forward(net, rng.normal(size=(1, CHANNELS + 1) + INPUT_SHAPE))

    def test_gradient_audit(self, net, batch):
        errors = gradient_check(net, *batch, sigma=0.5, samples_per_param=6)
        assert set(errors) == set(net.parameter_names)
        assert max(errors.values()) < 1e-4

    def test_zero_learning_rate(self, net, batch):
        stepped, _ = sgd_step(net, *batch, lr=0.0, seed=3)
        for name in net.params:
            np.testing.assert_array_equal(stepped.params[name], net.params[name])

    def test_descent_direction(self, net, batch):
        x, y = batch[0][:1], batch[1][:1]
        before, grads = loss_and_gradients(net, x, y, train_mode=True, seed=4, sigma=0.5)
        params = {k: v - 1e-8 * grads[k] for k, v in net.params.items()}
        after, _ = loss_and_gradients(net.replace(params), x, y, train_mode=True, seed=4, sigma=0.5)
        assert after <= before

    def test_non_finite_input_aborts_step(self, net, batch):
        x = batch[0].copy()
        x[0, 0, 0, 0] = np.inf
        before = {k: v.copy() for k, v in net.params.items()}
        with pytest.raises(DivergenceError) as excinfo:
            sgd_step(net, x, batch[1], lr=1e-2, seed=3)
        assert excinfo.value.exit_code == 3
        for name, value in before.items():
            np.testing.assert_array_equal(net.params[name], value)

    def test_overflowing_update_aborts_step(self, net, batch):
        with pytest.raises(DivergenceError):
            sgd_step(net, *batch, lr=np.inf, seed=3)


class TestPriorInit:
    def test_kernels_installed(self, net, rng):
        priors = assemble_priors(
            rng.normal(size=(4, CHANNELS) + INPUT_SHAPE), net.config,
            PriorConfig(patches_per_layer=200, max_items=4),
        )
        initialized = init_with_priors(net, priors)
        assert initialized.init_mode == "structural_prior"
        for layer_id, prior in priors.items():
            np.testing.assert_array_equal(initialized.params[f"{layer_id}.weight"], prior.weights)
        assert np.all(np.isfinite(forward(initialized, rng.normal(size=(2, CHANNELS) + INPUT_SHAPE))))

    def test_mismatched_prior_rejected(self, net, rng):
        other = create_net(NetConfig(conv_widths=(3, 2, 3, 3), fc1_width=6), CHANNELS, INPUT_SHAPE)
        priors = assemble_priors(
            rng.normal(size=(4, CHANNELS) + INPUT_SHAPE), other.config,
            PriorConfig(patches_per_layer=200, max_items=4),
        )
        before = {k: v.copy() for k, v in net.params.items()}
        with pytest.raises(ConfigurationError):
            init_with_priors(net, priors)
        for name, value in before.items():
            np.testing.assert_array_equal(net.params[name], value)


class TestTraining:
    def test_zero_epochs(self, net, batch):
        result = train(net, *batch, *batch, TrainConfig(epochs=0, drop_epoch=0))
        assert result.net is net
        assert len(result.history) == 0

    def test_history_and_determinism(self, net, batch):
        config = TrainConfig(epochs=3, drop_epoch=2, base_lr=1e-2, lr_after_drop=1e-3, batch_size=2, seed=5)
        a = train(net, *batch, *batch, config)
        b = train(net, *batch, *batch, config)
        assert [r.epoch for r in a.history.records] == [0, 1, 2]
        assert [r.lr for r in a.history.records] == [1e-2, 1e-2, 1e-3]
        assert a.history.val_losses == b.history.val_losses
        assert a.best_val_loss == min(a.history.val_losses)

    def test_epochs_to_reach(self):
        history = TrainingHistory([EpochRecord(e, 1e-2, 1.0, loss) for e, loss in enumerate((3.0, 2.0, 1.0))])
        assert history.epochs_to_reach(2.0) == 2
        assert history.epochs_to_reach(0.5) is None

    def test_divergence_reported(self, net, batch):
        config = TrainConfig(epochs=2, drop_epoch=1, base_lr=1e300, lr_after_drop=1e300, batch_size=4)
        result = train(net, *batch, *batch, config)
        assert result.diverged
        assert result.diagnostic
        for value in result.net.params.values():
            assert np.all(np.isfinite(value))

    def test_divergence_keeps_last_finite_state(self, net, batch):
        x = batch[0].copy()
        x[1, 0, 2, 3] = np.inf
        config = TrainConfig(epochs=2, drop_epoch=1, base_lr=1e-2, lr_after_drop=1e-3, batch_size=4)
        result = train(net, x, batch[1], *batch, config)
        assert result.diverged
        assert result.net is net
        assert result.best_net is None
        assert len(result.history) == 0

    def test_checkpoint_reproduces_val_loss(self, net, batch, tmp_path):
        stored = net.rounded_to_float32()
        val_loss = evaluate_loss(stored, *batch)
        save_checkpoint(stored, tmp_path / "net", epoch=0, val_loss=val_loss, seed=0)
        loaded, header = load_checkpoint(tmp_path / "net")
        assert header["val_loss"] == val_loss
        assert evaluate_loss(loaded, *batch) == val_loss
        np.testing.assert_array_equal(predict_keypoints(loaded, batch[0]), predict_keypoints(stored, batch[0]))
