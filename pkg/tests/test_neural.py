"""Continuation network: specs, passes, gradients, training."""

import numpy as np
import pytest

from freqpredict.errors import (
    NumericError,
    ParameterError,
    ShapeError,
    TrainingDivergedError,
)
from freqpredict.neural import (
    ArchitectureSpec,
    PredictorParams,
    TrainConfig,
    default_architecture,
    forward,
    gradient_check,
    init_params,
    loss_and_gradients,
    predict_window,
    train,
    wide_architecture,
)
from freqpredict.neural.network import Conv1DSpec, DenseSpec, FlattenSpec, param_shapes
from freqpredict.signal_core import (
    Provenance,
    SampleWindow,
    SignalModel,
    SinusoidSpec,
    concat,
    synthesize,
)


def identity_dense(k, standardize=False, rescale=False):
    arch = ArchitectureSpec(
        layers=(DenseSpec(k, "linear"),),
        input_len=k,
        output_len=k,
        standardize_input=standardize,
        rescale_output=rescale,
    )
    return PredictorParams(
        arch=arch, layer_params=(((np.eye(k)), np.zeros(k)),)
    )


class TestLayerSpecs:
    def test_even_kernel_rejected(self):
        with pytest.raises(ParameterError):
            Conv1DSpec(8, 4)

    def test_zero_filters_rejected(self):
        with pytest.raises(ParameterError):
            Conv1DSpec(0, 3)

    def test_bad_activation(self):
        with pytest.raises(ParameterError):
            DenseSpec(4, "tanh")


class TestArchitectureSpec:
    def test_desk_shape(self):
        arch = default_architecture(50, 100)
        assert arch.m == 50
        assert arch.n == 150
        assert arch.standardize_input
        assert not arch.rescale_output

    def test_wide_layer_count(self):
        arch = wide_architecture(50, 100)
        convs = [s for s in arch.layers if isinstance(s, Conv1DSpec)]
        assert [c.filters for c in convs] == [32, 64, 128, 256, 512]

    def test_conv_after_flatten_rejected(self):
        with pytest.raises(ShapeError):
            ArchitectureSpec(
                layers=(
                    Conv1DSpec(4, 3),
                    FlattenSpec(),
                    Conv1DSpec(4, 3),
                    FlattenSpec(),
                    DenseSpec(6, "linear"),
                ),
                input_len=8,
                output_len=6,
            )

    def test_dense_on_map_rejected(self):
        with pytest.raises(ShapeError):
            ArchitectureSpec(
                layers=(Conv1DSpec(4, 3), DenseSpec(6, "linear")),
                input_len=8,
                output_len=6,
            )

    def test_flatten_needs_map(self):
        with pytest.raises(ShapeError):
            ArchitectureSpec(
                layers=(FlattenSpec(), DenseSpec(6, "linear")),
                input_len=8,
                output_len=6,
            )

    def test_final_layer_must_be_linear_dense(self):
        with pytest.raises(ShapeError):
            ArchitectureSpec(
                layers=(DenseSpec(6, "relu"),), input_len=8, output_len=6
            )
        with pytest.raises(ShapeError):
            ArchitectureSpec(
                layers=(Conv1DSpec(4, 3),), input_len=8, output_len=8
            )

    def test_final_width_must_match(self):
        with pytest.raises(ShapeError):
            ArchitectureSpec(
                layers=(DenseSpec(5, "linear"),), input_len=8, output_len=6
            )

    def test_empty_rejected(self):
        with pytest.raises(ShapeError):
            ArchitectureSpec(layers=(), input_len=8, output_len=6)

    def test_rescale_requires_standardize(self):
        with pytest.raises(ParameterError):
            ArchitectureSpec(
                layers=(DenseSpec(6, "linear"),),
                input_len=8,
                output_len=6,
                rescale_output=True,
            )


class TestParams:
    def test_desk_param_shapes(self):
        shapes = param_shapes(default_architecture(50, 100))
        assert shapes[0] == ((32, 1, 5), (32,))
        assert shapes[1] == ((64, 32, 7), (64,))
        assert shapes[2] == ()
        assert shapes[3] == ((100, 64 * 50), (100,))

    def test_init_deterministic(self):
        arch = default_architecture(20, 10)
        a = init_params(arch, seed=5)
        b = init_params(arch, seed=5)
        for ga, gb in zip(a.layer_params, b.layer_params):
            for xa, xb in zip(ga, gb):
                np.testing.assert_array_equal(xa, xb)

    def test_init_seed_changes_weights(self):
        arch = default_architecture(20, 10)
        a = init_params(arch, seed=5)
        b = init_params(arch, seed=6)
        assert not np.array_equal(a.layer_params[0][0], b.layer_params[0][0])

    def test_init_scales(self):
        arch = default_architecture(50, 100)
        params = init_params(arch, seed=0)
        w_conv = params.layer_params[1][0]  # fan_in = 32 * 7
        assert np.std(w_conv) == pytest.approx(np.sqrt(2.0 / (32 * 7)), rel=0.15)
        w_out = params.layer_params[3][0]
        assert np.max(np.abs(w_out)) <= 1.0 / np.sqrt(64 * 50)
        for group in params.layer_params:
            if group:
                np.testing.assert_array_equal(group[1], 0.0)

    def test_wrong_shapes_rejected(self):
        arch = ArchitectureSpec(
            layers=(DenseSpec(6, "linear"),), input_len=8, output_len=6
        )
        with pytest.raises(ShapeError):
            PredictorParams(
                arch=arch, layer_params=(((np.zeros((6, 9))), np.zeros(6)),)
            )

    def test_non_finite_rejected(self):
        arch = ArchitectureSpec(
            layers=(DenseSpec(6, "linear"),), input_len=8, output_len=6
        )
        w = np.zeros((6, 8))
        w[0, 0] = np.inf
        with pytest.raises(NumericError):
            PredictorParams(arch=arch, layer_params=((w, np.zeros(6)),))

    def test_copy_is_independent(self):
        params = init_params(default_architecture(10, 5), seed=0)
        dup = params.copy()
        dup.layer_params[0][0][0, 0, 0] += 1.0
        assert (
            params.layer_params[0][0][0, 0, 0]
            != dup.layer_params[0][0][0, 0, 0]
        )


class TestForward:
    def test_identity_dense(self, rng):
        params = identity_dense(12)
        x = rng.standard_normal(12)
        np.testing.assert_array_equal(forward(params, x), x)

    def test_batch_matches_single(self, rng):
        # Batched and per-example BLAS paths may differ in the last ulp,
        # so this is a numerical-equivalence check, not a bitwise one.
        params = init_params(default_architecture(16, 8), seed=1)
        batch = rng.standard_normal((5, 16))
        stacked = forward(params, batch)
        for i in range(5):
            np.testing.assert_allclose(
                stacked[i], forward(params, batch[i]), rtol=1e-12, atol=1e-14
            )

    def test_standardization_applied(self, rng):
        params = identity_dense(10, standardize=True)
        x = 3.0 + 2.0 * rng.standard_normal(10)
        expected = (x - x.mean()) / x.std()
        np.testing.assert_allclose(forward(params, x), expected, atol=1e-12)

    def test_rescale_round_trips(self, rng):
        # standardize -> identity -> rescale reproduces the input exactly.
        params = identity_dense(10, standardize=True, rescale=True)
        x = -5.0 + 0.3 * rng.standard_normal(10)
        np.testing.assert_allclose(forward(params, x), x, atol=1e-12)

    def test_constant_input_floor(self):
        # A constant window has zero variance; the floor keeps the pass
        # finite instead of dividing by zero.
        params = identity_dense(10, standardize=True)
        out = forward(params, np.full(10, 2.5))
        assert np.all(np.isfinite(out))
        np.testing.assert_allclose(out, 0.0, atol=1e-6)

    def test_relu_path(self, rng):
        arch = ArchitectureSpec(
            layers=(DenseSpec(6, "relu"), DenseSpec(6, "linear")),
            input_len=6,
            output_len=6,
        )
        params = PredictorParams(
            arch=arch,
            layer_params=(
                (-np.eye(6), np.zeros(6)),
                (np.eye(6), np.zeros(6)),
            ),
        )
        x = rng.standard_normal(6)
        np.testing.assert_allclose(forward(params, x), np.maximum(-x, 0.0))

    def test_wrong_length_rejected(self, rng):
        params = identity_dense(10)
        with pytest.raises(ShapeError):
            forward(params, rng.standard_normal(11))

    def test_non_finite_input_rejected(self):
        params = identity_dense(4)
        with pytest.raises(NumericError):
            forward(params, np.array([1.0, np.nan, 0.0, 0.0]))


class TestLossAndGradients:
    def test_zero_network_closed_form(self, rng):
        # With all-zero parameters the output is zero, so the loss is the
        # target energy and the readout gradients have a known form.
        k = 7
        arch = ArchitectureSpec(
            layers=(DenseSpec(k, "linear"),), input_len=k, output_len=k
        )
        params = PredictorParams(
            arch=arch, layer_params=((np.zeros((k, k)), np.zeros(k)),)
        )
        x = rng.standard_normal((3, k))
        t = rng.standard_normal((3, k))
        loss, grads = loss_and_gradients(params, (x, t))
        assert loss == pytest.approx(np.sum(t * t), rel=1e-12)
        np.testing.assert_allclose(grads[0][1], -2.0 * t.sum(axis=0), atol=1e-12)
        np.testing.assert_allclose(grads[0][0], -2.0 * t.T @ x, atol=1e-12)

    def test_pair_list_matches_arrays(self, rng):
        params = init_params(default_architecture(12, 6), seed=2)
        x = rng.standard_normal((4, 12))
        t = rng.standard_normal((4, 6))
        loss_a, grads_a = loss_and_gradients(params, (x, t))
        loss_b, grads_b = loss_and_gradients(params, list(zip(x, t)))
        assert loss_a == loss_b
        for ga, gb in zip(grads_a, grads_b):
            for xa, xb in zip(ga, gb):
                np.testing.assert_array_equal(xa, xb)

    def test_empty_batch_rejected(self):
        params = identity_dense(4)
        with pytest.raises(ParameterError):
            loss_and_gradients(params, [])

    def test_target_length_mismatch(self, rng):
        params = identity_dense(4)
        with pytest.raises(ShapeError):
            loss_and_gradients(
                params, (rng.standard_normal((2, 4)), rng.standard_normal((2, 5)))
            )


class TestGradientCheck:
    CONFIGS = [
        ArchitectureSpec(
            layers=(Conv1DSpec(2, 3), FlattenSpec(), DenseSpec(6, "linear")),
            input_len=8,
            output_len=6,
        ),
        ArchitectureSpec(
            layers=(
                Conv1DSpec(2, 3),
                Conv1DSpec(3, 5),
                FlattenSpec(),
                DenseSpec(4, "relu"),
                DenseSpec(6, "linear"),
            ),
            input_len=8,
            output_len=6,
            standardize_input=True,
        ),
        ArchitectureSpec(
            layers=(DenseSpec(5, "relu"), DenseSpec(8, "linear")),
            input_len=8,
            output_len=8,
            standardize_input=True,
            rescale_output=True,
        ),
        ArchitectureSpec(
            layers=(DenseSpec(6, "linear"),), input_len=8, output_len=6
        ),
    ]

    @pytest.mark.parametrize("arch", CONFIGS)
    def test_backprop_matches_numeric(self, arch, rng):
        params = init_params(arch, seed=3)
        batch = (
            rng.standard_normal((2, arch.input_len)),
            rng.standard_normal((2, arch.output_len)),
        )
        assert gradient_check(params, batch) < 1e-4


class TestTrain:
    @staticmethod
    def linear_map_data(rng, count=40, m=10, n=6):
        a = rng.standard_normal((n, m)) / np.sqrt(m)
        x = rng.standard_normal((count, m))
        return x, x @ a.T

    def test_loss_decreases(self, rng):
        x, t = self.linear_map_data(rng)
        arch = ArchitectureSpec(
            layers=(DenseSpec(12, "relu"), DenseSpec(6, "linear")),
            input_len=10,
            output_len=6,
        )
        _, history = train(
            (x, t), arch, TrainConfig(epochs=30, batch_size=8, learning_rate=0.01)
        )
        assert len(history) == 30
        assert history[-1] < history[0] / 10

    def test_deterministic(self, rng):
        x, t = self.linear_map_data(rng)
        arch = ArchitectureSpec(
            layers=(DenseSpec(6, "linear"),), input_len=10, output_len=6
        )
        cfg = TrainConfig(epochs=5, batch_size=8, init_seed=1, shuffle_seed=2)
        params_a, hist_a = train((x, t), arch, cfg)
        params_b, hist_b = train((x, t), arch, cfg)
        assert hist_a == hist_b
        for ga, gb in zip(params_a.layer_params, params_b.layer_params):
            for xa, xb in zip(ga, gb):
                np.testing.assert_array_equal(xa, xb)

    def test_overfits_single_example(self):
        window = synthesize(SinusoidSpec((1.0,), (0.21,)), 16)
        x = window.samples[:10][None, :]
        t = window.samples[10:][None, :]
        arch = ArchitectureSpec(
            layers=(DenseSpec(16, "relu"), DenseSpec(6, "linear")),
            input_len=10,
            output_len=6,
        )
        _, history = train(
            (x, t), arch, TrainConfig(epochs=400, batch_size=1, learning_rate=0.01)
        )
        assert history[-1] < 1e-8

    def test_divergence_carries_checkpoint(self, rng):
        x, t = self.linear_map_data(rng)
        arch = ArchitectureSpec(
            layers=(DenseSpec(12, "relu"), DenseSpec(6, "linear")),
            input_len=10,
            output_len=6,
        )
        # Adam bounds the step size by the learning rate, so divergence
        # takes a rate big enough to overflow the squared loss itself.
        # The overflow inside the doomed batch is the point of the test.
        with np.errstate(over="ignore", invalid="ignore"):
            with pytest.raises(TrainingDivergedError) as exc:
                train((x, t), arch, TrainConfig(epochs=50, learning_rate=1e100))
        err = exc.value
        assert err.params is not None
        assert err.params.arch == arch
        for group in err.params.layer_params:
            for arr in group:
                assert np.all(np.isfinite(arr))
        assert isinstance(err.history, list)

    def test_batch_larger_than_dataset(self, rng):
        x, t = self.linear_map_data(rng, count=5)
        arch = ArchitectureSpec(
            layers=(DenseSpec(6, "linear"),), input_len=10, output_len=6
        )
        _, history = train((x, t), arch, TrainConfig(epochs=2, batch_size=64))
        assert len(history) == 2

    def test_dim_mismatch_rejected(self, rng):
        x, t = self.linear_map_data(rng)
        arch = ArchitectureSpec(
            layers=(DenseSpec(6, "linear"),), input_len=9, output_len=6
        )
        with pytest.raises(ParameterError):
            train((x, t), arch, TrainConfig(epochs=1))

    def test_config_validation(self):
        with pytest.raises(ParameterError):
            TrainConfig(epochs=0)
        with pytest.raises(ParameterError):
            TrainConfig(learning_rate=0.0)
        with pytest.raises(ParameterError):
            TrainConfig(adam_beta1=1.0)


class TestPredictWindow:
    def test_continuation_window(self):
        params = identity_dense(10)
        window = synthesize(SinusoidSpec((1.0,), (0.2,)), 10)
        pred = predict_window(params, window)
        assert pred.start_index == 11
        assert pred.provenance is Provenance.PREDICTED
        np.testing.assert_array_equal(pred.samples, window.samples)
        joined = concat(window, pred)
        assert len(joined) == 20

    def test_wrong_length(self):
        params = identity_dense(10)
        with pytest.raises(ShapeError):
            predict_window(params, synthesize(SinusoidSpec((1.0,), (0.2,)), 11))

    def test_complex_rejected(self):
        params = identity_dense(10)
        window = synthesize(
            SinusoidSpec((1.0,), (0.2,)), 10, model=SignalModel.COMPLEX_EXP
        )
        with pytest.raises(ParameterError):
            predict_window(params, window)
