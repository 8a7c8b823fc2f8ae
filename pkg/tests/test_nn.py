import numpy as np
import pytest
from pyafn import autograd as ag
from pyafn.autograd import backward
from pyafn.autograd import Tape
from pyafn.autograd import Tensor
from pyafn.errsys.exceptions import ConfigError
from pyafn.errsys.exceptions import ShapeError
from pyafn.nn import Architecture
from pyafn.nn import batchnorm
from pyafn.nn import BatchNormState
from pyafn.nn import dropout
from pyafn.nn import DropoutSpec
from pyafn.nn import DropoutVariant
from pyafn.nn import forward
from pyafn.nn import init_params
from pyafn.nn import Linear
from pyafn.nn import Mode
from pyafn.nn import ModelParams


def _zeroed(params: ModelParams) -> ModelParams:
    for name, tensor in params.named_tensors():
        if not name.endswith("gamma"):
            tensor.values[...] = 0.0
    return params


class TestDropout:
    def test_zero_probability_is_identity(self):
        x = Tensor([[1.0, 2.0]])
        assert dropout(x, DropoutSpec(0.0), np.random.default_rng(0)) is x

    def test_eval_mode_is_identity(self):
        x = Tensor([[1.0, 2.0]])
        assert dropout(x, DropoutSpec(0.5, Mode.Eval), None) is x

    def test_forced_mask(self):
        spec = DropoutSpec(0.75, Mode.Train, DropoutVariant.L2Preserving)
        out = dropout(Tensor([[3.0, 4.0]]), spec, None, mask=np.array([[1, 0]]))

        np.testing.assert_array_equal(out.values, [[6.0, 0.0]])

    def test_l1_scale(self):
        spec = DropoutSpec(0.75, Mode.Train, DropoutVariant.L1Preserving)
        out = dropout(Tensor([[3.0, 4.0]]), spec, None, mask=np.array([[1, 0]]))

        np.testing.assert_array_equal(out.values, [[12.0, 0.0]])

    def test_probability_one_is_rejected(self):
        with pytest.raises(ConfigError):
            DropoutSpec(1.0)

    def test_backward_routes_through_the_mask(self):
        x = Tensor.parameter([[3.0, 4.0, 5.0]])
        spec = DropoutSpec(0.5, Mode.Train, DropoutVariant.L1Preserving)

        with Tape() as tape:
            loss = ag.sum(dropout(x, spec, None, mask=np.array([[1, 0, 1]])))

        backward(tape, loss)
        np.testing.assert_array_equal(x.grad, [[2.0, 0.0, 2.0]])

    @pytest.mark.parametrize(
        "variant, statistic",
        [
            (DropoutVariant.L1Preserving, lambda v: np.sum(np.abs(v), axis=-1)),
            (DropoutVariant.L2Preserving, lambda v: np.sum(v * v, axis=-1)),
        ],
    )
    def test_expectation_is_preserved(self, variant, statistic):
        x = np.array([3.0, 4.0])
        batch = Tensor(np.tile(x, (100_000, 1)))

        out = dropout(batch, DropoutSpec(0.5, Mode.Train, variant), np.random.default_rng(0))
        estimate = float(np.mean(statistic(out.values)))

        assert estimate == pytest.approx(float(statistic(x)), rel=0.02)


class TestBatchnorm:
    def test_batch_of_one(self):
        state = BatchNormState.fresh(3, "bn")

        with pytest.raises(ShapeError) as e:
            batchnorm(Tensor(np.ones((1, 3))), state)

        assert e.value.error.id == "E017"

    def test_running_statistics_update(self, rng):
        state = BatchNormState.fresh(2, "bn")
        x = rng.standard_normal((10, 2)) + 5.0

        batchnorm(Tensor(x), state)

        np.testing.assert_allclose(state.running_mean, 0.1 * x.mean(axis=0))
        np.testing.assert_allclose(state.running_var, 0.9 + 0.1 * x.var(axis=0))

    def test_eval_mode_leaves_running_statistics(self, rng):
        state = BatchNormState.fresh(2, "bn")
        state.mode = Mode.Eval
        batchnorm(Tensor(rng.standard_normal((10, 2))), state)

        np.testing.assert_array_equal(state.running_mean, np.zeros(2))
        np.testing.assert_array_equal(state.running_var, np.ones(2))

    def test_eval_mode_reads_running_statistics(self):
        state = BatchNormState.fresh(2, "bn")
        state.running_mean = np.array([1.0, 2.0])
        state.running_var = np.array([4.0, 9.0])
        state.mode = Mode.Eval

        out = batchnorm(Tensor([[3.0, 5.0]]), state)
        np.testing.assert_allclose(out.values, [[1.0, 1.0]], rtol=1e-5)


class TestForward:
    @pytest.fixture
    def arch(self) -> Architecture:
        return Architecture(input_dim=5, n_classes=3, hidden=(7,), embedding_size=4, dropout_p=0.5)

    def test_zero_parameters(self, arch, rng):
        params = _zeroed(init_params(arch, rng))
        f, logits = forward(rng.standard_normal((6, 5)), params, Mode.Eval)

        np.testing.assert_array_equal(f.values, np.zeros((6, 4)))
        np.testing.assert_array_equal(logits.values, np.zeros((6, 3)))

    def test_eval_is_deterministic(self, arch, rng):
        params = init_params(arch, rng)
        x = rng.standard_normal((6, 5))

        first = forward(x, params, Mode.Eval)
        second = forward(x, params, Mode.Eval)

        np.testing.assert_array_equal(first[0].values, second[0].values)
        np.testing.assert_array_equal(first[1].values, second[1].values)

    def test_train_is_reproducible_from_the_seed(self, arch, rng):
        params = init_params(arch, rng)
        x = rng.standard_normal((6, 5))
        outputs = [
            forward(x, params.copy(), Mode.Train, np.random.default_rng(3))[0].values for _ in range(2)
        ]

        np.testing.assert_array_equal(*outputs)

    def test_a_shifted_joint_batch_evaluates_as_it_trains(self, rng):
        arch = Architecture(input_dim=5, n_classes=3, hidden=(8,), embedding_size=6, dropout_p=0.0)
        params = init_params(arch, rng)
        x_s = rng.standard_normal((20, 5)) + 1.0
        x = np.concatenate([x_s, 0.5 * x_s])

        for _ in range(200):
            f_train, _ = forward(x, params, Mode.Train)

        f_eval, _ = forward(x, params, Mode.Eval)

        np.testing.assert_allclose(f_eval.values, f_train.values, atol=1e-6)

    def test_two_dimensional_embedding(self, rng):
        arch = Architecture(input_dim=5, n_classes=3, hidden=(), embedding_size=2)
        f, logits = forward(rng.standard_normal((4, 5)), init_params(arch, rng), Mode.Eval)

        assert f.shape == (4, 2)
        assert logits.shape == (4, 3)

    def test_input_dimension_mismatch(self, arch, rng):
        with pytest.raises(ShapeError):
            forward(rng.standard_normal((4, 6)), init_params(arch, rng), Mode.Eval)

    def test_gradients_reach_every_tensor(self, arch, rng):
        params = init_params(arch, rng)

        with Tape() as tape:
            _, logits = forward(rng.standard_normal((6, 5)), params, Mode.Train, rng)
            loss = ag.mean(ag.square(logits))

        backward(tape, loss)

        assert all(t.grad is not None for t in params.tensors())


class TestModelParams:
    def test_glorot_initialization(self, rng):
        arch = Architecture(input_dim=10, n_classes=4, hidden=(20,), embedding_size=6)
        params = init_params(arch, rng)

        for name, tensor in params.named_tensors():
            if name.endswith("weight"):
                fan_in, fan_out = tensor.shape
                assert np.abs(tensor.values).max() <= np.sqrt(6.0 / (fan_in + fan_out))
            elif name.endswith("gamma"):
                np.testing.assert_array_equal(tensor.values, np.ones(tensor.shape))
            else:
                np.testing.assert_array_equal(tensor.values, np.zeros(tensor.shape))

    def test_tensor_order(self, rng):
        params = init_params(Architecture(input_dim=3, n_classes=2, hidden=(4,), embedding_size=2), rng)

        assert [name for name, _ in params.named_tensors()] == [
            "g.0.weight",
            "g.0.bias",
            "f.0.weight",
            "f.0.bias",
            "f.0.gamma",
            "f.0.beta",
            "y.weight",
            "y.bias",
        ]

    def test_broken_chain(self, rng):
        arch = Architecture(input_dim=3, n_classes=2, hidden=(4,), embedding_size=2)
        params = init_params(arch, rng)
        bad_y = Linear(Tensor.parameter(np.zeros((3, 2))), Tensor.parameter(np.zeros(2)))

        with pytest.raises(ConfigError):
            ModelParams(arch, params.g_layers, params.f_blocks, bad_y)

    def test_invalid_architecture(self):
        with pytest.raises(ConfigError):
            Architecture(input_dim=3, n_classes=2, dropout_p=1.0)
        with pytest.raises(ConfigError):
            Architecture(input_dim=3, n_classes=1)

    def test_copy_is_independent(self, rng):
        params = init_params(Architecture(input_dim=3, n_classes=2, hidden=(4,), embedding_size=2), rng)
        clone = params.copy()
        clone.y_layer.weight.values[...] = 0.0
        clone.f_blocks[0].bn.running_mean[...] = 1.0

        assert np.any(params.y_layer.weight.values != 0.0)
        np.testing.assert_array_equal(params.f_blocks[0].bn.running_mean, np.zeros(2))
