import functools

import numpy as np
import pytest
from pyafn import autograd as ag
from pyafn.autograd import backward
from pyafn.autograd import Tape
from pyafn.autograd import Tensor
from pyafn.data import CANNED_PARTIAL_KEEP
from pyafn.data import count_batches
from pyafn.data import DomainDataset
from pyafn.data import DomainTag
from pyafn.data import gen_synthetic
from pyafn.data import make_partial
from pyafn.data import ShiftSpec
from pyafn.errsys.exceptions import InternalError
from pyafn.nn import Architecture
from pyafn.nn import forward
from pyafn.nn import init_params
from pyafn.nn import Mode
from pyafn.objectives import LossBreakdown
from pyafn.objectives import ObjectiveConfig
from pyafn.objectives import safn_penalty
from pyafn.objectives import Variant
from pyafn.train import evaluate
from pyafn.train import load_checkpoint
from pyafn.train import loop
from pyafn.train import run
from pyafn.train import RunMetrics
from pyafn.train import save_checkpoint
from pyafn.train import sgd_step
from pyafn.train import TrainConfig
from result import Err
from result import Ok


def _step(theta: Tensor, grad: float, velocities, lr: float, momentum: float) -> None:
    theta.grad = np.full(theta.shape, grad)
    sgd_step({"theta": theta}, velocities, lr, momentum)


class TestSgd:
    def test_plain_step(self):
        theta = Tensor.parameter([1.0, 2.0])
        _step(theta, 0.5, {}, 0.1, 0.0)

        np.testing.assert_allclose(theta.values, [0.95, 1.95])
        assert theta.grad is None

    def test_momentum(self):
        theta = Tensor.parameter([0.0])
        velocities = {}

        _step(theta, 1.0, velocities, 0.1, 0.9)
        before = theta.values.copy()
        _step(theta, 1.0, velocities, 0.1, 0.9)

        np.testing.assert_allclose(before - theta.values, [1.9 * 0.1 * 1.0])

    def test_quadratic_bowl(self):
        theta = Tensor.parameter([3.0, -4.0])
        velocities = {}
        losses = []

        for _ in range(100):
            with Tape() as tape:
                loss = ag.scalar_mul(ag.sum(ag.square(theta)), c=0.5)
            losses.append(loss.item())
            backward(tape, loss)
            sgd_step({"theta": theta}, velocities, 0.1, 0.0)

        assert all(b < a for a, b in zip(losses, losses[1:]))

    def test_missing_gradient(self, rng):
        params = init_params(Architecture(input_dim=3, n_classes=2, hidden=(4,), embedding_size=2), rng)

        with pytest.raises(InternalError) as e:
            sgd_step(params, {}, 0.1, 0.9)

        assert e.value.error.id == "E014"


class TestEvaluate:
    @staticmethod
    def _one_hot_model(n_classes: int):
        """
        Identity features with unit running statistics: the logits are the inputs.
        """

        arch = Architecture(input_dim=n_classes, n_classes=n_classes, hidden=(), embedding_size=n_classes, dropout_p=0.0)
        params = init_params(arch, np.random.default_rng(0))
        params.f_blocks[0].linear.weight.values[...] = np.eye(n_classes)
        params.y_layer.weight.values[...] = np.eye(n_classes)

        return params

    def test_perfect_predictor(self):
        labels = np.array([0, 1, 2, 3] * 5)
        ds = DomainDataset(5.0 * np.eye(4)[labels], labels, frozenset(range(4)), DomainTag.Target)

        result = evaluate(self._one_hot_model(4), ds)

        assert result.accuracy == 1.0
        assert result.per_class == {0: 1.0, 1: 1.0, 2: 1.0, 3: 1.0}

    def test_constant_predictor(self, rng):
        params = self._one_hot_model(4)
        params.y_layer.weight.values[...] = 0.0
        params.y_layer.bias.values[...] = [1.0, 0.0, 0.0, 0.0]
        labels = np.repeat(np.arange(4), 10)
        ds = DomainDataset(rng.standard_normal((40, 4)), labels, frozenset(range(4)), DomainTag.Target)

        result = evaluate(params, ds)

        assert result.accuracy == 0.25
        assert result.per_class == {0: 1.0, 1: 0.0, 2: 0.0, 3: 0.0}
        assert result.per_class_mean == 0.25

    def test_confusion_matrix_oracle(self, rng):
        params = init_params(Architecture(input_dim=4, n_classes=3, hidden=(5,), embedding_size=3), rng)
        labels = rng.integers(0, 3, 50)
        ds = DomainDataset(rng.standard_normal((50, 4)), labels, frozenset(range(3)), DomainTag.Source)

        _, logits = forward(ds.features, params, Mode.Eval)
        predicted = np.argmax(logits.values, axis=1)
        result = evaluate(params, ds)

        assert result.accuracy == np.mean(predicted == labels)
        for c in range(3):
            assert result.per_class[c] == np.mean(predicted[labels == c] == c)

    def test_absent_classes_are_left_out(self, rng):
        params = self._one_hot_model(4)
        labels = np.array([0, 1, 1])
        ds = DomainDataset(rng.standard_normal((3, 4)), labels, frozenset(range(4)), DomainTag.Target)

        assert set(evaluate(params, ds).per_class) == {0, 1}


class TestCheckpoint:
    @pytest.fixture
    def params(self, rng):
        params = init_params(Architecture(input_dim=4, n_classes=3, hidden=(6, 5), embedding_size=3, f_blocks=2), rng)

        for block in params.f_blocks:
            block.bn.running_mean = rng.standard_normal(3)
            block.bn.running_var = rng.uniform(0.5, 2.0, 3)

        return params

    def test_round_trip(self, tmp_path, params, rng):
        path = save_checkpoint(params, tmp_path / "checkpoint").unwrap()
        loaded = load_checkpoint(path).unwrap()
        x = rng.standard_normal((7, 4))

        f_a, logits_a = forward(x, params, Mode.Eval)
        f_b, logits_b = forward(x, loaded, Mode.Eval)

        np.testing.assert_array_equal(f_a.values, f_b.values)
        np.testing.assert_array_equal(logits_a.values, logits_b.values)

        assert loaded.architecture == params.architecture

    def test_resave_is_byte_identical(self, tmp_path, params):
        first = save_checkpoint(params, tmp_path / "a").unwrap()
        second = save_checkpoint(load_checkpoint(first).unwrap(), tmp_path / "b").unwrap()

        assert first.read_bytes() == second.read_bytes()

    def test_truncated(self, tmp_path, params):
        path = save_checkpoint(params, tmp_path / "checkpoint").unwrap()
        lines = path.read_text().splitlines()
        path.write_text("\n".join(lines[:6]) + "\n")

        match load_checkpoint(path):
            case Err(error):
                assert error.id == "E012"
            case Ok(_):
                pytest.fail("a truncated checkpoint was accepted")

    def test_value_count_mismatch(self, tmp_path, params):
        path = save_checkpoint(params, tmp_path / "checkpoint").unwrap()
        lines = path.read_text().splitlines()
        index = next(i for i, line in enumerate(lines) if line.startswith("tensor "))
        lines[index + 1] = lines[index + 1].rsplit(" ", 1)[0]
        path.write_text("\n".join(lines) + "\n")

        assert load_checkpoint(path).unwrap_err().id == "E012"

    def test_wrong_tag(self, tmp_path):
        path = tmp_path / "checkpoint"
        path.write_text("some-other-format 3\n")

        error = load_checkpoint(path).unwrap_err()
        assert error.id == "E012"
        assert error.location == f"{path}:1"

    def test_missing_file(self, tmp_path):
        assert load_checkpoint(tmp_path / "absent").unwrap_err().id == "E012"

    def test_bytes_that_are_not_utf8(self, tmp_path, params):
        path = save_checkpoint(params, tmp_path / "checkpoint").unwrap()
        path.write_bytes(path.read_bytes() + b"\xff\xfe\n")

        assert load_checkpoint(path).unwrap_err().id == "E012"


class TestRun:
    def test_deterministic(self, tiny_config, small_domains):
        source, target = small_domains
        outcomes = [run(tiny_config(), source, target).unwrap() for _ in range(2)]

        (params_a, metrics_a), (params_b, metrics_b) = outcomes

        assert metrics_a == metrics_b
        for a, b in zip(params_a.tensors(), params_b.tensors()):
            np.testing.assert_array_equal(a.values, b.values)

    def test_metric_lengths(self, tiny_config, small_domains):
        source, target = small_domains
        cfg = tiny_config(epochs=3)
        _, metrics = run(cfg, source, target).unwrap()

        assert len(metrics.epochs) == 3
        assert len(metrics.iterations) == 3 * count_batches(40, 16)
        assert [r.iter for r in metrics.iterations] == list(range(1, len(metrics.iterations) + 1))
        assert metrics.is_finite()

    def test_source_only_has_no_norm_term(self, tiny_config, small_domains):
        source, target = small_domains
        _, metrics = run(tiny_config(Variant.SourceOnly), source, target).unwrap()

        for record in metrics.iterations:
            assert record.loss_norm == 0.0
            assert record.loss_total == record.loss_cls

    def test_target_labels_are_never_read(self, tiny_config, small_domains):
        source, target = small_domains
        scrambled = DomainDataset(
            target.features,
            np.random.default_rng(1).permutation(target.labels),
            target.label_space,
            DomainTag.Target,
        )

        _, honest = run(tiny_config(), source, target.unlabeled()).unwrap()
        _, other = run(tiny_config(), source, scrambled.unlabeled()).unwrap()

        assert honest.iterations == other.iterations
        assert honest.final.acc_tgt is None

    def test_dimension_mismatch(self, tiny_config, small_domains):
        source, _ = small_domains
        target = DomainDataset(np.zeros((10, 5)), None, frozenset(), DomainTag.Target)

        assert run(tiny_config(), source, target).unwrap_err().id == "E018"

    def test_checkpoint_reproduces_the_final_accuracy(self, tiny_config, small_domains, tmp_path):
        source, target = small_domains
        _, metrics = run(tiny_config(), source, target, checkpoint_dir=tmp_path).unwrap()

        params = load_checkpoint(tmp_path / "checkpoint").unwrap()

        assert evaluate(params, target).accuracy == metrics.final.acc_tgt
        assert evaluate(params, source).accuracy == metrics.final.acc_src

    def test_non_finite_loss_aborts(self, tiny_config, small_domains, tmp_path, monkeypatch):
        source, target = small_domains
        real = loop.adaptation_loss
        calls = []

        def poisoned(*args):
            calls.append(None)
            if len(calls) == 4:
                return LossBreakdown(Tensor(np.nan), np.nan, 0.0, 0.0)
            return real(*args)

        monkeypatch.setattr(loop, "adaptation_loss", poisoned)
        error = run(tiny_config(), source, target, checkpoint_dir=tmp_path).unwrap_err()

        assert error.id == "E013"
        assert "iteration 4" in error.summary
        assert str(tmp_path / "checkpoint") in error.hint_message

    def test_capped_matches_plain_below_every_norm(self, tiny_config, small_domains):
        source, target = small_domains
        plain = tiny_config(objective=ObjectiveConfig(Variant.Safn, lam=0.05, delta_r=1.0), epochs=4)
        capped = tiny_config(objective=ObjectiveConfig(Variant.SafnCapped, lam=0.05, radius=1e-9, delta_r=1.0), epochs=4)

        params_a, a = run(plain, source, target).unwrap()
        params_b, b = run(capped, source, target).unwrap()

        assert len(a.iterations) >= 10
        assert a == b
        for x, y in zip(params_a.tensors(), params_b.tensors()):
            np.testing.assert_array_equal(x.values, y.values)


# *- LONG TRAINING PROPERTIES -* #


SEEDS = (0, 1, 2)


@pytest.fixture(scope="module")
def canned():
    return gen_synthetic(ShiftSpec.canned())


@functools.cache
def _canned_run(variant: Variant, seed: int, partial: bool = False) -> RunMetrics:
    source, target = gen_synthetic(ShiftSpec.canned())

    if partial:
        source, target = make_partial(source, target, CANNED_PARTIAL_KEEP)

    cfg = TrainConfig(objective=ObjectiveConfig(variant), seed=seed)
    _, metrics = run(cfg, source, target).unwrap()

    return metrics


def _batch_norms(metrics: RunMetrics, epoch: int) -> tuple[float, float]:
    """
    Mean over one epoch of the per-iteration batch-mean norms, as (source, target).
    """

    records = [r for r in metrics.iterations if r.epoch == epoch]
    return float(np.mean([r.mean_norm_src for r in records])), float(np.mean([r.mean_norm_tgt for r in records]))


@pytest.mark.slow
@pytest.mark.parametrize("seed", SEEDS)
def test_hafn_pulls_both_norms_to_the_radius(seed):
    metrics = _canned_run(Variant.Hafn, seed)
    first_src, first_tgt = _batch_norms(metrics, 1)
    final_src, final_tgt = _batch_norms(metrics, len(metrics.epochs))

    assert 22.5 <= final_src <= 27.5
    assert 22.5 <= final_tgt <= 27.5
    assert abs(final_src - final_tgt) <= 0.2 * abs(first_src - first_tgt)

    assert 22.5 <= metrics.final.mean_norm_src <= 27.5
    assert 22.5 <= metrics.final.mean_norm_tgt <= 27.5


@pytest.mark.slow
@pytest.mark.parametrize("seed", SEEDS)
def test_safn_beats_source_only(seed):
    assert _canned_run(Variant.Safn, seed).final.acc_tgt > _canned_run(Variant.SourceOnly, seed).final.acc_tgt


@pytest.mark.slow
@pytest.mark.parametrize("seed", SEEDS)
def test_safn_beats_source_only_with_outlier_classes(seed):
    safn_run = _canned_run(Variant.Safn, seed, partial=True)
    source_only = _canned_run(Variant.SourceOnly, seed, partial=True)

    assert safn_run.final.acc_tgt > source_only.final.acc_tgt


@pytest.mark.slow
@pytest.mark.parametrize("seed", SEEDS)
def test_safn_enlarges_the_target_norms(seed):
    metrics = _canned_run(Variant.Safn, seed)
    assert metrics.final.mean_norm_tgt > metrics.epochs[0].mean_norm_tgt


@pytest.mark.slow
def test_norm_gap():
    source_only = _canned_run(Variant.SourceOnly, 0).final
    adapted = _canned_run(Variant.Safn, 0).final

    assert source_only.mean_norm_tgt < source_only.mean_norm_src
    assert abs(adapted.mean_norm_tgt - adapted.mean_norm_src) <= 0.25 * adapted.mean_norm_src
    assert adapted.mean_norm_tgt > source_only.mean_norm_tgt


@pytest.mark.slow
def test_safn_step_alone_grows_the_norms(canned):
    source, target = canned
    arch = Architecture(input_dim=16, n_classes=4, dropout_p=0.0)
    params = init_params(arch, np.random.default_rng(0))
    x = np.concatenate([source.features[:32], target.features[:32]])
    velocities = {}
    norms = []

    for _ in range(50):
        with Tape() as tape:
            f, _ = forward(x, params, Mode.Train)
            f_s, f_t = ag.rows(f, start=0, stop=32), ag.rows(f, start=32, stop=64)
            penalty = ag.scalar_mul(safn_penalty(f_s, f_t, 1.0), c=0.05)

        norms.append(float(np.linalg.norm(f.values, axis=1).mean()))
        backward(tape, penalty)

        for tensor in params.tensors():
            if tensor.grad is None:
                tensor.grad = np.zeros_like(tensor.values)

        sgd_step(params, velocities, 1e-3, 0.9)

    assert all(b > a for a, b in zip(norms, norms[1:]))


@pytest.mark.slow
def test_trained_checkpoint_reproduces_its_accuracy(canned, tmp_path):
    source, target = canned
    cfg = TrainConfig(objective=ObjectiveConfig(Variant.Safn), epochs=20)
    _, metrics = run(cfg, source, target, checkpoint_dir=tmp_path).unwrap()

    params = load_checkpoint(tmp_path / "checkpoint").unwrap()

    assert evaluate(params, target).accuracy == metrics.final.acc_tgt
