import threading

import numpy as np
import pytest
from pyafn import autograd as ag
from pyafn.autograd import backward
from pyafn.autograd import grad_check
from pyafn.autograd import inject_fault
from pyafn.autograd import Tape
from pyafn.autograd import Tensor
from pyafn.errsys.exceptions import TapeStateError


class TestTensor:
    def test_values_are_float64(self):
        assert Tensor([1, 2, 3]).values.dtype == np.float64

    def test_detach_drops_the_gradient_flag(self):
        x = Tensor.parameter([1.0, 2.0])
        d = x.detach()

        assert not d.requires_grad
        d.values[0] = 5.0
        assert x.values[0] == 1.0

    def test_copy_is_independent(self):
        x = Tensor.parameter([1.0])
        x.grad = np.array([3.0])
        y = x.copy()
        y.values[0] = 2.0
        y.grad[0] = 0.0

        assert x.values[0] == 1.0 and x.grad[0] == 3.0


class TestBackward:
    def test_sum_gradient_is_ones(self):
        x = Tensor.parameter([1.0, -2.0, 3.0])

        with Tape() as tape:
            loss = ag.sum(x)

        backward(tape, loss)
        np.testing.assert_array_equal(x.grad, [1.0, 1.0, 1.0])

    def test_mean_square(self):
        x = Tensor.parameter([1.0, 2.0])

        with Tape() as tape:
            loss = ag.mean(ag.square(x))

        backward(tape, loss)

        assert loss.item() == 2.5
        np.testing.assert_allclose(x.grad, [1.0, 2.0])

    def test_reused_tensor_accumulates(self):
        x = Tensor.parameter([1.0, 4.0])

        with Tape() as tape:
            loss = ag.sum(ag.add(x, x))

        backward(tape, loss)
        np.testing.assert_array_equal(x.grad, [2.0, 2.0])

    def test_gradient_adds_to_existing(self):
        x = Tensor.parameter([1.0])
        x.grad = np.array([10.0])

        with Tape() as tape:
            loss = ag.sum(ag.scalar_mul(x, c=3.0))

        backward(tape, loss)
        np.testing.assert_array_equal(x.grad, [13.0])

    def test_unreached_tensor_is_untouched(self):
        x = Tensor.parameter([1.0])
        unused = Tensor.parameter([2.0])
        unused.grad = np.array([7.0])

        with Tape() as tape:
            loss = ag.sum(ag.square(x))
            ag.square(unused)

        backward(tape, loss)
        np.testing.assert_array_equal(unused.grad, [7.0])

    def test_second_backward_fails(self):
        x = Tensor.parameter([1.0])

        with Tape() as tape:
            loss = ag.sum(x)

        backward(tape, loss)

        with pytest.raises(TapeStateError) as e:
            backward(tape, loss)

        assert e.value.error.id == "E005"

    def test_reset_allows_reuse(self):
        x = Tensor.parameter([1.0])
        tape = Tape()

        with tape:
            loss = ag.sum(x)
        backward(tape, loss)

        tape.reset()
        x.zero_grad()

        with tape:
            loss = ag.sum(ag.square(x))
        backward(tape, loss)

        np.testing.assert_array_equal(x.grad, [2.0])

    def test_non_scalar_loss(self):
        x = Tensor.parameter([1.0, 2.0])

        with Tape() as tape:
            y = ag.square(x)

        with pytest.raises(TapeStateError) as e:
            backward(tape, y)

        assert e.value.error.id == "E004"

    def test_loss_from_another_tape(self):
        x = Tensor.parameter([1.0])

        with Tape():
            loss = ag.sum(x)

        with Tape() as other:
            ag.sum(ag.square(x))

        with pytest.raises(TapeStateError) as e:
            backward(other, loss)

        assert e.value.error.id == "E005"

    def test_nothing_recorded_without_tape_or_parameters(self):
        with Tape() as tape:
            ag.sum(ag.square(Tensor.constant([1.0, 2.0])))

        assert len(tape) == 0

        x = Tensor.parameter([1.0])
        y = ag.square(x)

        assert y.requires_grad

    def test_tape_belongs_to_its_thread(self):
        tape = Tape()
        errors = []

        def worker():
            try:
                with tape:
                    pass
            except TapeStateError as e:
                errors.append(e)

        thread = threading.Thread(target=worker)
        thread.start()
        thread.join()

        assert len(errors) == 1

    def test_tapes_are_independent_across_threads(self):
        results = {}

        def worker(k: int):
            x = Tensor.parameter([float(k)])
            with Tape() as tape:
                loss = ag.sum(ag.square(x))
            backward(tape, loss)
            results[k] = x.grad[0]

        threads = [threading.Thread(target=worker, args=(k,)) for k in range(1, 5)]

        for thread in threads:
            thread.start()
        for thread in threads:
            thread.join()

        assert results == {k: 2.0 * k for k in range(1, 5)}

    def test_deterministic(self, rng):
        a = rng.standard_normal((3, 4))
        b = rng.standard_normal((4, 2))
        grads = []

        for _ in range(2):
            x, w = Tensor.parameter(a), Tensor.parameter(b)
            with Tape() as tape:
                loss = ag.mean(ag.square(ag.relu(ag.matmul(x, w))))
            backward(tape, loss)
            grads.append((x.grad, w.grad))

        np.testing.assert_array_equal(grads[0][0], grads[1][0])
        np.testing.assert_array_equal(grads[0][1], grads[1][1])


class TestGradCheck:
    def test_squared_norm(self):
        check = grad_check(lambda t: ag.sum(ag.square(t)), Tensor([1.0, 2.0, 3.0]))

        assert check.passed()
        assert check.max_error < 1e-8

    def test_negated_rule_is_caught(self):
        with inject_fault("square"):
            check = grad_check(lambda t: ag.sum(ag.square(t)), Tensor([1.0, 2.0, 3.0]))

        assert not check.passed()
        assert check.max_error == pytest.approx(2.0)

    def test_fault_is_restored(self):
        with inject_fault("relu"):
            pass

        check = grad_check(lambda t: ag.sum(ag.relu(t)), Tensor([0.5, 1.5]))
        assert check.passed()

    def test_non_finite_gradient_is_located(self):
        with np.errstate(over="ignore", invalid="ignore"):
            check = grad_check(lambda t: ag.sum(ag.exp(t)), Tensor([800.0]))

        assert not check.passed()
        assert check.nan_at is not None
        assert check.nan_at.index == (0,)
