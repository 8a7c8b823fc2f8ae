"""
Central finite-difference verification of the backward rules.
"""
from collections.abc import Callable
from collections.abc import Sequence
from typing import NamedTuple

import numpy as np
from pyafn.autograd.tools import backward
from pyafn.autograd.tools import Tape
from pyafn.autograd.tools import Tensor
from pyafn.constants import GRAD_CHECK_H
from pyafn.constants import GRAD_CHECK_TOL


class Coordinate(NamedTuple):
    tensor: int
    index: tuple[int, ...]


class GradCheck(NamedTuple):
    max_error: float
    worst: Coordinate | None
    nan_at: Coordinate | None

    def passed(self, tol: float = GRAD_CHECK_TOL) -> bool:
        return self.nan_at is None and self.max_error < tol

    def describe(self) -> str:
        if self.nan_at is not None:
            return f"NaN at tensor {self.nan_at.tensor}, index {self.nan_at.index}"
        return f"max relative error {self.max_error:.3e}"


def analytic_grads(fn: Callable[[], Tensor], tensors: Sequence[Tensor]) -> list[np.ndarray]:
    for t in tensors:
        t.zero_grad()

    with Tape() as tape:
        loss = fn()

    backward(tape, loss)

    return [np.zeros_like(t.values) if t.grad is None else t.grad.copy() for t in tensors]


def grad_check_tensors(
    fn: Callable[[], Tensor],
    tensors: Sequence[Tensor],
    h: float = GRAD_CHECK_H,
) -> GradCheck:
    """
    Compare autograd against central differences for every coordinate of `tensors`.

    `fn` must rebuild the scalar from the current tensor values on every call.
    The error of a coordinate is |analytic - central| / max(1, |analytic|, |central|).
    """

    analytic = analytic_grads(fn, tensors)

    max_error = 0.0
    worst: Coordinate | None = None

    for k, (tensor, grad) in enumerate(zip(tensors, analytic)):
        values = tensor.values

        for index in np.ndindex(values.shape):
            original = values[index]

            values[index] = original + h
            plus = fn().item()
            values[index] = original - h
            minus = fn().item()
            values[index] = original

            central = (plus - minus) / (2.0 * h)
            exact = float(grad[index])

            if not (np.isfinite(central) and np.isfinite(exact)):
                return GradCheck(float("nan"), worst, Coordinate(k, index))

            error = abs(exact - central) / max(1.0, abs(exact), abs(central))

            if error > max_error or worst is None:
                max_error = max(error, max_error)
                worst = Coordinate(k, index)

    return GradCheck(max_error, worst, None)


def grad_check(
    fn: Callable[[Tensor], Tensor],
    point: Tensor,
    h: float = GRAD_CHECK_H,
) -> GradCheck:
    """
    Gradient check of a scalar-valued tensor function at `point`.
    """

    point.requires_grad = True
    return grad_check_tensors(lambda: fn(point), [point], h)
