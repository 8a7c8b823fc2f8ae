"""
Mini-batch SGD with heavy-ball momentum.
"""
from collections.abc import Iterable
from collections.abc import Mapping
from typing import TypeVar

import numpy as np
from pyafn.autograd import Tensor
from pyafn.errsys.errors import E014
from pyafn.errsys.exceptions import InternalError
from pyafn.nn import ModelParams


Velocities = dict[str, np.ndarray]
P = TypeVar("P", ModelParams, Mapping[str, Tensor])


def _named(params: ModelParams | Mapping[str, Tensor]) -> Iterable[tuple[str, Tensor]]:
    if isinstance(params, ModelParams):
        return params.named_tensors()
    return params.items()


def sgd_step(
    params: P,
    velocities: Velocities,
    lr: float,
    momentum: float,
) -> P:
    """
    v <- momentum·v + grad; θ <- θ - lr·v; then clear the gradients.

    Every learnable tensor must carry a gradient; `velocities` is updated in place.
    """

    named = list(_named(params))

    for name, tensor in named:
        if tensor.grad is None:
            raise InternalError(E014(name))

    for name, tensor in named:
        assert tensor.grad is not None
        v = velocities.get(name)
        v = tensor.grad.copy() if v is None else momentum * v + tensor.grad
        velocities[name] = v
        tensor.values -= lr * v
        tensor.zero_grad()

    return params
