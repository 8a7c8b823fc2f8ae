"""
Tools to build the autograd engine: the Tensor value type, the define-by-run Tape and the
primitive registry that binds a forward rule to its backward rule.
"""
import threading
from collections.abc import Callable
from collections.abc import Iterator
from contextlib import contextmanager
from contextvars import ContextVar
from dataclasses import dataclass
from dataclasses import field
from typing import Any
from typing import Self

import numpy as np
from numpy.typing import ArrayLike
from numpy.typing import NDArray
from pyafn.errsys.errors import E004
from pyafn.errsys.errors import E005
from pyafn.errsys.exceptions import TapeStateError


Array = NDArray[np.float64]

ForwardRule = Callable[..., tuple[Array, dict[str, Any]]]
BackwardRule = Callable[
    [Array, tuple[Array, ...], Array, dict[str, Any]],
    tuple[Array | None, ...],
]


# *- TENSOR -* #


class Tensor:
    """
    Dense n-dimensional float64 array that can take part in a gradient tape.

    `grad`, when present, always has the shape of `values`.
    """

    __slots__ = ("values", "requires_grad", "grad", "name")

    def __init__(
        self,
        values: ArrayLike,
        *,
        requires_grad: bool = False,
        name: str | None = None,
    ) -> None:
        self.values: Array = np.array(values, dtype=np.float64)
        self.requires_grad = requires_grad
        self.grad: Array | None = None
        self.name = name

    @classmethod
    def constant(cls, values: ArrayLike) -> Self:
        return cls(values, requires_grad=False)

    @classmethod
    def parameter(cls, values: ArrayLike, name: str | None = None) -> Self:
        return cls(values, requires_grad=True, name=name)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.values.shape

    @property
    def ndim(self) -> int:
        return self.values.ndim

    def item(self) -> float:
        return float(self.values.reshape(-1)[0]) if self.values.size == 1 else float("nan")

    def detach(self) -> "Tensor":
        """
        Same forward value, excluded from gradient flow.
        """

        return Tensor(self.values.copy(), requires_grad=False)

    def zero_grad(self) -> None:
        self.grad = None

    def copy(self) -> "Tensor":
        clone = Tensor(self.values.copy(), requires_grad=self.requires_grad, name=self.name)
        clone.grad = None if self.grad is None else self.grad.copy()
        return clone

    def __repr__(self) -> str:
        label = f" {self.name}" if self.name else ""
        flag = ", requires_grad" if self.requires_grad else ""
        return f"<Tensor{label} {list(self.shape)}{flag}>"


# *- TAPE -* #


@dataclass
class Node:
    primitive: "Primitive"
    inputs: tuple[Tensor, ...]
    output: Tensor
    saved: dict[str, Any]


_current_tape: ContextVar["Tape | None"] = ContextVar("current_tape", default=None)


def current_tape() -> "Tape | None":
    return _current_tape.get()


class Tape:
    """
    Ordered record of the operations executed while the tape is active.

    Usage:

    >>> with Tape() as tape:
    ...     loss = mean(square(x))
    >>> backward(tape, loss)

    A tape belongs to the thread that created it and can be consumed by
    `backward` only once until `reset` is called.
    """

    def __init__(self) -> None:
        self.nodes: list[Node] = []
        self.consumed: bool = False
        self._owner = threading.get_ident()
        self._tokens: list[Any] = []

    def __enter__(self) -> Self:
        self._check_thread()
        self._tokens.append(_current_tape.set(self))
        return self

    def __exit__(self, *_: object) -> None:
        _current_tape.reset(self._tokens.pop())

    def __len__(self) -> int:
        return len(self.nodes)

    def _check_thread(self) -> None:
        if threading.get_ident() != self._owner:
            raise TapeStateError(E005("tape used outside the thread that created it"))

    def record(self, node: Node) -> None:
        self._check_thread()

        if self.consumed:
            raise TapeStateError(E005("recording on a consumed tape"))

        self.nodes.append(node)

    def reset(self) -> None:
        """
        Forget every recorded node so the tape can be reused.
        """

        self.nodes = []
        self.consumed = False


def backward(tape: Tape, loss: Tensor) -> None:
    """
    Accumulate d(loss)/d(t) into `t.grad` for every `requires_grad` tensor reachable from `loss`.

    Gradients of a tensor used along several paths are summed. Tensors that do not
    reach the loss keep their current `grad` untouched.
    """

    tape._check_thread()

    if tape.consumed:
        raise TapeStateError(E005("backward already ran on this tape"))

    if loss.values.size != 1:
        raise TapeStateError(E004(loss.shape))

    if not any(node.output is loss for node in tape.nodes):
        raise TapeStateError(E005("the loss was not produced on this tape"))

    tape.consumed = True

    grads: dict[int, Array] = {id(loss): np.ones_like(loss.values)}
    owners: dict[int, Tensor] = {id(loss): loss}

    for node in reversed(tape.nodes):
        upstream = grads.get(id(node.output))

        if upstream is None:
            continue

        input_values = tuple(t.values for t in node.inputs)
        local = node.primitive.backward_rule(
            upstream,
            input_values,
            node.output.values,
            node.saved,
        )

        for tensor, g in zip(node.inputs, local):
            if g is None or not tensor.requires_grad:
                continue

            g = node.primitive.sign * g
            key = id(tensor)

            if key in grads:
                grads[key] = grads[key] + g
            else:
                grads[key] = g
                owners[key] = tensor

    for key, g in grads.items():
        tensor = owners[key]

        if not tensor.requires_grad:
            continue

        g = np.broadcast_to(g, tensor.shape).astype(np.float64, copy=True)
        tensor.grad = g if tensor.grad is None else tensor.grad + g


# *- PRIMITIVES -* #


@dataclass
class Primitive:
    """
    A differentiable operation: a forward rule over raw arrays and its backward rule.

    Calling a primitive on tensors computes the forward value and, when a tape is
    active and some input requires a gradient, records a node on that tape.
    """

    name: str
    forward_rule: ForwardRule
    backward_rule: BackwardRule = field(init=False)
    sign: float = field(default=1.0, init=False)

    def __call__(self, *inputs: Tensor, **params: Any) -> Tensor:
        values, saved = self.forward_rule(*(t.values for t in inputs), **params)
        requires_grad = any(t.requires_grad for t in inputs)
        output = Tensor(values, requires_grad=requires_grad)

        tape = current_tape()

        if tape is not None and requires_grad:
            tape.record(Node(self, inputs, output, saved))

        return output

    def defbackward(self, rule: BackwardRule) -> BackwardRule:
        self.backward_rule = rule
        return rule


primitives: dict[str, Primitive] = {}


def primitive(name: str) -> Callable[[ForwardRule], Primitive]:
    def decorator(rule: ForwardRule) -> Primitive:
        prim = Primitive(name, rule)
        primitives[name] = prim
        return prim

    return decorator


@contextmanager
def inject_fault(name: str) -> Iterator[Primitive]:
    """
    Flip the sign of one primitive's backward rule while the context is active.

    Used by the self-check to prove the gradient checks catch a broken rule.
    """

    prim = primitives[name]
    prim.sign = -1.0

    try:
        yield prim
    finally:
        prim.sign = 1.0
