"""
Primitive operations. Each forward rule works on raw float64 arrays and returns the output
plus whatever the backward rule needs; shape checks happen here so that errors name both shapes.
"""
from typing import Any

import numpy as np
from numpy.typing import NDArray
from pyafn.autograd.tools import Array
from pyafn.autograd.tools import primitive
from pyafn.autograd.tools import primitives
from pyafn.autograd.tools import Tensor
from pyafn.constants import NORM_EPS
from pyafn.errsys.errors import E001
from pyafn.errsys.errors import E002
from pyafn.errsys.errors import E003
from pyafn.errsys.errors import E010
from pyafn.errsys.exceptions import DataError
from pyafn.errsys.exceptions import NumericDomainError
from pyafn.errsys.exceptions import ShapeError


Saved = dict[str, Any]


def _same_shape(op: str, a: Array, b: Array) -> None:
    if a.shape != b.shape:
        raise ShapeError(E001(op, a.shape, b.shape))


def _rank(op: str, x: Array, rank: int) -> None:
    if x.ndim != rank:
        raise ShapeError(E003(op, rank, x.shape))


# *- LINEAR ALGEBRA -* #


@primitive("matmul")
def matmul(a: Array, b: Array) -> tuple[Array, Saved]:
    _rank("matmul", a, 2)
    _rank("matmul", b, 2)

    if a.shape[1] != b.shape[0]:
        raise ShapeError(E001("matmul", a.shape, b.shape))

    return a @ b, {}


@matmul.defbackward
def _(g: Array, inputs: tuple[Array, ...], _out: Array, _saved: Saved):
    a, b = inputs
    return g @ b.T, a.T @ g


@primitive("add_row")
def add_row(x: Array, row: Array) -> tuple[Array, Saved]:
    """
    Add a length-d vector to every row of a batch × d matrix (bias add).
    """

    _rank("add_row", x, 2)

    if row.shape != (x.shape[1],):
        raise ShapeError(E001("add_row", x.shape, row.shape))

    return x + row, {}


@add_row.defbackward
def _(g: Array, _inputs: tuple[Array, ...], _out: Array, _saved: Saved):
    return g, g.sum(axis=0)


# *- ELEMENTWISE -* #


@primitive("add")
def add(a: Array, b: Array) -> tuple[Array, Saved]:
    _same_shape("add", a, b)
    return a + b, {}


@add.defbackward
def _(g: Array, _inputs: tuple[Array, ...], _out: Array, _saved: Saved):
    return g, g


@primitive("sub")
def sub(a: Array, b: Array) -> tuple[Array, Saved]:
    _same_shape("sub", a, b)
    return a - b, {}


@sub.defbackward
def _(g: Array, _inputs: tuple[Array, ...], _out: Array, _saved: Saved):
    return g, -g


@primitive("mul")
def mul(a: Array, b: Array) -> tuple[Array, Saved]:
    _same_shape("mul", a, b)
    return a * b, {}


@mul.defbackward
def _(g: Array, inputs: tuple[Array, ...], _out: Array, _saved: Saved):
    a, b = inputs
    return g * b, g * a


@primitive("relu")
def relu(x: Array) -> tuple[Array, Saved]:
    return np.maximum(x, 0.0), {}


@relu.defbackward
def _(g: Array, inputs: tuple[Array, ...], _out: Array, _saved: Saved):
    (x,) = inputs
    # subgradient 0 at exactly 0
    return (g * (x > 0.0),)


@primitive("square")
def square(x: Array) -> tuple[Array, Saved]:
    return x * x, {}


@square.defbackward
def _(g: Array, inputs: tuple[Array, ...], _out: Array, _saved: Saved):
    (x,) = inputs
    return (2.0 * x * g,)


@primitive("sqrt")
def sqrt(x: Array, *, eps: float = 0.0) -> tuple[Array, Saved]:
    shifted = x + eps

    if np.any(shifted < 0.0):
        raise NumericDomainError(E002("sqrt", "negative input without an eps guard"))

    return np.sqrt(shifted), {}


@sqrt.defbackward
def _(g: Array, _inputs: tuple[Array, ...], out: Array, _saved: Saved):
    return (g / (2.0 * out),)


@primitive("exp")
def exp(x: Array) -> tuple[Array, Saved]:
    return np.exp(x), {}


@exp.defbackward
def _(g: Array, _inputs: tuple[Array, ...], out: Array, _saved: Saved):
    return (g * out,)


@primitive("log")
def log(x: Array, *, eps: float = 0.0) -> tuple[Array, Saved]:
    shifted = x + eps

    if np.any(shifted <= 0.0):
        raise NumericDomainError(E002("log", "nonpositive input without an eps guard"))

    return np.log(shifted), {"shifted": shifted}


@log.defbackward
def _(g: Array, _inputs: tuple[Array, ...], _out: Array, saved: Saved):
    return (g / saved["shifted"],)


@primitive("scalar_mul")
def scalar_mul(x: Array, *, c: float) -> tuple[Array, Saved]:
    return x * c, {"c": c}


@scalar_mul.defbackward
def _(g: Array, _inputs: tuple[Array, ...], _out: Array, saved: Saved):
    return (g * saved["c"],)


@primitive("scalar_add")
def scalar_add(x: Array, *, c: float) -> tuple[Array, Saved]:
    return x + c, {}


@scalar_add.defbackward
def _(g: Array, _inputs: tuple[Array, ...], _out: Array, _saved: Saved):
    return (g,)


@primitive("masked_scale")
def masked_scale(x: Array, *, mask: Array) -> tuple[Array, Saved]:
    """
    Multiply by a constant array (a dropout mask already carrying its scale).
    """

    _same_shape("masked_scale", x, mask)
    return x * mask, {"mask": mask}


@masked_scale.defbackward
def _(g: Array, _inputs: tuple[Array, ...], _out: Array, saved: Saved):
    return (g * saved["mask"],)


# *- REDUCTIONS -* #


@primitive("sum")
def sum(x: Array) -> tuple[Array, Saved]:
    return np.asarray(x.sum()), {}


@sum.defbackward
def _(g: Array, inputs: tuple[Array, ...], _out: Array, _saved: Saved):
    (x,) = inputs
    return (np.full_like(x, g),)


@primitive("mean")
def mean(x: Array) -> tuple[Array, Saved]:
    if x.size == 0:
        raise ShapeError(E003("mean", 1, x.shape))

    return np.asarray(x.mean()), {}


@mean.defbackward
def _(g: Array, inputs: tuple[Array, ...], _out: Array, _saved: Saved):
    (x,) = inputs
    return (np.full_like(x, g / x.size),)


@primitive("row_l2_norm")
def row_l2_norm(x: Array, *, eps: float = NORM_EPS) -> tuple[Array, Saved]:
    """
    Per-row sqrt(sum_j x_ij^2 + eps) of a batch × features matrix.
    """

    _rank("row_l2_norm", x, 2)
    return np.sqrt(np.einsum("ij,ij->i", x, x) + eps), {}


@row_l2_norm.defbackward
def _(g: Array, inputs: tuple[Array, ...], out: Array, _saved: Saved):
    (x,) = inputs
    return (x * (g / out)[:, None],)


# *- CLASSIFICATION -* #


@primitive("log_softmax")
def log_softmax(x: Array) -> tuple[Array, Saved]:
    _rank("log_softmax", x, 2)

    shifted = x - x.max(axis=1, keepdims=True)
    out = shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))

    return out, {}


@log_softmax.defbackward
def _(g: Array, _inputs: tuple[Array, ...], out: Array, _saved: Saved):
    return (g - np.exp(out) * g.sum(axis=1, keepdims=True),)


@primitive("pick")
def pick(x: Array, *, index: NDArray[np.int64]) -> tuple[Array, Saved]:
    """
    Row-wise gather: out_i = x[i, index_i].
    """

    _rank("pick", x, 2)

    if index.shape != (x.shape[0],):
        raise ShapeError(E001("pick", x.shape, index.shape))

    bad = np.flatnonzero((index < 0) | (index >= x.shape[1]))

    if bad.size:
        i = int(bad[0])
        raise DataError(E010(int(index[i]), f"sample {i}", range(x.shape[1])))

    return x[np.arange(x.shape[0]), index], {"index": index}


@pick.defbackward
def _(g: Array, inputs: tuple[Array, ...], _out: Array, saved: Saved):
    (x,) = inputs
    dx = np.zeros_like(x)
    dx[np.arange(x.shape[0]), saved["index"]] = g
    return (dx,)


@primitive("rows")
def rows(x: Array, *, start: int, stop: int) -> tuple[Array, Saved]:
    """
    The contiguous block of rows x[start:stop].
    """

    _rank("rows", x, 2)

    if not 0 <= start < stop <= x.shape[0]:
        raise ShapeError(E001("rows", x.shape, (start, stop)))

    return x[start:stop].copy(), {"start": start, "stop": stop}


@rows.defbackward
def _(g: Array, inputs: tuple[Array, ...], _out: Array, saved: Saved):
    (x,) = inputs
    dx = np.zeros_like(x)
    dx[saved["start"] : saved["stop"]] = g
    return (dx,)


# *- NORMALIZATION -* #


@primitive("batchnorm")
def batchnorm(
    x: Array,
    gamma: Array,
    beta: Array,
    *,
    eps: float,
    running: tuple[Array, Array] | None = None,
) -> tuple[Array, Saved]:
    """
    Batch normalization. With `running=None` the biased batch statistics are used
    (train mode), otherwise the given (mean, var) pair (eval mode).
    """

    _rank("batchnorm", x, 2)

    if gamma.shape != (x.shape[1],) or beta.shape != gamma.shape:
        raise ShapeError(E001("batchnorm", x.shape, gamma.shape))

    if running is None:
        mu = x.mean(axis=0)
        var = x.var(axis=0)
    else:
        mu, var = running

    inv_std = 1.0 / np.sqrt(var + eps)
    x_hat = (x - mu) * inv_std

    return gamma * x_hat + beta, {"x_hat": x_hat, "inv_std": inv_std, "batch": running is None}


@batchnorm.defbackward
def _(g: Array, inputs: tuple[Array, ...], _out: Array, saved: Saved):
    _x, gamma, _beta = inputs
    x_hat, inv_std = saved["x_hat"], saved["inv_std"]

    dgamma = (g * x_hat).sum(axis=0)
    dbeta = g.sum(axis=0)
    dx_hat = g * gamma

    if not saved["batch"]:
        return dx_hat * inv_std, dgamma, dbeta

    n = g.shape[0]
    dx = (inv_std / n) * (
        n * dx_hat - dx_hat.sum(axis=0) - x_hat * (dx_hat * x_hat).sum(axis=0)
    )

    return dx, dgamma, dbeta


# *- DISPATCH -* #


ELEMENTWISE_KINDS = ("relu", "add", "sub", "mul", "square", "sqrt", "exp", "log", "scalar_mul", "scalar_add")
REDUCTION_KINDS = ("sum", "mean", "row_l2_norm")


def elementwise(kind: str, *operands: Tensor, c: float | None = None) -> Tensor:
    """
    Apply an elementwise primitive by name; `c` is the constant of the scalar kinds.
    """

    if kind not in ELEMENTWISE_KINDS:
        raise KeyError(f"unknown elementwise kind {kind!r}")

    if kind in {"scalar_mul", "scalar_add"}:
        if c is None:
            raise TypeError(f"`{kind}` needs a scalar operand `c`")
        return primitives[kind](*operands, c=c)

    return primitives[kind](*operands)


def reduction(kind: str, x: Tensor) -> Tensor:
    if kind not in REDUCTION_KINDS:
        raise KeyError(f"unknown reduction kind {kind!r}")

    return primitives[kind](x)
