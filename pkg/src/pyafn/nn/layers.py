"""
Layers and model assembly: linear, batch normalization, both dropout variants and the
G → F_f → F_y forward pass.
"""
import numpy as np
from pyafn import autograd as ag
from pyafn.autograd import Tensor
from pyafn.errsys.errors import E001
from pyafn.errsys.errors import E006
from pyafn.errsys.errors import E017
from pyafn.errsys.exceptions import ConfigError
from pyafn.errsys.exceptions import ShapeError
from pyafn.nn.tools import Architecture
from pyafn.nn.tools import BatchNormState
from pyafn.nn.tools import DropoutSpec
from pyafn.nn.tools import FBlock
from pyafn.nn.tools import Linear
from pyafn.nn.tools import Mode
from pyafn.nn.tools import ModelParams


def dropout(
    x: Tensor,
    spec: DropoutSpec,
    rng: np.random.Generator | None,
    *,
    mask: np.ndarray | None = None,
) -> Tensor:
    """
    Zero each element with probability p and rescale the kept ones by the variant's factor.

    `mask` forces the keep pattern (1 = keep) instead of drawing it from `rng`.
    Eval mode and p = 0 return `x` itself.
    """

    if spec.mode is Mode.Eval or spec.p == 0.0:
        return x

    if mask is None:
        if rng is None:
            raise ConfigError(E006("train.seed", "train-mode dropout needs a random generator"))
        keep = rng.random(x.shape) >= spec.p
    else:
        keep = np.asarray(mask, dtype=bool)

        if keep.shape != x.shape:
            raise ShapeError(E001("dropout", x.shape, keep.shape))

    return ag.masked_scale(x, mask=keep * spec.variant.scale(spec.p))


def batchnorm(x: Tensor, state: BatchNormState) -> Tensor:
    """
    Normalize per feature. Train mode uses the biased batch statistics and folds them into
    the running averages; eval mode only reads the running statistics.
    """

    if state.mode is Mode.Eval:
        running = (state.running_mean, state.running_var)
        return ag.batchnorm(x, state.gamma, state.beta, eps=state.eps, running=running)

    if x.ndim == 2 and x.shape[0] < 2:
        raise ShapeError(E017("batchnorm", x.shape[0]))

    out = ag.batchnorm(x, state.gamma, state.beta, eps=state.eps)

    m = state.momentum
    state.running_mean = (1.0 - m) * state.running_mean + m * x.values.mean(axis=0)
    state.running_var = (1.0 - m) * state.running_var + m * x.values.var(axis=0)

    return out


def linear(x: Tensor, layer: Linear) -> Tensor:
    return ag.add_row(ag.matmul(x, layer.weight), layer.bias)


def forward(
    x: Tensor | np.ndarray,
    params: ModelParams,
    mode: Mode,
    rng: np.random.Generator | None = None,
) -> tuple[Tensor, Tensor]:
    """
    Return the bottleneck features f = F_f(G(x)) and the raw logits F_y(f).

    The softmax is left to the losses. In train mode every row of `x` shares the batch
    normalization statistics, so a joint source and target batch is normalized as one.
    """

    if not isinstance(x, Tensor):
        x = Tensor.constant(x)

    if x.ndim != 2 or x.shape[1] != params.architecture.input_dim:
        raise ShapeError(E001("forward", x.shape, (params.architecture.input_dim,)))

    params.set_mode(mode)

    h = x

    for layer in params.g_layers:
        h = ag.relu(linear(h, layer))

    for block in params.f_blocks:
        h = linear(h, block.linear)
        h = batchnorm(h, block.bn)
        h = ag.relu(h)
        h = dropout(h, params.dropout, rng)

    logits = linear(h, params.y_layer)

    return h, logits


def _glorot(rng: np.random.Generator, fan_in: int, fan_out: int, name: str) -> Linear:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    weight = rng.uniform(-limit, limit, size=(fan_in, fan_out))
    return Linear(
        Tensor.parameter(weight, f"{name}.weight"),
        Tensor.parameter(np.zeros(fan_out), f"{name}.bias"),
    )


def init_params(architecture: Architecture, rng: np.random.Generator) -> ModelParams:
    """
    Glorot-uniform weights, zero biases, BN at gamma = 1 and beta = 0.
    """

    g_layers: list[Linear] = []
    width = architecture.input_dim

    for i, out in enumerate(architecture.hidden):
        g_layers.append(_glorot(rng, width, out, f"g.{i}"))
        width = out

    f_blocks: list[FBlock] = []

    for i in range(architecture.f_blocks):
        layer = _glorot(rng, width, architecture.embedding_size, f"f.{i}")
        f_blocks.append(FBlock(layer, BatchNormState.fresh(architecture.embedding_size, f"f.{i}")))
        width = architecture.embedding_size

    y_layer = _glorot(rng, width, architecture.n_classes, "y")

    return ModelParams(architecture, g_layers, f_blocks, y_layer)
