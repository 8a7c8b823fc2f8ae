"""
Base tools for the network: modes, layer states and the parameter container.
"""
from collections.abc import Iterator
from dataclasses import dataclass
from dataclasses import field
from dataclasses import replace

import numpy as np
from pyafn.autograd import Tensor
from pyafn.constants import BN_EPS
from pyafn.constants import BN_MOMENTUM
from pyafn.constants import DEFAULT_DROPOUT_P
from pyafn.constants import DEFAULT_EMBEDDING_SIZE
from pyafn.constants import DEFAULT_HIDDEN
from pyafn.errsys.errors import E006
from pyafn.errsys.exceptions import ConfigError
from pyafn.py_utils import MapLikeEnum


class Mode(MapLikeEnum):
    Train = "train"
    Eval = "eval"


class DropoutVariant(MapLikeEnum):
    """
    Scale applied to the kept elements: 1/(1-p) preserves E[|x|_1], 1/sqrt(1-p) preserves E[|x|_2^2].
    """

    L1Preserving = "l1_preserving"
    L2Preserving = "l2_preserving"

    def scale(self, p: float) -> float:
        match self:
            case DropoutVariant.L1Preserving:
                return 1.0 / (1.0 - p)
            case DropoutVariant.L2Preserving:
                return 1.0 / np.sqrt(1.0 - p)


@dataclass
class DropoutSpec:
    p: float = DEFAULT_DROPOUT_P
    mode: Mode = Mode.Train
    variant: DropoutVariant = DropoutVariant.L2Preserving

    def __post_init__(self) -> None:
        if not 0.0 <= self.p < 1.0:
            raise ConfigError(E006("model.dropout_p", f"{self.p} is outside [0, 1)"))


@dataclass
class BatchNormState:
    gamma: Tensor
    beta: Tensor
    running_mean: np.ndarray
    running_var: np.ndarray
    momentum: float = BN_MOMENTUM
    eps: float = BN_EPS
    mode: Mode = Mode.Train

    @classmethod
    def fresh(cls, width: int, prefix: str) -> "BatchNormState":
        return cls(
            gamma=Tensor.parameter(np.ones(width), f"{prefix}.gamma"),
            beta=Tensor.parameter(np.zeros(width), f"{prefix}.beta"),
            running_mean=np.zeros(width),
            running_var=np.ones(width),
        )

    @property
    def width(self) -> int:
        return self.gamma.shape[0]


@dataclass
class Linear:
    weight: Tensor
    bias: Tensor

    @property
    def fan_in(self) -> int:
        return self.weight.shape[0]

    @property
    def fan_out(self) -> int:
        return self.weight.shape[1]


@dataclass
class FBlock:
    """
    One FC-BN-ReLU-Dropout block of the task-specific feature extractor.
    """

    linear: Linear
    bn: BatchNormState


@dataclass(frozen=True)
class Architecture:
    """
    Architecture descriptor; it is written into every checkpoint.
    """

    input_dim: int
    n_classes: int
    hidden: tuple[int, ...] = DEFAULT_HIDDEN
    embedding_size: int = DEFAULT_EMBEDDING_SIZE
    f_blocks: int = 1
    dropout_p: float = DEFAULT_DROPOUT_P
    dropout_variant: DropoutVariant = DropoutVariant.L2Preserving

    def __post_init__(self) -> None:
        checks = {
            "model.input_dim": self.input_dim >= 1,
            "model.n_classes": self.n_classes >= 2,
            "model.hidden": all(w >= 1 for w in self.hidden),
            "model.embedding_size": self.embedding_size >= 1,
            "model.f_blocks": self.f_blocks >= 1,
            "model.dropout_p": 0.0 <= self.dropout_p < 1.0,
        }

        for key, ok in checks.items():
            if not ok:
                raise ConfigError(E006(key, f"{getattr(self, key.split('.')[1])!r} is out of range"))


@dataclass
class ModelParams:
    """
    All learnable tensors of the backbone G and the classifier F = F_y ∘ F_f.

    Construction validates that consecutive layer dimensions chain, so a bad
    architecture fails here rather than in the middle of a forward pass.
    """

    architecture: Architecture
    g_layers: list[Linear]
    f_blocks: list[FBlock]
    y_layer: Linear
    dropout: DropoutSpec = field(init=False)

    def __post_init__(self) -> None:
        arch = self.architecture
        self.dropout = DropoutSpec(arch.dropout_p, Mode.Train, arch.dropout_variant)

        width = arch.input_dim

        for i, layer in enumerate(self.g_layers):
            self._chain(f"g.{i}", width, layer)
            width = layer.fan_out

        for i, block in enumerate(self.f_blocks):
            self._chain(f"f.{i}", width, block.linear)
            width = block.linear.fan_out

            if block.bn.width != width:
                raise ConfigError(E006(f"f.{i}.gamma", f"width {block.bn.width} does not match {width}"))

        if width != arch.embedding_size:
            raise ConfigError(E006("model.embedding_size", f"F_f produces {width}, expected {arch.embedding_size}"))

        self._chain("y", width, self.y_layer)

        if self.y_layer.fan_out != arch.n_classes:
            raise ConfigError(E006("y.weight", f"{self.y_layer.fan_out} outputs for {arch.n_classes} classes"))

    @staticmethod
    def _chain(name: str, width: int, layer: Linear) -> None:
        if layer.fan_in != width:
            raise ConfigError(E006(f"{name}.weight", f"expects {layer.fan_in} inputs, previous layer gives {width}"))

        if layer.bias.shape != (layer.fan_out,):
            raise ConfigError(E006(f"{name}.bias", f"shape {list(layer.bias.shape)} for {layer.fan_out} outputs"))

    @property
    def embedding_size(self) -> int:
        return self.architecture.embedding_size

    def set_mode(self, mode: Mode) -> None:
        self.dropout.mode = mode

        for block in self.f_blocks:
            block.bn.mode = mode

    def named_tensors(self) -> Iterator[tuple[str, Tensor]]:
        """
        Learnable tensors in a fixed order.
        """

        for i, layer in enumerate(self.g_layers):
            yield f"g.{i}.weight", layer.weight
            yield f"g.{i}.bias", layer.bias

        for i, block in enumerate(self.f_blocks):
            yield f"f.{i}.weight", block.linear.weight
            yield f"f.{i}.bias", block.linear.bias
            yield f"f.{i}.gamma", block.bn.gamma
            yield f"f.{i}.beta", block.bn.beta

        yield "y.weight", self.y_layer.weight
        yield "y.bias", self.y_layer.bias

    def named_buffers(self) -> Iterator[tuple[str, np.ndarray]]:
        for i, block in enumerate(self.f_blocks):
            yield f"f.{i}.running_mean", block.bn.running_mean
            yield f"f.{i}.running_var", block.bn.running_var

    def tensors(self) -> list[Tensor]:
        return [t for _, t in self.named_tensors()]

    def zero_grad(self) -> None:
        for tensor in self.tensors():
            tensor.zero_grad()

    def copy(self) -> "ModelParams":
        def lin(layer: Linear) -> Linear:
            return Linear(layer.weight.copy(), layer.bias.copy())

        blocks = [
            FBlock(
                lin(block.linear),
                replace(
                    block.bn,
                    gamma=block.bn.gamma.copy(),
                    beta=block.bn.beta.copy(),
                    running_mean=block.bn.running_mean.copy(),
                    running_var=block.bn.running_var.copy(),
                ),
            )
            for block in self.f_blocks
        ]

        return ModelParams(
            self.architecture,
            [lin(layer) for layer in self.g_layers],
            blocks,
            lin(self.y_layer),
        )
