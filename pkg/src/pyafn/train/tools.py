"""
Training configuration and the metrics a run records.
"""
import math
from dataclasses import dataclass
from dataclasses import field
from typing import NamedTuple

from pyafn.constants import DEFAULT_BATCH_SIZE
from pyafn.constants import DEFAULT_DROPOUT_P
from pyafn.constants import DEFAULT_EMBEDDING_SIZE
from pyafn.constants import DEFAULT_EPOCHS
from pyafn.constants import DEFAULT_HIDDEN
from pyafn.constants import DEFAULT_LEARNING_RATE
from pyafn.constants import DEFAULT_MOMENTUM
from pyafn.errsys.errors import E006
from pyafn.errsys.exceptions import ConfigError
from pyafn.nn import Architecture
from pyafn.nn import DropoutVariant
from pyafn.objectives import ObjectiveConfig


@dataclass(frozen=True)
class TrainConfig:
    objective: ObjectiveConfig = field(default_factory=ObjectiveConfig)
    learning_rate: float = DEFAULT_LEARNING_RATE
    momentum: float = DEFAULT_MOMENTUM
    epochs: int = DEFAULT_EPOCHS
    batch_size: int = DEFAULT_BATCH_SIZE
    seed: int = 0
    hidden: tuple[int, ...] = DEFAULT_HIDDEN
    embedding_size: int = DEFAULT_EMBEDDING_SIZE
    f_blocks: int = 1
    dropout_p: float = DEFAULT_DROPOUT_P
    dropout_variant: DropoutVariant = DropoutVariant.L2Preserving

    def __post_init__(self) -> None:
        checks = {
            "train.learning_rate": (self.learning_rate > 0.0, "must be positive"),
            "train.momentum": (0.0 <= self.momentum < 1.0, "must lie in [0, 1)"),
            "train.epochs": (self.epochs >= 1, "must be at least 1"),
            "train.batch_size": (self.batch_size >= 2, "must be at least 2"),
            "train.seed": (self.seed >= 0, "must be nonnegative"),
        }

        for key, (ok, reason) in checks.items():
            if not ok:
                raise ConfigError(E006(key, reason))

    def architecture(self, input_dim: int, n_classes: int) -> Architecture:
        return Architecture(
            input_dim=input_dim,
            n_classes=n_classes,
            hidden=self.hidden,
            embedding_size=self.embedding_size,
            f_blocks=self.f_blocks,
            dropout_p=self.dropout_p,
            dropout_variant=self.dropout_variant,
        )


class IterationRecord(NamedTuple):
    iter: int
    epoch: int
    loss_total: float
    loss_cls: float
    loss_norm: float
    loss_ent: float
    mean_norm_src: float
    mean_norm_tgt: float
    mmfnd_abs: float


class EpochRecord(NamedTuple):
    """
    Accuracies are fractions; target ones are `None` when no labeled target set was given.
    The norms are eval-mode means over the full datasets.
    """

    epoch: int
    acc_src: float
    acc_tgt: float | None
    acc_tgt_per_class: float | None
    mean_norm_src: float
    mean_norm_tgt: float


@dataclass
class RunMetrics:
    iterations: list[IterationRecord] = field(default_factory=list)
    epochs: list[EpochRecord] = field(default_factory=list)

    @property
    def final(self) -> EpochRecord:
        return self.epochs[-1]

    def is_finite(self) -> bool:
        values = [v for record in self.iterations for v in record[2:]]
        values += [v for record in self.epochs for v in record[1:] if v is not None]
        return all(math.isfinite(v) for v in values)
