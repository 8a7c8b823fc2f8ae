"""
Losses and statistics of adaptive feature norm training, expressed over autograd tensors.

    cross_entropy   source classification loss
    feature_norms   per-sample L2 norm of the bottleneck features
    mmfnd           mean feature norm discrepancy between the two domains
    hafn            mean norms of both domains pulled towards a shared radius R
    safn            every norm pushed Δr beyond its own current value
    safn_capped     as safn, with the per-sample target floored at R
    entropy_min     conditional entropy of the target predictions
"""
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from pyafn import autograd as ag
from pyafn.autograd import Tensor
from pyafn.constants import DEFAULT_DELTA_R
from pyafn.constants import DEFAULT_ENT_WEIGHT
from pyafn.constants import DEFAULT_LAMBDA
from pyafn.constants import DEFAULT_RADIUS
from pyafn.errsys.errors import E003
from pyafn.errsys.errors import E006
from pyafn.errsys.errors import E011
from pyafn.errsys.exceptions import ConfigError
from pyafn.errsys.exceptions import DataError
from pyafn.errsys.exceptions import ShapeError
from pyafn.py_utils import MapLikeEnum


class Variant(MapLikeEnum):
    SourceOnly = "source_only"
    Hafn = "hafn"
    Safn = "safn"
    SafnCapped = "safn_capped"

    @property
    def needs_radius(self) -> bool:
        return self in {Variant.Hafn, Variant.SafnCapped}

    @property
    def needs_delta_r(self) -> bool:
        return self in {Variant.Safn, Variant.SafnCapped}


@dataclass(frozen=True)
class ObjectiveConfig:
    """
    Adaptation variant and its hyperparameters.

    The norm distance is always the squared difference. `ent` switches the
    entropy term on; its weight is `ent_weight`.
    """

    variant: Variant = Variant.Safn
    lam: float = DEFAULT_LAMBDA
    radius: float | None = DEFAULT_RADIUS
    delta_r: float | None = DEFAULT_DELTA_R
    ent: bool = False
    ent_weight: float = DEFAULT_ENT_WEIGHT

    def __post_init__(self) -> None:
        if self.lam < 0.0:
            raise ConfigError(E006("objective.lambda", f"{self.lam} is negative"))

        if self.ent_weight < 0.0:
            raise ConfigError(E006("objective.ent_weight", f"{self.ent_weight} is negative"))

        if self.variant.needs_radius:
            if self.radius is None:
                raise ConfigError(E006("objective.radius", f"required by {self.variant.value}"))
            if self.radius <= 0.0:
                raise ConfigError(E006("objective.radius", f"{self.radius} must be positive"))

        if self.variant.needs_delta_r:
            if self.delta_r is None:
                raise ConfigError(E006("objective.delta_r", f"required by {self.variant.value}"))
            if self.delta_r <= 0.0:
                raise ConfigError(E006("objective.delta_r", f"{self.delta_r} must be positive"))

    @classmethod
    def preset(cls, name: str, variant: Variant) -> "ObjectiveConfig":
        """
        `office`: λ = 0.05, R = 25, Δr = 1.0; `visda`: λ = 0.01, Δr = 0.3 for easy-to-converge sources.
        """

        match name:
            case "office":
                return cls(variant, 0.05, 25.0, 1.0)
            case "visda":
                return cls(variant, 0.01, 25.0, 0.3)
            case _:
                raise ConfigError(E006("objective.preset", f"unknown preset {name!r}"))

    @property
    def effective_ent_weight(self) -> float:
        return self.ent_weight if self.ent else 0.0


# *- BASE TERMS -* #


def cross_entropy(logits: Tensor, labels: np.ndarray) -> Tensor:
    """
    Mean of -log softmax(logits)[label], in the log-sum-exp stable form.
    """

    labels = np.asarray(labels, dtype=np.int64)
    picked = ag.pick(ag.log_softmax(logits), index=labels)
    return ag.scalar_mul(ag.mean(picked), c=-1.0)


def feature_norms(f: Tensor) -> Tensor:
    return ag.row_l2_norm(f)


def mmfnd(source_norms: Tensor | np.ndarray, target_norms: Tensor | np.ndarray) -> float:
    """
    mean(source norms) - mean(target norms) at the current model; report its absolute value.
    """

    s = source_norms.values if isinstance(source_norms, Tensor) else np.asarray(source_norms, dtype=np.float64)
    t = target_norms.values if isinstance(target_norms, Tensor) else np.asarray(target_norms, dtype=np.float64)

    if s.size == 0:
        raise DataError(E011("source norms"))
    if t.size == 0:
        raise DataError(E011("target norms"))

    return float(s.mean() - t.mean())


def entropy_min(target_logits: Tensor) -> Tensor:
    """
    Mean over the batch of -sum_k p_k log p_k with p = softmax(logits).
    """

    if target_logits.ndim != 2 or target_logits.shape[0] == 0:
        raise ShapeError(E003("entropy_min", 2, target_logits.shape))

    log_p = ag.log_softmax(target_logits)
    plogp = ag.mul(ag.exp(log_p), log_p)

    return ag.scalar_mul(ag.sum(plogp), c=-1.0 / target_logits.shape[0])


# *- NORM PENALTIES -* #


def hafn_penalty(source_f: Tensor, target_f: Tensor, radius: float) -> Tensor:
    """
    (mean source norm - R)^2 + (mean target norm - R)^2 over the current batches.
    """

    def term(f: Tensor) -> Tensor:
        return ag.square(ag.scalar_add(ag.mean(feature_norms(f)), c=-radius))

    return ag.add(term(source_f), term(target_f))


def safn_targets(norms: np.ndarray, delta_r: float, radius: float | None = None) -> np.ndarray:
    """
    Per-sample norm targets: detached norm + Δr, floored at R when a terminal radius is given.
    """

    targets = np.asarray(norms, dtype=np.float64) + delta_r

    if radius is not None:
        targets = np.maximum(targets, radius)

    return targets


def safn_penalty(
    source_f: Tensor,
    target_f: Tensor,
    delta_r: float,
    radius: float | None = None,
    *,
    targets: tuple[np.ndarray, np.ndarray] | None = None,
) -> Tensor:
    """
    Mean over the combined batch of (target_i - |f_i|)^2, where target_i is built from the
    gradient-detached norm of the same forward pass.

    `targets` pins the per-sample targets of both domains instead, which makes the
    penalty an ordinary function of f (finite-difference checks).
    """

    norms = (feature_norms(source_f), feature_norms(target_f))
    n = norms[0].shape[0] + norms[1].shape[0]

    if targets is None:
        targets = tuple(safn_targets(norm.detach().values, delta_r, radius) for norm in norms)

    def term(norm: Tensor, target: np.ndarray) -> Tensor:
        return ag.sum(ag.square(ag.sub(Tensor.constant(target), norm)))

    return ag.scalar_mul(ag.add(term(norms[0], targets[0]), term(norms[1], targets[1])), c=1.0 / n)


# *- FULL OBJECTIVES -* #


def _with_penalty(cls_loss: Tensor, penalty: Tensor, lam: float) -> Tensor:
    if lam == 0.0:
        return cls_loss
    return ag.add(cls_loss, ag.scalar_mul(penalty, c=lam))


def _expect(cfg: ObjectiveConfig, *variants: Variant) -> None:
    if cfg.variant not in variants:
        raise ConfigError(E006("objective.variant", f"{cfg.variant.value} used where {variants[0].value} is expected"))


def hafn(
    source_f: Tensor,
    target_f: Tensor,
    source_logits: Tensor,
    labels: np.ndarray,
    cfg: ObjectiveConfig,
) -> Tensor:
    _expect(cfg, Variant.Hafn)
    assert cfg.radius is not None

    penalty = hafn_penalty(source_f, target_f, cfg.radius)
    return _with_penalty(cross_entropy(source_logits, labels), penalty, cfg.lam)


def safn(
    source_f: Tensor,
    target_f: Tensor,
    source_logits: Tensor,
    labels: np.ndarray,
    cfg: ObjectiveConfig,
) -> Tensor:
    _expect(cfg, Variant.Safn)
    assert cfg.delta_r is not None

    penalty = safn_penalty(source_f, target_f, cfg.delta_r)
    return _with_penalty(cross_entropy(source_logits, labels), penalty, cfg.lam)


def safn_capped(
    source_f: Tensor,
    target_f: Tensor,
    source_logits: Tensor,
    labels: np.ndarray,
    cfg: ObjectiveConfig,
) -> Tensor:
    _expect(cfg, Variant.SafnCapped)
    assert cfg.delta_r is not None and cfg.radius is not None

    penalty = safn_penalty(source_f, target_f, cfg.delta_r, cfg.radius)
    return _with_penalty(cross_entropy(source_logits, labels), penalty, cfg.lam)


class LossBreakdown(NamedTuple):
    total: Tensor
    cls: float
    norm: float
    ent: float


def adaptation_loss(
    cfg: ObjectiveConfig,
    source_f: Tensor,
    target_f: Tensor,
    source_logits: Tensor,
    labels: np.ndarray,
    target_logits: Tensor,
) -> LossBreakdown:
    """
    Assemble the configured iteration objective: classification + λ·norm penalty (+ ENT).

    `norm` is reported already weighted by λ.
    """

    cls_loss = cross_entropy(source_logits, labels)
    total = cls_loss
    norm = 0.0

    if cfg.variant is not Variant.SourceOnly and cfg.lam != 0.0:
        match cfg.variant:
            case Variant.Hafn:
                assert cfg.radius is not None
                penalty = hafn_penalty(source_f, target_f, cfg.radius)
            case Variant.Safn:
                assert cfg.delta_r is not None
                penalty = safn_penalty(source_f, target_f, cfg.delta_r)
            case Variant.SafnCapped:
                assert cfg.delta_r is not None and cfg.radius is not None
                penalty = safn_penalty(source_f, target_f, cfg.delta_r, cfg.radius)

        weighted = ag.scalar_mul(penalty, c=cfg.lam)
        total = ag.add(total, weighted)
        norm = weighted.item()

    ent = 0.0
    weight = cfg.effective_ent_weight

    if weight > 0.0:
        weighted_ent = ag.scalar_mul(entropy_min(target_logits), c=weight)
        total = ag.add(total, weighted_ent)
        ent = weighted_ent.item()

    return LossBreakdown(total, cls_loss.item(), norm, ent)
