"""
Dataset types. Target labels exist for evaluation only; training consumes `UnlabeledView`.
"""
import hashlib
import math
from dataclasses import dataclass
from dataclasses import field

import numpy as np
from pyafn.errsys.errors import E006
from pyafn.errsys.errors import E010
from pyafn.errsys.errors import E011
from pyafn.errsys.exceptions import ConfigError
from pyafn.errsys.exceptions import DataError
from pyafn.py_utils import MapLikeEnum


class DomainTag(MapLikeEnum):
    Source = "source"
    Target = "target"


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, copy=True)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class UnlabeledView:
    """
    Label-stripped view of a dataset: the only form of the target pool the training loop sees.
    """

    features: np.ndarray
    domain_tag: DomainTag

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def dim(self) -> int:
        return self.features.shape[1]


@dataclass(frozen=True)
class DomainDataset:
    features: np.ndarray
    labels: np.ndarray | None
    label_space: frozenset[int]
    domain_tag: DomainTag

    def __post_init__(self) -> None:
        features = np.asarray(self.features, dtype=np.float64)

        if features.ndim != 2 or features.shape[0] < 1 or features.shape[1] < 1:
            raise DataError(E011(f"{self.domain_tag.value} features of shape {list(features.shape)}"))

        object.__setattr__(self, "features", _frozen(features))
        object.__setattr__(self, "label_space", frozenset(int(c) for c in self.label_space))

        if self.labels is None:
            return

        labels = np.asarray(self.labels, dtype=np.int64)

        if labels.shape != (features.shape[0],):
            raise DataError(E011(f"{labels.shape[0]} labels for {features.shape[0]} samples"))

        outside = np.flatnonzero(~np.isin(labels, sorted(self.label_space)))

        if outside.size:
            i = int(outside[0])
            raise DataError(E010(int(labels[i]), f"{self.domain_tag.value} sample {i}", self.label_space))

        object.__setattr__(self, "labels", _frozen(labels))

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def dim(self) -> int:
        return self.features.shape[1]

    @property
    def is_labeled(self) -> bool:
        return self.labels is not None

    def require_labels(self) -> np.ndarray:
        if self.labels is None:
            raise DataError(E011(f"labels of the {self.domain_tag.value} dataset"))
        return self.labels

    def unlabeled(self) -> UnlabeledView:
        return UnlabeledView(self.features, self.domain_tag)

    def subset(self, index: np.ndarray, label_space: frozenset[int] | None = None) -> "DomainDataset":
        index = np.asarray(index, dtype=np.int64)
        return DomainDataset(
            self.features[index],
            None if self.labels is None else self.labels[index],
            self.label_space if label_space is None else label_space,
            self.domain_tag,
        )

    def fingerprint(self) -> str:
        digest = hashlib.sha256()
        digest.update(np.ascontiguousarray(self.features).tobytes())

        if self.labels is not None:
            digest.update(np.ascontiguousarray(self.labels).tobytes())

        return digest.hexdigest()


@dataclass(frozen=True)
class ShiftSpec:
    """
    Synthetic domain shift: K Gaussian blobs on a circle of radius ρ in the first two
    dimensions; the target is the same structure rotated by φ, scaled by s and translated.
    """

    n_classes: int = 4
    dim: int = 16
    samples: int = 2000
    radius: float = 4.0
    noise: float = 1.2
    angle: float = math.radians(30.0)
    scale: float = 0.5
    translation: tuple[float, ...] = field(default_factory=tuple)
    seed: int = 0

    def __post_init__(self) -> None:
        checks = {
            "data.n_classes": (self.n_classes >= 2, "at least 2 classes"),
            "data.dim": (self.dim >= 2, "at least 2 dimensions"),
            "data.samples": (self.samples >= 1, "at least 1 sample per domain"),
            "data.radius": (self.radius >= 0.0, "a nonnegative radius"),
            "data.noise": (self.noise >= 0.0, "a nonnegative noise level"),
            "data.angle_deg": (0.0 <= self.angle < 2.0 * math.pi, "an angle in [0, 360)"),
            "data.scale": (self.scale > 0.0, "a positive scale"),
            "data.translation": (len(self.translation) in {0, 2, self.dim}, "0, 2 or dim components"),
            "data.seed": (self.seed >= 0, "a nonnegative seed"),
        }

        for key, (ok, expected) in checks.items():
            if not ok:
                raise ConfigError(E006(key, f"expected {expected}"))

    @classmethod
    def canned(cls, seed: int = 0) -> "ShiftSpec":
        return cls(seed=seed)

    def translation_vector(self) -> np.ndarray:
        vector = np.zeros(self.dim)
        vector[: len(self.translation)] = self.translation
        return vector


CANNED_PARTIAL_KEEP = (0, 1)

SHORT = {DomainTag.Source: "src", DomainTag.Target: "tgt"}
"""Column suffixes of per-domain metrics."""
