"""
Synthetic generation, label-space manipulation and deterministic batching.
"""
import math
import warnings
from collections.abc import Iterator
from collections.abc import Sequence

import numpy as np
from pyafn.data.tools import DomainDataset
from pyafn.data.tools import DomainTag
from pyafn.data.tools import ShiftSpec
from pyafn.errsys.errors import E006
from pyafn.errsys.exceptions import ConfigError


class EmptyClassWarning(UserWarning):
    ...


def _blobs(spec: ShiftSpec, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    angles = 2.0 * math.pi * np.arange(spec.n_classes) / spec.n_classes
    means = np.zeros((spec.n_classes, spec.dim))
    means[:, 0] = spec.radius * np.cos(angles)
    means[:, 1] = spec.radius * np.sin(angles)

    labels = rng.permutation(np.arange(spec.samples) % spec.n_classes)
    features = means[labels] + spec.noise * rng.standard_normal((spec.samples, spec.dim))

    return features, labels


def gen_synthetic(spec: ShiftSpec) -> tuple[DomainDataset, DomainDataset]:
    """
    Draw the source and target domains; a pure function of `spec`.

    Target labels are kept for evaluation; training only ever sees `target.unlabeled()`.
    """

    source_rng, target_rng = (np.random.default_rng(s) for s in np.random.SeedSequence(spec.seed).spawn(2))
    label_space = frozenset(range(spec.n_classes))

    x_s, y_s = _blobs(spec, source_rng)
    x_t, y_t = _blobs(spec, target_rng)

    cos, sin = math.cos(spec.angle), math.sin(spec.angle)
    plane = x_t[:, :2].copy()
    x_t[:, 0] = cos * plane[:, 0] - sin * plane[:, 1]
    x_t[:, 1] = sin * plane[:, 0] + cos * plane[:, 1]
    x_t = spec.scale * x_t + spec.translation_vector()

    return (
        DomainDataset(x_s, y_s, label_space, DomainTag.Source),
        DomainDataset(x_t, y_t, label_space, DomainTag.Target),
    )


def _check_keep(source: DomainDataset, keep: Sequence[int]) -> frozenset[int]:
    kept = frozenset(int(c) for c in keep)

    if not kept:
        raise ConfigError(E006("data.partial_keep", "the kept class subset is empty"))

    if not kept <= source.label_space:
        extra = sorted(kept - source.label_space)
        raise ConfigError(E006("data.partial_keep", f"classes {extra} are not in the source label space"))

    return kept


def make_partial(
    source: DomainDataset,
    target: DomainDataset,
    keep: Sequence[int],
) -> tuple[DomainDataset, DomainDataset]:
    """
    Restrict the target to `keep`; the source keeps its outlier classes.
    """

    kept = _check_keep(source, keep)
    labels = target.require_labels()
    index = np.flatnonzero(np.isin(labels, sorted(kept)))

    return source, target.subset(index, kept)


def restrict_source(source: DomainDataset, keep: Sequence[int]) -> DomainDataset:
    """
    Source rows of the shared classes only; the label space is left as is so the
    classifier keeps |C_s| outputs.
    """

    kept = _check_keep(source, keep)
    index = np.flatnonzero(np.isin(source.require_labels(), sorted(kept)))

    return source.subset(index)


def split_labeled_target(target: DomainDataset, percent: float, seed: int) -> tuple[DomainDataset, DomainDataset]:
    """
    Stratified l% subset, ceil(l% · n_c) samples drawn from each class c, and the rows
    left out of it, both in the original row order.
    """

    if not 0.0 < percent <= 100.0:
        raise ConfigError(E006("robustness.l_percent", f"{percent} is outside (0, 100]"))

    labels = target.require_labels()
    rng = np.random.default_rng(seed)
    chosen: list[np.ndarray] = []

    for c in sorted(target.label_space):
        members = np.flatnonzero(labels == c)
        take = math.ceil(percent / 100.0 * members.size)

        if take == 0:
            warnings.warn(f"class {c} has no sample in the {percent}% labeled subset", EmptyClassWarning, stacklevel=2)
            continue

        chosen.append(rng.choice(members, size=take, replace=False))

    index = np.sort(np.concatenate(chosen)) if chosen else np.zeros(0, dtype=np.int64)
    rest = np.setdiff1d(np.arange(target.n), index)

    return target.subset(index), target.subset(rest)


def subsample_labeled_target(target: DomainDataset, percent: float, seed: int) -> DomainDataset:
    labeled, _ = split_labeled_target(target, percent, seed)
    return labeled


def take_fraction(ds: DomainDataset, fraction: float, seed: int) -> DomainDataset:
    """
    The first ceil(fraction · n) samples of a seeded shuffle (unlabeled sample-size study).
    """

    if not 0.0 < fraction <= 1.0:
        raise ConfigError(E006("data.target_fraction", f"{fraction} is outside (0, 1]"))

    if fraction == 1.0:
        return ds

    order = np.random.default_rng(seed).permutation(ds.n)
    return ds.subset(np.sort(order[: math.ceil(fraction * ds.n)]))


def batches(n: int, batch_size: int, seed: int, epoch: int = 0) -> Iterator[np.ndarray]:
    """
    Index blocks of one epoch over `n` samples, shuffled by (seed, epoch).

    A final block of a single sample is dropped (train-mode batch normalization).
    """

    if batch_size < 2:
        raise ConfigError(E006("train.batch_size", f"{batch_size} is below 2"))

    order = np.random.default_rng([seed, epoch]).permutation(n)

    for start in range(0, n, batch_size):
        block = order[start : start + batch_size]

        if block.size < 2:
            return

        yield block


def count_batches(n: int, batch_size: int) -> int:
    full, rest = divmod(n, batch_size)
    return full + (rest >= 2)


def cycle_batches(n: int, batch_size: int, seed: int) -> Iterator[np.ndarray]:
    """
    Endless stream of batches, reshuffled on every pass.
    """

    if n < 2:
        raise ConfigError(E006("train.batch_size", f"cannot cycle over {n} sample(s)"))

    epoch = 0

    while True:
        yield from batches(n, batch_size, seed, epoch)
        epoch += 1
