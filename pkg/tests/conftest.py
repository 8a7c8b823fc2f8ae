import numpy as np
import pytest
from pyafn.data import gen_synthetic
from pyafn.data import ShiftSpec
from pyafn.objectives import ObjectiveConfig
from pyafn.objectives import Variant
from pyafn.train import TrainConfig


def make_tiny_config(variant: Variant = Variant.Safn, **overrides) -> TrainConfig:
    """
    A network and schedule small enough for a run to take a fraction of a second.
    """

    settings = dict(
        objective=ObjectiveConfig(variant),
        learning_rate=0.01,
        epochs=2,
        batch_size=16,
        seed=0,
        hidden=(8,),
        embedding_size=4,
        dropout_p=0.1,
    )
    settings.update(overrides)

    return TrainConfig(**settings)


@pytest.fixture
def tiny_config():
    return make_tiny_config


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(0)


@pytest.fixture
def small_shift() -> ShiftSpec:
    return ShiftSpec(n_classes=3, dim=4, samples=40, seed=0)


@pytest.fixture
def small_domains(small_shift):
    return gen_synthetic(small_shift)
