"""
Training: SGD with momentum, the adaptation loop, evaluation and checkpoints.
"""
from pyafn.train.checkpoint import load_checkpoint
from pyafn.train.checkpoint import save_checkpoint
from pyafn.train.loop import embed
from pyafn.train.loop import evaluate
from pyafn.train.loop import Evaluation
from pyafn.train.loop import row_norms
from pyafn.train.loop import run
from pyafn.train.sgd import sgd_step
from pyafn.train.sgd import Velocities
from pyafn.train.tools import EpochRecord
from pyafn.train.tools import IterationRecord
from pyafn.train.tools import RunMetrics
from pyafn.train.tools import TrainConfig

__all__ = (
    "EpochRecord",
    "Evaluation",
    "IterationRecord",
    "RunMetrics",
    "TrainConfig",
    "Velocities",
    "embed",
    "evaluate",
    "load_checkpoint",
    "row_norms",
    "run",
    "save_checkpoint",
    "sgd_step",
)
