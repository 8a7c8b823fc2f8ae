"""
Constants used across PyAFN blocks.
"""


__version__ = "1.0.0"


# *- NUMERICS -* #

NORM_EPS = 1e-12
"""Guard inside sqrt(sum f^2 + eps) so the norm and its gradient stay finite at 0."""

BN_EPS = 1e-5
BN_MOMENTUM = 0.1

GRAD_CHECK_H = 1e-4
GRAD_CHECK_TOL = 1e-4


# *- HYPERPARAMETER DEFAULTS -* #

DEFAULT_LAMBDA = 0.05
DEFAULT_RADIUS = 25.0
DEFAULT_DELTA_R = 1.0
DEFAULT_ENT_WEIGHT = 0.1

DEFAULT_LEARNING_RATE = 1e-3
DEFAULT_MOMENTUM = 0.9
DEFAULT_EPOCHS = 200
DEFAULT_BATCH_SIZE = 32

DEFAULT_HIDDEN = (64, 64)
DEFAULT_EMBEDDING_SIZE = 64
DEFAULT_DROPOUT_P = 0.5


# *- FILE FORMATS -* #

CHECKPOINT_TAG = "afn-checkpoint"
CHECKPOINT_VERSION = 1

ITER_CSV_HEADER = (
    "iter",
    "epoch",
    "loss_total",
    "loss_cls",
    "loss_norm",
    "mean_norm_src",
    "mean_norm_tgt",
    "mmfnd_abs",
)
EPOCH_CSV_HEADER = ("epoch", "acc_src", "acc_tgt", "acc_tgt_per_class")
ROBUSTNESS_CSV_HEADER = (
    "variant",
    "l_percent",
    "a_labeled",
    "a_shared",
    "a_full",
    "cng",
    "ong",
    "png",
)
SWEEP_CSV_HEADER = (
    "key",
    "value",
    "acc_tgt",
    "acc_tgt_per_class",
    "mean_norm_src",
    "mean_norm_tgt",
)

MANIFEST_PREFIX = "manifest."

RUN_FILES = {
    "manifest": "manifest",
    "checkpoint": "checkpoint",
    "metrics_iter": "metrics_iter.csv",
    "metrics_epoch": "metrics_epoch.csv",
    "features": "features.csv",
    "source": "source.csv",
    "target": "target.csv",
    "eval": "eval.csv",
    "robustness": "robustness.csv",
    "sweep": "sweep.csv",
    "eval_manifest": "eval.manifest",
    "features_manifest": "features.manifest",
}

EVAL_CSV_HEADER = ("domain", "n", "accuracy", "per_class_accuracy")
