"""
The training loop: one source batch and one target batch per iteration, normalized together,
the configured adaptation objective, backward, SGD; eval-mode accuracies at every epoch end.
"""
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from pyafn import autograd as ag
from pyafn.autograd import backward
from pyafn.autograd import Tape
from pyafn.autograd import Tensor
from pyafn.constants import RUN_FILES
from pyafn.data import count_batches
from pyafn.data import cycle_batches
from pyafn.data import DomainDataset
from pyafn.data import UnlabeledView
from pyafn.errsys.errors import E011
from pyafn.errsys.errors import E013
from pyafn.errsys.errors import E018
from pyafn.errsys.exceptions import AFNException
from pyafn.errsys.exceptions import DataError
from pyafn.errsys.tools import Error
from pyafn.nn import forward
from pyafn.nn import init_params
from pyafn.nn import Mode
from pyafn.nn import ModelParams
from pyafn.objectives import adaptation_loss
from pyafn.objectives import mmfnd
from pyafn.py_utils import Reporter
from pyafn.train.checkpoint import save_checkpoint
from pyafn.train.sgd import sgd_step
from pyafn.train.sgd import Velocities
from pyafn.train.tools import EpochRecord
from pyafn.train.tools import IterationRecord
from pyafn.train.tools import RunMetrics
from pyafn.train.tools import TrainConfig
from result import Err
from result import Ok
from result import Result


# *- EVALUATION -* #


@dataclass(frozen=True)
class Evaluation:
    accuracy: float
    per_class: dict[int, float]

    @property
    def per_class_mean(self) -> float:
        return float(np.mean(list(self.per_class.values())))


def embed(params: ModelParams, features: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """
    Eval-mode bottleneck features and logits, outside of any tape.
    """

    f, logits = forward(Tensor.constant(features), params, Mode.Eval)
    return f.values, logits.values


def row_norms(f: np.ndarray) -> np.ndarray:
    return np.sqrt(np.sum(f * f, axis=1))


def evaluate(params: ModelParams, ds: DomainDataset) -> Evaluation:
    """
    Accuracy and per-class accuracies; classes with no sample in `ds` are left out.
    """

    labels = ds.require_labels()

    if labels.size == 0:
        raise DataError(E011(f"{ds.domain_tag.value} evaluation set"))

    _, logits = embed(params, ds.features)
    hits = np.argmax(logits, axis=1) == labels

    per_class = {int(c): float(np.mean(hits[labels == c])) for c in np.unique(labels)}

    return Evaluation(float(np.mean(hits)), per_class)


# *- TRAINING -* #


def _seeds(seed: int) -> tuple[int, int, int, int]:
    init, drop, src, tgt = (int(s) for s in np.random.SeedSequence(seed).generate_state(4))
    return init, drop, src, tgt


def _class_count(source: DomainDataset) -> int:
    return max(source.label_space) + 1


def _batch_forward(
    params: ModelParams,
    x_s: np.ndarray,
    x_t: np.ndarray,
    rng: np.random.Generator,
) -> tuple[Tensor, Tensor, Tensor, Tensor]:
    """
    Features and logits of one source batch and one target batch, as (f_s, f_t, logits_s, logits_t).

    A single train-mode pass runs over the stacked rows, so both domains share the batch
    normalization statistics that the running averages, and therefore evaluation, estimate.
    """

    n_s, n = x_s.shape[0], x_s.shape[0] + x_t.shape[0]
    f, logits = forward(np.concatenate([x_s, x_t]), params, Mode.Train, rng)

    return (
        ag.rows(f, start=0, stop=n_s),
        ag.rows(f, start=n_s, stop=n),
        ag.rows(logits, start=0, stop=n_s),
        ag.rows(logits, start=n_s, stop=n),
    )


def run(
    cfg: TrainConfig,
    source: DomainDataset,
    target: DomainDataset | UnlabeledView,
    *,
    eval_target: DomainDataset | None = None,
    n_classes: int | None = None,
    reporter: Reporter | None = None,
    checkpoint_dir: Path | None = None,
) -> Result[tuple[ModelParams, RunMetrics], Error]:
    """
    Train from scratch on labeled `source` and the unlabeled `target` pool.

    The loop only ever reads the target pool through its `UnlabeledView`; target labels
    are used for the per-epoch accuracies, read from `eval_target` (or from `target`
    itself when it is labeled and no `eval_target` is given).

    One epoch is one pass over the larger domain; the smaller one cycles. When
    `checkpoint_dir` is given the parameters are saved there at every epoch end, and that
    file is the last good state named by a numerical abort.
    """

    if isinstance(target, DomainDataset):
        pool = target.unlabeled()
        if eval_target is None and target.is_labeled:
            eval_target = target
    else:
        pool = target

    if source.dim != pool.dim:
        return Err(E018(source.dim, pool.dim))

    try:
        labels = source.require_labels()
        architecture = cfg.architecture(source.dim, n_classes or _class_count(source))
        init_seed, drop_seed, src_seed, tgt_seed = _seeds(cfg.seed)
        params = init_params(architecture, np.random.default_rng(init_seed))
        dropout_rng = np.random.default_rng(drop_seed)

        source_stream = cycle_batches(source.n, cfg.batch_size, src_seed)
        target_stream = cycle_batches(pool.n, cfg.batch_size, tgt_seed)
    except AFNException as e:
        return Err(e.error)

    objective = cfg.objective
    per_epoch = count_batches(max(source.n, pool.n), cfg.batch_size)
    checkpoint = None if checkpoint_dir is None else Path(checkpoint_dir) / RUN_FILES["checkpoint"]
    last_good: str | None = None

    metrics = RunMetrics()
    velocities: Velocities = {}
    iteration = 0

    for epoch in range(1, cfg.epochs + 1):
        for _ in range(per_epoch):
            iteration += 1
            src_idx = next(source_stream)
            tgt_idx = next(target_stream)

            try:
                with Tape() as tape:
                    f_s, f_t, logits_s, logits_t = _batch_forward(
                        params,
                        source.features[src_idx],
                        pool.features[tgt_idx],
                        dropout_rng,
                    )
                    loss = adaptation_loss(objective, f_s, f_t, logits_s, labels[src_idx], logits_t)

                if not math.isfinite(loss.total.item()):
                    return Err(E013(iteration, last_good))

                backward(tape, loss.total)
                sgd_step(params, velocities, cfg.learning_rate, cfg.momentum)
            except AFNException as e:
                return Err(e.error)

            norms_s = row_norms(f_s.values)
            norms_t = row_norms(f_t.values)

            metrics.iterations.append(
                IterationRecord(
                    iter=iteration,
                    epoch=epoch,
                    loss_total=loss.total.item(),
                    loss_cls=loss.cls,
                    loss_norm=loss.norm,
                    loss_ent=loss.ent,
                    mean_norm_src=float(norms_s.mean()),
                    mean_norm_tgt=float(norms_t.mean()),
                    mmfnd_abs=abs(mmfnd(norms_s, norms_t)),
                )
            )

        if not all(np.all(np.isfinite(t.values)) for t in params.tensors()):
            return Err(E013(iteration, last_good))

        record = _epoch_record(epoch, params, source, pool, eval_target)
        metrics.epochs.append(record)

        if checkpoint is not None:
            match save_checkpoint(params, checkpoint):
                case Ok(path):
                    last_good = str(path)
                case Err(error):
                    return Err(error)

        if reporter is not None:
            reporter.detail(_epoch_line(record, cfg.epochs))

    return Ok((params, metrics))


def _epoch_record(
    epoch: int,
    params: ModelParams,
    source: DomainDataset,
    pool: UnlabeledView,
    eval_target: DomainDataset | None,
) -> EpochRecord:
    f_s, _ = embed(params, source.features)
    f_t, _ = embed(params, pool.features)
    acc_tgt = acc_tgt_per_class = None

    if eval_target is not None:
        result = evaluate(params, eval_target)
        acc_tgt, acc_tgt_per_class = result.accuracy, result.per_class_mean

    return EpochRecord(
        epoch=epoch,
        acc_src=evaluate(params, source).accuracy,
        acc_tgt=acc_tgt,
        acc_tgt_per_class=acc_tgt_per_class,
        mean_norm_src=float(row_norms(f_s).mean()),
        mean_norm_tgt=float(row_norms(f_t).mean()),
    )


def _epoch_line(record: EpochRecord, epochs: int) -> str:
    target = "-" if record.acc_tgt is None else f"{100 * record.acc_tgt:.2f}%"
    return (
        f"epoch {record.epoch}/{epochs}: "
        f"acc_src {100 * record.acc_src:.2f}%, acc_tgt {target}, "
        f"norms {record.mean_norm_src:.3f} / {record.mean_norm_tgt:.3f}"
    )
