"""
`afn train`: one adaptation run, with its checkpoint, metrics and manifest.
"""
from pyafn.commands.tools import fail
from pyafn.commands.tools import load_domains
from pyafn.commands.tools import RunSpec
from pyafn.commands.tools import surfaced_warnings
from pyafn.commands.tools import write_manifest
from pyafn.data import take_fraction
from pyafn.errsys.exceptions import AFNException
from pyafn.metrics import emit_metrics_csv
from pyafn.py_utils import fmt_real
from pyafn.train import run
from pyafn.train import RunMetrics
from result import Err
from result import Ok


def final_records(metrics: RunMetrics) -> dict[str, str]:
    final = metrics.final
    records = {
        "epochs": str(final.epoch),
        "acc_src": fmt_real(final.acc_src),
        "mean_norm_src": fmt_real(final.mean_norm_src),
        "mean_norm_tgt": fmt_real(final.mean_norm_tgt),
    }

    if final.acc_tgt is not None and final.acc_tgt_per_class is not None:
        records["acc_tgt"] = fmt_real(final.acc_tgt)
        records["acc_tgt_per_class"] = fmt_real(final.acc_tgt_per_class)

    return records


def cmd_train(spec: RunSpec) -> int:
    config = spec.config

    match config.train_config():
        case Ok(cfg):
            pass
        case Err(error):
            return fail(error)

    match load_domains(config):
        case Ok((source, target)):
            pass
        case Err(error):
            return fail(error)

    try:
        pool = take_fraction(target, config["data.target_fraction"], cfg.seed)
    except AFNException as e:
        return fail(e.error)

    spec.reporter.info(
        f"training {cfg.objective.variant.value} on {source.n} source / {pool.n} target samples "
        f"for {cfg.epochs} epochs"
    )

    with surfaced_warnings(spec.reporter):
        outcome = run(
            cfg,
            source,
            pool.unlabeled(),
            eval_target=target if target.is_labeled else None,
            n_classes=max(source.label_space) + 1,
            reporter=spec.reporter,
            checkpoint_dir=spec.run_dir,
        )

    match outcome:
        case Ok((_, metrics)):
            pass
        case Err(error):
            return fail(error)

    match emit_metrics_csv(metrics, spec.run_dir):
        case Err(error):
            return fail(error)

    match write_manifest(spec, ["checkpoint", "metrics_iter", "metrics_epoch"], final_records(metrics)):
        case Err(error):
            return fail(error)

    final = metrics.final
    target_line = "" if final.acc_tgt is None else f", target accuracy {100 * final.acc_tgt:.2f}%"
    spec.reporter.success(f"done: source accuracy {100 * final.acc_src:.2f}%{target_line}")

    return 0
