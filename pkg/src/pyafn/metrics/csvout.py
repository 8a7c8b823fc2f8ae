"""
CSV serialization of run metrics, robustness reports and sweeps.

Values are written with 17 significant digits and '\\n' line endings, so writing the
same object twice gives byte-identical files.
"""
import csv
from collections.abc import Iterable
from collections.abc import Sequence
from pathlib import Path
from typing import Any

from pyafn.constants import EPOCH_CSV_HEADER
from pyafn.constants import ITER_CSV_HEADER
from pyafn.constants import ROBUSTNESS_CSV_HEADER
from pyafn.constants import RUN_FILES
from pyafn.constants import SWEEP_CSV_HEADER
from pyafn.errsys.errors import E015
from pyafn.errsys.tools import Error
from pyafn.metrics.robustness import RobustnessReport
from pyafn.py_utils import fmt_real
from pyafn.train import RunMetrics
from result import Err
from result import Ok
from result import Result


def _cell(value: Any) -> str:
    match value:
        case None:
            return ""
        case bool() | int() | str():
            return str(value)
        case float():
            return fmt_real(value)
        case _:
            return fmt_real(float(value))


def write_rows(path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Result[Path, Error]:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)

        with open(path, "w", encoding="utf-8", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(header)
            writer.writerows([_cell(v) for v in row] for row in rows)
    except OSError as e:
        return Err(E015(str(path), e.strerror or "I/O error"))

    return Ok(path)


def _iteration_rows(metrics: RunMetrics) -> Iterable[tuple[Any, ...]]:
    for r in metrics.iterations:
        yield r.iter, r.epoch, r.loss_total, r.loss_cls, r.loss_norm, r.mean_norm_src, r.mean_norm_tgt, r.mmfnd_abs


def _epoch_rows(metrics: RunMetrics) -> Iterable[tuple[Any, ...]]:
    for r in metrics.epochs:
        yield r.epoch, r.acc_src, r.acc_tgt, r.acc_tgt_per_class


def _report_row(report: RobustnessReport) -> tuple[Any, ...]:
    return (
        report.variant,
        report.l_percent,
        report.a_labeled,
        report.a_shared,
        report.a_full,
        report.cng,
        report.ong,
        report.png,
    )


def emit_metrics_csv(
    metrics: RunMetrics | RobustnessReport | Sequence[RobustnessReport],
    path: str | Path,
) -> Result[Path, Error]:
    """
    Write `metrics` under `path`.

    Run metrics go to a directory (`metrics_iter.csv` and `metrics_epoch.csv`), robustness
    reports to a single file with one row per report.
    """

    path = Path(path)

    match metrics:
        case RunMetrics():
            match write_rows(path / RUN_FILES["metrics_iter"], ITER_CSV_HEADER, _iteration_rows(metrics)):
                case Err(error):
                    return Err(error)
            match write_rows(path / RUN_FILES["metrics_epoch"], EPOCH_CSV_HEADER, _epoch_rows(metrics)):
                case Err(error):
                    return Err(error)
            return Ok(path)
        case RobustnessReport():
            return write_rows(path, ROBUSTNESS_CSV_HEADER, [_report_row(metrics)])
        case _:
            return write_rows(path, ROBUSTNESS_CSV_HEADER, [_report_row(r) for r in metrics])


def emit_sweep_csv(rows: Iterable[Sequence[Any]], path: str | Path) -> Result[Path, Error]:
    return write_rows(Path(path), SWEEP_CSV_HEADER, rows)
