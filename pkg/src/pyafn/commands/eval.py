"""
`afn eval`: accuracies of a saved checkpoint on the configured domains.
"""
from pyafn.commands.tools import fail
from pyafn.commands.tools import load_domains
from pyafn.commands.tools import read_manifest
from pyafn.commands.tools import RunSpec
from pyafn.commands.tools import write_manifest
from pyafn.constants import EVAL_CSV_HEADER
from pyafn.constants import RUN_FILES
from pyafn.data import DomainDataset
from pyafn.data.tools import SHORT
from pyafn.errsys.errors import E012
from pyafn.errsys.tools import Error
from pyafn.metrics.csvout import write_rows
from pyafn.nn import ModelParams
from pyafn.py_utils import fmt_real
from pyafn.train import evaluate
from pyafn.train import load_checkpoint
from result import Err
from result import Ok
from result import Result


def load_model_and_domains(spec: RunSpec) -> Result[tuple[ModelParams, DomainDataset, DomainDataset], Error]:
    """
    The checkpoint of the run and the domains it is applied to, checked against each other.
    """

    path = spec.checkpoint_path

    match load_checkpoint(path):
        case Ok(params):
            pass
        case Err(error):
            return Err(error)

    match load_domains(spec.config):
        case Ok((source, target)):
            pass
        case Err(error):
            return Err(error)

    if params.architecture.input_dim != source.dim:
        reason = f"the model expects {params.architecture.input_dim} features, the data has {source.dim}"
        return Err(E012(str(path), reason))

    return Ok((params, source, target))


def cmd_eval(spec: RunSpec) -> int:
    match load_model_and_domains(spec):
        case Ok((params, source, target)):
            pass
        case Err(error):
            return fail(error)

    rows = []
    records: dict[str, str] = {}
    domains = [source, target] if target.is_labeled else [source]

    if not target.is_labeled:
        spec.reporter.warn("the target dataset is unlabeled; only the source accuracy is reported")

    for ds in domains:
        result = evaluate(params, ds)
        tag = ds.domain_tag.value
        rows.append((tag, ds.n, result.accuracy, result.per_class_mean))
        records[f"acc_{SHORT[ds.domain_tag]}"] = fmt_real(result.accuracy)
        records[f"acc_{SHORT[ds.domain_tag]}_per_class"] = fmt_real(result.per_class_mean)
        spec.reporter.info(
            f"{tag}: accuracy {100 * result.accuracy:.2f}%, per-class {100 * result.per_class_mean:.2f}% ({ds.n} samples)"
        )

    match write_rows(spec.artifact("eval"), EVAL_CSV_HEADER, rows):
        case Err(error):
            return fail(error)

    match write_manifest(spec, ["eval"], records, manifest="eval_manifest"):
        case Err(error):
            return fail(error)

    recorded = read_manifest(spec.checkpoint_path.parent / RUN_FILES["manifest"])

    for key, value in records.items():
        if key in recorded and key.startswith("acc_"):
            if recorded[key] == value:
                spec.reporter.success(f"{key} matches the training manifest")
            else:
                spec.reporter.warn(f"{key} is {value}, the training manifest recorded {recorded[key]}")

    return 0
