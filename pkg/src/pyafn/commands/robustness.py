"""
`afn robustness`: closed, outlier and partial negative gaps of the configured variant.
"""
from pyafn.commands.tools import fail
from pyafn.commands.tools import load_domains
from pyafn.commands.tools import RunSpec
from pyafn.commands.tools import surfaced_warnings
from pyafn.commands.tools import write_manifest
from pyafn.metrics import emit_metrics_csv
from pyafn.metrics import robustness_protocol
from pyafn.py_utils import fmt_real
from result import Err
from result import Ok


def cmd_robustness(spec: RunSpec) -> int:
    config = spec.config

    match config.train_config():
        case Ok(cfg):
            pass
        case Err(error):
            return fail(error)

    match load_domains(config, partial=False):
        case Ok((source, target)):
            pass
        case Err(error):
            return fail(error)

    keep = config["data.partial_keep"]
    l_percent = config["robustness.l_percent"]

    with surfaced_warnings(spec.reporter):
        outcome = robustness_protocol(
            cfg,
            source,
            target,
            keep,
            l_percent,
            reporter=spec.reporter,
            parallel=config["robustness.parallel"],
        )

    match outcome:
        case Ok(report):
            pass
        case Err(error):
            return fail(error)

    match emit_metrics_csv(report, spec.artifact("robustness")):
        case Err(error):
            return fail(error)

    records = {
        "a_labeled": fmt_real(report.a_labeled),
        "a_shared": fmt_real(report.a_shared),
        "a_full": fmt_real(report.a_full),
        "cng": fmt_real(report.cng),
        "ong": fmt_real(report.ong),
        "png": fmt_real(report.png),
        "eval_fingerprint": report.eval_fingerprint,
    }

    match write_manifest(spec, ["robustness"], records):
        case Err(error):
            return fail(error)

    spec.reporter.success(
        f"{report.variant} at {l_percent:g}%: cng {report.cng:.2f}, ong {report.ong:.2f}, png {report.png:.2f}"
    )

    return 0
