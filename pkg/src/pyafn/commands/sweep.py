"""
`afn sweep`: one training run per value of `sweep.key`.

`sweep.values` separates values with `;` when it contains one (list-valued keys such as
`model.hidden`), with `,` otherwise.
"""
from pyafn.commands.tools import fail
from pyafn.commands.tools import load_domains
from pyafn.commands.tools import RunSpec
from pyafn.commands.tools import surfaced_warnings
from pyafn.commands.tools import write_manifest
from pyafn.config import SCHEMA
from pyafn.data import take_fraction
from pyafn.errsys.errors import E006
from pyafn.errsys.errors import E007
from pyafn.errsys.exceptions import AFNException
from pyafn.metrics import emit_sweep_csv
from pyafn.train import run
from result import Err
from result import Ok


def sweep_values(raw: str) -> list[str]:
    separator = ";" if ";" in raw else ","
    return [value.strip() for value in raw.split(separator) if value.strip()]


def cmd_sweep(spec: RunSpec) -> int:
    key = spec.config["sweep.key"]
    values = sweep_values(spec.config["sweep.values"])

    if key not in SCHEMA:
        return fail(E007(key, "sweep.key", []) if key else E006("sweep.key", "no key to sweep"))

    if key.split(".")[0] in {"sweep", "run", "selfcheck"}:
        return fail(E006("sweep.key", f"`{key}` does not affect training"))

    if not values:
        return fail(E006("sweep.values", "no value to sweep"))

    rows = []

    for raw in values:
        match spec.config.with_value(key, raw):
            case Ok(config):
                pass
            case Err(error):
                return fail(error)

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

        spec.reporter.info(f"{key} = {raw}")

        with surfaced_warnings(spec.reporter):
            outcome = run(
                cfg,
                source,
                pool.unlabeled(),
                eval_target=target if target.is_labeled else None,
                n_classes=max(source.label_space) + 1,
                reporter=spec.reporter,
            )

        match outcome:
            case Ok((_, metrics)):
                final = metrics.final
                rows.append((key, raw, final.acc_tgt, final.acc_tgt_per_class, final.mean_norm_src, final.mean_norm_tgt))
            case Err(error):
                return fail(error)

    match emit_sweep_csv(rows, spec.artifact("sweep")):
        case Err(error):
            return fail(error)

    match write_manifest(spec, ["sweep"], {"runs": str(len(rows))}):
        case Err(error):
            return fail(error)

    spec.reporter.success(f"swept {key} over {len(rows)} values")

    return 0
