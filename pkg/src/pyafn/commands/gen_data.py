"""
`afn gen-data`: write the synthetic source and target domains as CSV files.
"""
import numpy as np
from pyafn.commands.tools import fail
from pyafn.commands.tools import RunSpec
from pyafn.commands.tools import write_manifest
from pyafn.data import gen_synthetic
from pyafn.data import make_partial
from pyafn.data import write_csv
from pyafn.errsys.exceptions import AFNException
from result import Err
from result import Ok


def mean_norm(features: np.ndarray) -> float:
    return float(np.mean(np.sqrt(np.sum(features * features, axis=1))))


def cmd_gen_data(spec: RunSpec) -> int:
    match spec.config.shift_spec():
        case Ok(shift):
            pass
        case Err(error):
            return fail(error)

    source, target = gen_synthetic(shift)

    if spec.config["data.partial"]:
        try:
            source, target = make_partial(source, target, spec.config["data.partial_keep"])
        except AFNException as e:
            return fail(e.error)

    for name, ds in (("source", source), ("target", target)):
        match write_csv(ds, spec.artifact(name)):
            case Ok(path):
                spec.reporter.detail(f"{path}: {ds.n} rows, {ds.dim} features")
            case Err(error):
                return fail(error)

    ratio = mean_norm(target.features) / mean_norm(source.features)
    records = {"n_source": str(source.n), "n_target": str(target.n), "norm_ratio": f"{ratio:.6f}"}

    match write_manifest(spec, ["source", "target"], records):
        case Err(error):
            return fail(error)

    spec.reporter.success(f"target / source mean input norm: {ratio:.3f}")

    return 0
