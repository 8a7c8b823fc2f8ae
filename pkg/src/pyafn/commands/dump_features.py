"""
`afn dump-features`: eval-mode bottleneck features of every sample, with their norms.

With `model.embedding_size = 2` the file can be plotted directly as the radial picture
of both domains.
"""
from pyafn.commands.eval import load_model_and_domains
from pyafn.commands.tools import fail
from pyafn.commands.tools import RunSpec
from pyafn.commands.tools import write_manifest
from pyafn.data.tools import SHORT
from pyafn.metrics.csvout import write_rows
from pyafn.train import embed
from pyafn.train import row_norms
from result import Err
from result import Ok


def cmd_dump_features(spec: RunSpec) -> int:
    match load_model_and_domains(spec):
        case Ok((params, source, target)):
            pass
        case Err(error):
            return fail(error)

    header = ["domain", "label", "norm", *(f"f{j}" for j in range(params.embedding_size))]
    rows = []
    records: dict[str, str] = {}

    for ds in (source, target):
        f, _ = embed(params, ds.features)
        norms = row_norms(f)
        labels = [None] * ds.n if ds.labels is None else ds.labels.tolist()

        for label, norm, features in zip(labels, norms, f):
            rows.append((ds.domain_tag.value, label, norm, *features))

        records[f"mean_norm_{SHORT[ds.domain_tag]}"] = f"{norms.mean():.6f}"
        spec.reporter.detail(f"{ds.domain_tag.value}: {ds.n} samples, mean norm {norms.mean():.3f}")

    match write_rows(spec.artifact("features"), header, rows):
        case Err(error):
            return fail(error)

    match write_manifest(spec, ["features"], records, manifest="features_manifest"):
        case Err(error):
            return fail(error)

    spec.reporter.success(f"wrote {len(rows)} rows to {spec.artifact('features')}")

    return 0
