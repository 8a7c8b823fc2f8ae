"""
CSV ingestion and export of domain datasets.

Format (UTF-8, header required): `f0,...,f{d-1},label,domain`. `label` is a nonnegative
integer, or empty on unlabeled target rows; `domain` is `source` or `target`.
"""
import csv
import io
import math
import re
from collections.abc import Iterable
from pathlib import Path

import numpy as np
from pyafn.data.tools import DomainDataset
from pyafn.data.tools import DomainTag
from pyafn.errsys.errors import E008
from pyafn.errsys.errors import E009
from pyafn.errsys.errors import E010
from pyafn.errsys.errors import E011
from pyafn.errsys.errors import E015
from pyafn.errsys.tools import Error
from pyafn.py_utils import fmt_real
from result import Err
from result import Ok
from result import Result


_LABEL = re.compile(r"[0-9]+")


def _expected_header(dim: int | None = None) -> str:
    return "f0,...,f{d-1},label,domain" if dim is None else ",".join([*(f"f{j}" for j in range(dim)), "label", "domain"])


def _check_header(path: str, header: list[str]) -> Result[int, Error]:
    dim = len(header) - 2

    if dim < 1 or header != _expected_header(dim).split(","):
        return Err(E008(path, header, _expected_header()))

    return Ok(dim)


def _undecodable(name: str, raw: bytes, e: UnicodeDecodeError) -> Error:
    """
    E009 at the line and column of the first byte that is not UTF-8.
    """

    line_start = raw.rfind(b"\n", 0, e.start) + 1
    header = raw.split(b"\n", 1)[0].decode("utf-8", "replace").strip().split(",")
    index = raw.count(b",", line_start, e.start)
    column = "header" if line_start == 0 else header[index] if index < len(header) else str(index)

    return E009(name, raw.count(b"\n", 0, e.start) + 1, column, "0x" + raw[e.start : e.end].hex())


def load_csv(path: str | Path, label_space: Iterable[int] | None = None) -> Result[DomainDataset, Error]:
    """
    Load one domain from a CSV file.

    When `label_space` is omitted it is inferred from the labels present.
    """

    name = str(path)
    declared = None if label_space is None else frozenset(label_space)

    try:
        with open(path, "rb") as f:
            raw = f.read()
    except OSError as e:
        return Err(E011(f"cannot read {name}: {e.strerror}", name))

    try:
        rows = list(csv.reader(io.StringIO(raw.decode("utf-8"), newline="")))
    except UnicodeDecodeError as e:
        return Err(_undecodable(name, raw, e))

    if not rows:
        return Err(E008(name, [], _expected_header()))

    match _check_header(name, rows[0]):
        case Ok(dim):
            pass
        case Err(error):
            return Err(error)

    features: list[list[float]] = []
    labels: list[int | None] = []
    domain: DomainTag | None = None
    seen_label = seen_missing = False

    for line, row in enumerate(rows[1:], start=2):
        if not row:
            continue

        if len(row) != dim + 2:
            return Err(E009(name, line, "*", ",".join(row)))

        values: list[float] = []

        for j, cell in enumerate(row[:dim]):
            try:
                value = float(cell)
            except ValueError:
                return Err(E009(name, line, f"f{j}", cell))

            if not math.isfinite(value):
                return Err(E009(name, line, f"f{j}", cell))

            values.append(value)

        label_cell, domain_cell = row[dim].strip(), row[dim + 1].strip()
        row_domain = DomainTag.get(domain_cell, None)

        if row_domain is None or (domain is not None and row_domain is not domain):
            return Err(E009(name, line, "domain", domain_cell))

        domain = row_domain

        if label_cell == "":
            if domain is DomainTag.Source or seen_label:
                return Err(E009(name, line, "label", label_cell))
            label = None
            seen_missing = True
        elif _LABEL.fullmatch(label_cell):
            if seen_missing:
                return Err(E009(name, line, "label", label_cell))
            label = int(label_cell)
            seen_label = True

            if declared is not None and label not in declared:
                return Err(E010(label, f"{name}:{line}", declared))
        else:
            return Err(E009(name, line, "label", label_cell))

        features.append(values)
        labels.append(label)

    if domain is None:
        return Err(E011("no data rows", name))

    present = None if labels[0] is None else np.array(labels, dtype=np.int64)
    space = declared if declared is not None else frozenset(() if present is None else present.tolist())

    return Ok(DomainDataset(np.array(features), present, space, domain))


def write_csv(ds: DomainDataset, path: str | Path) -> Result[Path, Error]:
    path = Path(path)

    try:
        path.parent.mkdir(parents=True, exist_ok=True)

        with open(path, "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(_expected_header(ds.dim).split(","))

            for i in range(ds.n):
                label = "" if ds.labels is None else str(int(ds.labels[i]))
                writer.writerow([*map(fmt_real, ds.features[i]), label, ds.domain_tag.value])
    except OSError as e:
        return Err(E015(str(path), e.strerror or "I/O error"))

    return Ok(path)
