"""
Versioned, self-describing text checkpoints.

    afn-checkpoint 1
    architecture input_dim=16 n_classes=4 hidden=64,64 embedding_size=64 f_blocks=1 dropout_p=0.5 dropout_variant=l2_preserving
    batchnorm f.0 momentum=0.1 eps=1e-05
    tensor g.0.weight 16 64
    <row-major values, 17 significant digits>
    ...
    buffer f.0.running_mean 64
    <values>
    end 14

The trailing `end <records>` line makes truncation detectable.
"""
import os
from pathlib import Path

import numpy as np
from pyafn.autograd import Tensor
from pyafn.constants import CHECKPOINT_TAG
from pyafn.constants import CHECKPOINT_VERSION
from pyafn.errsys.errors import E012
from pyafn.errsys.errors import E015
from pyafn.errsys.exceptions import AFNException
from pyafn.errsys.tools import Error
from pyafn.nn import Architecture
from pyafn.nn import BatchNormState
from pyafn.nn import DropoutVariant
from pyafn.nn import FBlock
from pyafn.nn import Linear
from pyafn.nn import ModelParams
from pyafn.py_utils import fmt_real
from result import Err
from result import Ok
from result import Result


def _architecture_line(arch: Architecture) -> str:
    fields = {
        "input_dim": str(arch.input_dim),
        "n_classes": str(arch.n_classes),
        "hidden": ",".join(map(str, arch.hidden)),
        "embedding_size": str(arch.embedding_size),
        "f_blocks": str(arch.f_blocks),
        "dropout_p": fmt_real(arch.dropout_p),
        "dropout_variant": arch.dropout_variant.value,
    }
    return "architecture " + " ".join(f"{k}={v}" for k, v in fields.items())


def dump_checkpoint(params: ModelParams) -> list[str]:
    lines = [f"{CHECKPOINT_TAG} {CHECKPOINT_VERSION}", _architecture_line(params.architecture)]

    for i, block in enumerate(params.f_blocks):
        lines.append(f"batchnorm f.{i} momentum={fmt_real(block.bn.momentum)} eps={fmt_real(block.bn.eps)}")

    records = 0
    blocks: list[tuple[str, str, np.ndarray]] = [("tensor", name, t.values) for name, t in params.named_tensors()]
    blocks += [("buffer", name, values) for name, values in params.named_buffers()]

    for kind, name, values in blocks:
        lines.append(" ".join([kind, name, *map(str, values.shape)]))
        lines.append(" ".join(map(fmt_real, values.reshape(-1))))
        records += 1

    lines.append(f"end {records}")

    return lines


def save_checkpoint(params: ModelParams, path: str | Path) -> Result[Path, Error]:
    """
    Write the checkpoint atomically (temporary file + rename).
    """

    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")

    try:
        path.parent.mkdir(parents=True, exist_ok=True)

        with open(tmp, "w", encoding="utf-8", newline="\n") as f:
            f.write("\n".join(dump_checkpoint(params)) + "\n")

        os.replace(tmp, path)
    except OSError as e:
        return Err(E015(str(path), e.strerror or "I/O error"))

    return Ok(path)


def _parse_architecture(line: str) -> Architecture:
    kind, *pairs = line.split()

    if kind != "architecture":
        raise ValueError("missing architecture line")

    fields = dict(pair.split("=", 1) for pair in pairs)
    variant = DropoutVariant.get(fields["dropout_variant"], None)

    if variant is None:
        raise ValueError(f"unknown dropout variant {fields['dropout_variant']!r}")

    return Architecture(
        input_dim=int(fields["input_dim"]),
        n_classes=int(fields["n_classes"]),
        hidden=tuple(int(w) for w in fields["hidden"].split(",") if w),
        embedding_size=int(fields["embedding_size"]),
        f_blocks=int(fields["f_blocks"]),
        dropout_p=float(fields["dropout_p"]),
        dropout_variant=variant,
    )


def parse_checkpoint(name: str, lines: list[str]) -> Result[ModelParams, Error]:
    """
    Rebuild the parameters from checkpoint lines; nothing is returned unless every record parsed.
    """

    if not lines or lines[0].split() != [CHECKPOINT_TAG, str(CHECKPOINT_VERSION)]:
        found = lines[0] if lines else "<empty file>"
        return Err(E012(name, f"expected `{CHECKPOINT_TAG} {CHECKPOINT_VERSION}`, found {found!r}", 1))

    try:
        arch = _parse_architecture(lines[1])
    except (IndexError, KeyError, ValueError, AFNException) as e:
        return Err(E012(name, f"bad architecture line ({e})", 2))

    bn_settings: dict[str, tuple[float, float]] = {}
    records: dict[str, np.ndarray] = {}
    pos = 2

    try:
        while lines[pos].startswith("batchnorm "):
            _, block, momentum, eps = lines[pos].split()
            bn_settings[block] = (float(momentum.split("=")[1]), float(eps.split("=")[1]))
            pos += 1

        while not lines[pos].startswith("end"):
            kind, record, *dims = lines[pos].split()

            if kind not in {"tensor", "buffer"}:
                return Err(E012(name, f"unknown record kind {kind!r}", pos + 1))

            shape = tuple(int(d) for d in dims)
            values = np.array([float(v) for v in lines[pos + 1].split()], dtype=np.float64)

            if values.size != int(np.prod(shape)):
                return Err(E012(name, f"`{record}` holds {values.size} values for shape {list(shape)}", pos + 2))

            records[record] = values.reshape(shape)
            pos += 2

        if lines[pos].split() != ["end", str(len(records))]:
            return Err(E012(name, "record count does not match the end marker", pos + 1))
    except IndexError:
        return Err(E012(name, "file is truncated"))
    except ValueError as e:
        return Err(E012(name, f"unreadable record ({e})", pos + 1))

    try:
        params = _assemble(arch, records, bn_settings)
    except KeyError as e:
        return Err(E012(name, f"missing record {e}"))
    except AFNException as e:
        return Err(E012(name, f"records do not match the architecture: {e.error.summary}"))

    return Ok(params)


def _assemble(
    arch: Architecture,
    records: dict[str, np.ndarray],
    bn_settings: dict[str, tuple[float, float]],
) -> ModelParams:
    def lin(prefix: str) -> Linear:
        return Linear(
            Tensor.parameter(records[f"{prefix}.weight"], f"{prefix}.weight"),
            Tensor.parameter(records[f"{prefix}.bias"], f"{prefix}.bias"),
        )

    blocks: list[FBlock] = []

    for i in range(arch.f_blocks):
        prefix = f"f.{i}"
        momentum, eps = bn_settings[prefix]
        bn = BatchNormState(
            gamma=Tensor.parameter(records[f"{prefix}.gamma"], f"{prefix}.gamma"),
            beta=Tensor.parameter(records[f"{prefix}.beta"], f"{prefix}.beta"),
            running_mean=records[f"{prefix}.running_mean"],
            running_var=records[f"{prefix}.running_var"],
            momentum=momentum,
            eps=eps,
        )

        if bn.running_mean.shape != (bn.width,) or bn.running_var.shape != (bn.width,):
            raise KeyError(f"{prefix}.running_mean/var of width {bn.width}")

        blocks.append(FBlock(lin(prefix), bn))

    return ModelParams(arch, [lin(f"g.{i}") for i in range(len(arch.hidden))], blocks, lin("y"))


def load_checkpoint(path: str | Path) -> Result[ModelParams, Error]:
    try:
        with open(path, encoding="utf-8") as f:
            lines = f.read().splitlines()
    except OSError as e:
        return Err(E012(str(path), f"cannot read file ({e.strerror})"))
    except UnicodeDecodeError as e:
        return Err(E012(str(path), f"byte {e.start} is not UTF-8 text"))

    return parse_checkpoint(str(path), lines)
