"""
Configuration files, `--set` overrides and run manifests.

Grammar (UTF-8 text, one entry per line):

    # comment
    [train]                 section header: prefixes the following keys with `train.`
    epochs = 200            `key = value`, the key is relative to the current section
    objective.lambda = 0.05 or absolute when there is no section

Precedence: defaults < configuration file < `--seed` < `--set key=value`.
The `manifest.*` namespace is reserved for run manifests and ignored on load, so a
manifest is itself a valid configuration file.
"""
import math
import re
from collections.abc import Iterable
from dataclasses import dataclass
from dataclasses import field
from dataclasses import replace
from difflib import get_close_matches
from pathlib import Path
from typing import Any
from typing import NamedTuple

from pyafn.config.internal import Boolean
from pyafn.config.internal import choice
from pyafn.config.internal import Integer
from pyafn.config.internal import IntList
from pyafn.config.internal import InternalType
from pyafn.config.internal import Real
from pyafn.config.internal import RealList
from pyafn.config.internal import Text
from pyafn.constants import DEFAULT_BATCH_SIZE
from pyafn.constants import DEFAULT_DELTA_R
from pyafn.constants import DEFAULT_DROPOUT_P
from pyafn.constants import DEFAULT_EMBEDDING_SIZE
from pyafn.constants import DEFAULT_ENT_WEIGHT
from pyafn.constants import DEFAULT_EPOCHS
from pyafn.constants import DEFAULT_HIDDEN
from pyafn.constants import DEFAULT_LAMBDA
from pyafn.constants import DEFAULT_LEARNING_RATE
from pyafn.constants import DEFAULT_MOMENTUM
from pyafn.constants import DEFAULT_RADIUS
from pyafn.constants import MANIFEST_PREFIX
from pyafn.data import CANNED_PARTIAL_KEEP
from pyafn.data import ShiftSpec
from pyafn.errsys.errors import E006
from pyafn.errsys.errors import E007
from pyafn.errsys.exceptions import AFNException
from pyafn.errsys.tools import Error
from pyafn.nn import DropoutVariant
from pyafn.objectives import ObjectiveConfig
from pyafn.objectives import Variant
from pyafn.py_utils import fmt_real
from pyafn.train import TrainConfig
from result import Err
from result import Ok
from result import Result


class Key(NamedTuple):
    type: InternalType[Any]
    default: Any
    doc: str


SCHEMA: dict[str, Key] = {
    # synthetic shift and dataset selection
    "data.n_classes": Key(Integer, 4, "number of classes K"),
    "data.dim": Key(Integer, 16, "feature dimension d"),
    "data.samples": Key(Integer, 2000, "samples per domain"),
    "data.radius": Key(Real, 4.0, "radius of the circle holding the class means"),
    "data.noise": Key(Real, 1.2, "isotropic noise standard deviation"),
    "data.angle_deg": Key(Real, 30.0, "target rotation in degrees"),
    "data.scale": Key(Real, 0.5, "target scale factor"),
    "data.translation": Key(RealList, (), "target translation (0, 2 or d components)"),
    "data.seed": Key(Integer, 0, "generator seed"),
    "data.partial": Key(Boolean, False, "partial setting: restrict the target to data.partial_keep"),
    "data.partial_keep": Key(IntList, CANNED_PARTIAL_KEEP, "shared classes of the partial setting"),
    "data.source_csv": Key(Text, "", "source CSV; empty means synthetic"),
    "data.target_csv": Key(Text, "", "target CSV; empty means synthetic"),
    "data.target_fraction": Key(Real, 1.0, "fraction of the unlabeled target pool used for training"),
    # network
    "model.hidden": Key(IntList, DEFAULT_HIDDEN, "widths of the backbone G"),
    "model.embedding_size": Key(Integer, DEFAULT_EMBEDDING_SIZE, "bottleneck size E"),
    "model.f_blocks": Key(Integer, 1, "FC-BN-ReLU-Dropout blocks in F_f"),
    "model.dropout_p": Key(Real, DEFAULT_DROPOUT_P, "dropout probability"),
    "model.dropout_variant": Key(choice(DropoutVariant.values()), DropoutVariant.L2Preserving.value, "dropout scaling"),
    # objective
    "objective.variant": Key(choice(Variant.values()), Variant.Safn.value, "adaptation variant"),
    "objective.preset": Key(choice(("none", "office", "visda")), "none", "hyperparameter preset"),
    "objective.lambda": Key(Real, DEFAULT_LAMBDA, "weight of the norm penalty"),
    "objective.radius": Key(Real, DEFAULT_RADIUS, "HAFN radius R, SAFN cap"),
    "objective.delta_r": Key(Real, DEFAULT_DELTA_R, "SAFN step Δr"),
    "objective.ent": Key(Boolean, False, "add entropy minimization on the target"),
    "objective.ent_weight": Key(Real, DEFAULT_ENT_WEIGHT, "weight of the entropy term"),
    # optimization
    "train.learning_rate": Key(Real, DEFAULT_LEARNING_RATE, "SGD learning rate"),
    "train.momentum": Key(Real, DEFAULT_MOMENTUM, "SGD momentum"),
    "train.epochs": Key(Integer, DEFAULT_EPOCHS, "passes over the larger domain"),
    "train.batch_size": Key(Integer, DEFAULT_BATCH_SIZE, "samples per domain per iteration"),
    "train.seed": Key(Integer, 0, "initialization, dropout and batching seed"),
    # commands
    "robustness.l_percent": Key(Real, 5.0, "labeled target percentage of regime (a)"),
    "robustness.parallel": Key(Boolean, False, "run the three regimes on separate threads"),
    "run.name": Key(Text, "default", "run directory name under --out"),
    "run.checkpoint": Key(Text, "", "checkpoint to load; empty means the run directory's"),
    "sweep.key": Key(Text, "", "key swept by `afn sweep`"),
    "sweep.values": Key(Text, "", "comma-separated values of the swept key"),
    "selfcheck.fault": Key(Text, "", "primitive whose backward rule is negated"),
}

_PRESET_KEYS = ("objective.lambda", "objective.radius", "objective.delta_r")
_SECTION = re.compile(r"\[\s*([A-Za-z_][\w.]*)\s*\]")
_ENTRY = re.compile(r"([A-Za-z_][\w.]*)\s*=(.*)")
_QUOTED_KEY = re.compile(r"`([\w.]+)`")
_COMMENT = re.compile(r"(?:^|\s)#.*$")


def render(value: Any) -> str:
    """
    Canonical text of a value; parsing it back gives the same value.
    """

    match value:
        case bool():
            return "true" if value else "false"
        case float():
            return fmt_real(value)
        case tuple():
            return ",".join(render(v) for v in value)
        case _:
            return str(value)


@dataclass
class Config:
    values: dict[str, Any] = field(default_factory=lambda: {k: key.default for k, key in SCHEMA.items()})
    explicit: set[str] = field(default_factory=set)
    locations: dict[str, str] = field(default_factory=dict)
    manifest: dict[str, str] = field(default_factory=dict)

    def __getitem__(self, key: str) -> Any:
        return self.values[key]

    def assign(self, key: str, raw: str, location: str | None) -> Error | None:
        """
        Type-check and store one entry; return the error instead of raising.
        """

        if key.startswith(MANIFEST_PREFIX):
            self.manifest[key.removeprefix(MANIFEST_PREFIX)] = raw.strip()
            return None

        if key not in SCHEMA:
            return E007(key, location, get_close_matches(key, SCHEMA.keys(), n=3))

        expected = SCHEMA[key].type

        match expected.evaluate(raw.strip()):
            case Ok(value):
                if isinstance(value, float) and not math.isfinite(value):
                    return E006(key, f"{raw.strip()!r} is not finite", location)
                self.values[key] = value
                self.explicit.add(key)
                if location is not None:
                    self.locations[key] = location
                return None
            case Err(_):
                return E006(key, f"expected {expected.name}, found {raw.strip()!r}", location)

    def with_value(self, key: str, raw: str) -> Result["Config", Error]:
        copy = replace(
            self,
            values=dict(self.values),
            explicit=set(self.explicit),
            locations=dict(self.locations),
            manifest=dict(self.manifest),
        )
        error = copy.assign(key, raw, f"sweep value of `{key}`")

        return Ok(copy) if error is None else Err(error)

    # *- TYPED VIEWS -* #

    def _locate(self, error: Error) -> Error:
        if error.location is None:
            quoted = _QUOTED_KEY.search(error.summary)
            if quoted is not None and quoted.group(1) in self.locations:
                return replace(error, location=self.locations[quoted.group(1)])
        return error

    def objective(self) -> ObjectiveConfig:
        variant = Variant(self["objective.variant"])

        if self["objective.preset"] == "none":
            base = ObjectiveConfig(variant, self["objective.lambda"], self["objective.radius"], self["objective.delta_r"])
        else:
            base = ObjectiveConfig.preset(self["objective.preset"], variant)
            lam, radius, delta_r = (self[k] if k in self.explicit else None for k in _PRESET_KEYS)
            base = replace(
                base,
                lam=base.lam if lam is None else lam,
                radius=base.radius if radius is None else radius,
                delta_r=base.delta_r if delta_r is None else delta_r,
            )

        return replace(base, ent=self["objective.ent"], ent_weight=self["objective.ent_weight"])

    def train_config(self) -> Result[TrainConfig, Error]:
        try:
            return Ok(
                TrainConfig(
                    objective=self.objective(),
                    learning_rate=self["train.learning_rate"],
                    momentum=self["train.momentum"],
                    epochs=self["train.epochs"],
                    batch_size=self["train.batch_size"],
                    seed=self["train.seed"],
                    hidden=self["model.hidden"],
                    embedding_size=self["model.embedding_size"],
                    f_blocks=self["model.f_blocks"],
                    dropout_p=self["model.dropout_p"],
                    dropout_variant=DropoutVariant(self["model.dropout_variant"]),
                )
            )
        except AFNException as e:
            return Err(self._locate(e.error))

    def shift_spec(self) -> Result[ShiftSpec, Error]:
        try:
            return Ok(
                ShiftSpec(
                    n_classes=self["data.n_classes"],
                    dim=self["data.dim"],
                    samples=self["data.samples"],
                    radius=self["data.radius"],
                    noise=self["data.noise"],
                    angle=math.radians(self["data.angle_deg"]),
                    scale=self["data.scale"],
                    translation=self["data.translation"],
                    seed=self["data.seed"],
                )
            )
        except AFNException as e:
            return Err(self._locate(e.error))

    def _resolved_values(self) -> dict[str, Any]:
        """
        `values` with the objective keys a preset supplies replaced by the preset's numbers,
        unless they were set explicitly.
        """

        values = dict(self.values)

        if self["objective.preset"] == "none":
            return values

        preset = ObjectiveConfig.preset(self["objective.preset"], Variant(self["objective.variant"]))

        for key, value in zip(_PRESET_KEYS, (preset.lam, preset.radius, preset.delta_r)):
            if key not in self.explicit:
                values[key] = value

        return values

    def snapshot(self, manifest: dict[str, str] | None = None) -> list[str]:
        """
        The full configuration as config-file lines, followed by the `[manifest]` section.

        Preset-driven objective values are written as numbers, so a rerun from the
        snapshot resolves the same objective even though every key in it is explicit.
        """

        values = self._resolved_values()
        lines = ["# afn run manifest"]
        section = None

        for key in SCHEMA:
            head, _, tail = key.partition(".")

            if head != section:
                lines += ["", f"[{head}]"]
                section = head

            lines.append(f"{tail} = {render(values[key])}")

        if manifest:
            lines += ["", "[manifest]"]
            lines += [f"{k} = {v}" for k, v in manifest.items()]

        return lines


# *- PARSING -* #


def parse_config_lines(name: str, lines: Iterable[str], config: Config | None = None) -> Result[Config, list[Error]]:
    """
    Parse configuration lines into `config` (a fresh default configuration when omitted).

    Every problem of the file is collected before giving up.
    """

    config = Config() if config is None else config
    errors: list[Error] = []
    seen: dict[str, int] = {}
    section = ""

    for line_number, line in enumerate(lines, start=1):
        location = f"{name}:{line_number}"
        text = _COMMENT.sub("", line).strip()

        if not text:
            continue

        if (header := _SECTION.fullmatch(text)) is not None:
            section = header.group(1) + "."
            continue

        entry = _ENTRY.fullmatch(text)

        if entry is None:
            errors.append(E006(text, "expected `key = value` or `[section]`", location))
            continue

        key = section + entry.group(1)

        if key in seen and not key.startswith(MANIFEST_PREFIX):
            errors.append(E006(key, f"duplicate key, first set on line {seen[key]}", location))
            continue

        seen[key] = line_number

        if (error := config.assign(key, entry.group(2), location)) is not None:
            errors.append(error)

    return Ok(config) if not errors else Err(errors)


def parse_config(
    path: str | Path | None,
    overrides: Iterable[str] = (),
    *,
    seed: int | None = None,
    seed_keys: Iterable[str] = ("train.seed",),
) -> Result[Config, list[Error]]:
    """
    Build the effective configuration: defaults, then the file, then `--seed`, then `--set`.
    """

    config = Config()
    errors: list[Error] = []

    if path is not None:
        try:
            with open(path, encoding="utf-8") as f:
                lines = f.read().splitlines()
        except OSError as e:
            return Err([E006("--config", f"cannot read {path} ({e.strerror})")])
        except UnicodeDecodeError as e:
            return Err([E006("--config", f"{path} is not UTF-8 text (byte {e.start})")])

        match parse_config_lines(str(path), lines, config):
            case Err(file_errors):
                errors += file_errors

    if seed is not None:
        for key in seed_keys:
            if (error := config.assign(key, str(seed), "--seed")) is not None:
                errors.append(error)

    for override in overrides:
        key, sep, raw = override.partition("=")

        if not sep:
            errors.append(E006(override, "expected `--set key=value`", "--set"))
            continue

        if (error := config.assign(key.strip(), raw, f"--set {override}")) is not None:
            errors.append(error)

    return Ok(config) if not errors else Err(errors)
