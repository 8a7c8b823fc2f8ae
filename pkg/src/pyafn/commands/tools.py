"""
Shared plumbing of the commands: the parsed run, dataset selection, manifests and
error reporting.
"""
import warnings
from collections.abc import Iterator
from contextlib import contextmanager
from dataclasses import dataclass
from dataclasses import field
from pathlib import Path

from pyafn.config import Config
from pyafn.config import parse_config_lines
from pyafn.constants import __version__
from pyafn.constants import RUN_FILES
from pyafn.data import DomainDataset
from pyafn.data import DomainTag
from pyafn.data import gen_synthetic
from pyafn.data import load_csv
from pyafn.data import make_partial
from pyafn.errsys.errors import E006
from pyafn.errsys.errors import E015
from pyafn.errsys.errors import E018
from pyafn.errsys.exceptions import AFNException
from pyafn.errsys.tools import Error
from pyafn.errsys.tools import report_abortion
from pyafn.py_utils import Reporter
from pyafn.py_utils import sha256_file
from pyafn.py_utils import write_text_lines
from result import Err
from result import Ok
from result import Result


@dataclass
class RunSpec:
    """
    A parsed command line: command name, configuration sources and output directory.
    """

    command: str
    config: Config
    out: Path
    config_path: Path | None = None
    overrides: list[str] = field(default_factory=list)
    seed: int | None = None
    reporter: Reporter = field(default_factory=Reporter)

    @property
    def run_dir(self) -> Path:
        return self.out / self.config["run.name"]

    def artifact(self, name: str) -> Path:
        return self.run_dir / RUN_FILES[name]

    @property
    def checkpoint_path(self) -> Path:
        explicit = self.config["run.checkpoint"]
        return Path(explicit) if explicit else self.artifact("checkpoint")


def fail(errors: Error | list[Error]) -> int:
    """
    Print every error, then the abortion line; return the exit code of the first error.
    """

    if isinstance(errors, Error):
        errors = [errors]

    for error in errors:
        error.throw()

    report_abortion(errors[0])

    return errors[0].kind.exit_code


@contextmanager
def surfaced_warnings(reporter: Reporter) -> Iterator[None]:
    """
    Collect the warnings raised in the block and hand them to the reporter.
    """

    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        yield

    for warning in caught:
        reporter.warn(str(warning.message))


# *- DATASETS -* #


def _load_pair(config: Config) -> Result[tuple[DomainDataset, DomainDataset], Error]:
    source_csv, target_csv = config["data.source_csv"], config["data.target_csv"]

    if bool(source_csv) != bool(target_csv):
        return Err(E006("data.source_csv", "set both data.source_csv and data.target_csv, or neither"))

    if not source_csv:
        match config.shift_spec():
            case Ok(spec):
                return Ok(gen_synthetic(spec))
            case Err(error):
                return Err(error)

    match load_csv(source_csv):
        case Ok(source):
            pass
        case Err(error):
            return Err(error)

    match load_csv(target_csv, source.label_space):
        case Ok(target):
            pass
        case Err(error):
            return Err(error)

    if source.domain_tag is not DomainTag.Source or not source.is_labeled:
        return Err(E006("data.source_csv", "expected labeled rows of the `source` domain"))

    if target.domain_tag is not DomainTag.Target:
        return Err(E006("data.target_csv", "expected rows of the `target` domain"))

    if source.dim != target.dim:
        return Err(E018(source.dim, target.dim))

    return Ok((source, target))


def load_domains(config: Config, *, partial: bool | None = None) -> Result[tuple[DomainDataset, DomainDataset], Error]:
    """
    Source and target datasets selected by the `data.*` keys.

    The target is restricted to `data.partial_keep` in the partial setting (`partial`
    defaults to `data.partial`).
    """

    match _load_pair(config):
        case Ok((source, target)):
            pass
        case Err(error):
            return Err(error)

    if not (config["data.partial"] if partial is None else partial):
        return Ok((source, target))

    try:
        return Ok(make_partial(source, target, config["data.partial_keep"]))
    except AFNException as e:
        return Err(e.error)


# *- MANIFESTS -* #


def write_manifest(
    spec: RunSpec,
    artifacts: list[str],
    records: dict[str, str] | None = None,
    *,
    manifest: str = "manifest",
) -> Result[Path, Error]:
    """
    Write `run/<name>/manifest`: the configuration snapshot, the artifact hashes and
    the recorded results. It is a valid configuration file for rerunning the command.

    Commands that read an existing run (`eval`, `dump-features`) pass their own manifest
    name so the training manifest is kept.
    """

    entries = {"command": spec.command, "version": __version__}

    for name in artifacts:
        entries[f"artifact.{name}"] = sha256_file(spec.artifact(name))

    entries |= records or {}
    path = spec.artifact(manifest)

    try:
        write_text_lines(path, spec.config.snapshot(entries))
    except OSError as e:
        return Err(E015(str(path), e.strerror or "I/O error"))

    return Ok(path)


def read_manifest(path: Path) -> dict[str, str]:
    """
    The `[manifest]` entries of a manifest file; empty when it is missing or unreadable.
    """

    try:
        with open(path, encoding="utf-8") as f:
            lines = f.read().splitlines()
    except OSError:
        return {}

    match parse_config_lines(str(path), lines):
        case Ok(config):
            return config.manifest
        case Err(_):
            return {}
