"""
Command Line Interface of PyAFN.

## Generate the canned synthetic task

```sh
afn gen-data --out run --set run.name=canned
```

## Train, then evaluate the checkpoint

```sh
afn train --set objective.variant=safn --seed 0
afn eval --config run/default/manifest
```

## Everything else

```sh
afn robustness --set robustness.l_percent=5
afn train --set run.name=radial --set model.embedding_size=2
afn dump-features --config run/radial/manifest
afn selfcheck
afn sweep --set sweep.key=objective.delta_r --set sweep.values=0.5,1.0,1.5,2.0
```
"""
from argparse import ArgumentParser
from argparse import ArgumentTypeError
from argparse import Namespace
from pathlib import Path
from typing import NoReturn

from pyafn.commands import COMMANDS
from pyafn.commands import RunSpec
from pyafn.commands.tools import fail
from pyafn.config import parse_config
from pyafn.constants import __version__
from pyafn.errsys.exceptions import AFNException
from pyafn.errsys.tools import ErrorKind
from pyafn.errsys.tools import report_panic
from pyafn.py_utils import eprint
from pyafn.py_utils import Reporter
from result import Err
from result import Ok

SEED_KEYS = {"gen-data": ("data.seed",)}


class AFNArgumentParser(ArgumentParser):
    """
    Usage errors are configuration errors: same prefix, same exit code.
    """

    def error(self, message: str) -> NoReturn:
        self.print_usage()
        eprint(f"afn:config:usage: {message}")
        raise SystemExit(ErrorKind.Config.exit_code)


def seed_type(s: str) -> int:
    try:
        seed = int(s)
    except ValueError:
        raise ArgumentTypeError(f"{s!r} is not an integer") from None

    if not 0 <= seed < 2**64:
        raise ArgumentTypeError(f"{seed} is not an unsigned 64-bit integer")

    return seed


def get_args(argv: list[str] | None = None) -> Namespace:
    parser = AFNArgumentParser(prog="afn", description="Adaptive feature norm domain adaptation.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")

    shared = ArgumentParser(add_help=False)
    shared.add_argument("--config", type=Path, help="configuration file (a run manifest works too)")
    shared.add_argument("--out", type=Path, default=Path("run"), help="output directory")
    shared.add_argument("--seed", type=seed_type, help="overrides train.seed (data.seed for gen-data)")
    shared.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override one key")
    shared.add_argument("--quiet", action="store_true")
    shared.add_argument("--raise-python-exceptions", action="store_true")

    subparsers = parser.add_subparsers(dest="subcommand", required=True)

    for name, (_, description) in COMMANDS.items():
        subparsers.add_parser(name, parents=[shared], description=description, help=description)

    return parser.parse_args(argv)


def main_debug(argv: list[str] | None = None) -> int:
    args = get_args(argv)
    reporter = Reporter(quiet=args.quiet)

    match parse_config(args.config, args.set, seed=args.seed, seed_keys=SEED_KEYS.get(args.subcommand, ("train.seed",))):
        case Ok(config):
            pass
        case Err(errors):
            return fail(errors)

    spec = RunSpec(
        command=args.subcommand,
        config=config,
        out=args.out,
        config_path=args.config,
        overrides=args.set,
        seed=args.seed,
        reporter=reporter,
    )
    command, _ = COMMANDS[args.subcommand]

    try:
        return command(spec)
    except AFNException as e:
        if args.raise_python_exceptions:
            raise
        return fail(e.error)
    except Exception as e:
        if args.raise_python_exceptions:
            raise
        report_panic(e)
        return ErrorKind.Internal.exit_code


def main() -> int:
    return main_debug()
