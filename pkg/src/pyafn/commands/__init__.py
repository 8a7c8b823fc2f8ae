"""
The `afn` commands, one module each.
"""
from collections.abc import Callable

from pyafn.commands.dump_features import cmd_dump_features
from pyafn.commands.eval import cmd_eval
from pyafn.commands.gen_data import cmd_gen_data
from pyafn.commands.robustness import cmd_robustness
from pyafn.commands.selfcheck import cmd_selfcheck
from pyafn.commands.sweep import cmd_sweep
from pyafn.commands.tools import RunSpec
from pyafn.commands.train import cmd_train

COMMANDS: dict[str, tuple[Callable[[RunSpec], int], str]] = {
    "gen-data": (cmd_gen_data, "Write the synthetic source and target domains as CSV files."),
    "train": (cmd_train, "Train a model with the configured adaptation variant."),
    "eval": (cmd_eval, "Evaluate a saved checkpoint on the configured domains."),
    "robustness": (cmd_robustness, "Measure the closed, outlier and partial negative gaps."),
    "dump-features": (cmd_dump_features, "Export the bottleneck features and their norms."),
    "selfcheck": (cmd_selfcheck, "Run the invariant suite of the numeric core."),
    "sweep": (cmd_sweep, "Train once per value of one configuration key."),
}

__all__ = ("COMMANDS", "RunSpec")
