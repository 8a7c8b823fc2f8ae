"""
Error values of PyAFN and their rendering on stderr.
"""
from dataclasses import dataclass
from dataclasses import field

from pyafn.py_utils import bold
from pyafn.py_utils import color
from pyafn.py_utils import eprint
from pyafn.py_utils import MapLikeEnum


class ErrorKind(MapLikeEnum):
    """
    Error families and the CLI exit code each one maps to.
    """

    Config = 1
    Data = 2
    Numeric = 3
    Internal = 4

    @property
    def exit_code(self) -> int:
        return self.value


@dataclass
class Error:
    """
    One diagnostic: a code such as `E006`, its family, a summary, and where it happened
    (`file:line`, a flag, or a sample). Optional help lines follow the summary.
    """

    id: str
    kind: ErrorKind

    summary: str
    location: str | None = None

    hint_message: str | None = None
    candidate_messages: list[str] = field(default_factory=list)

    def oneline(self) -> str:
        """
        Machine-parsable single line: `afn:<kind>:<id>: <summary>`.
        """

        where = f" ({self.location})" if self.location else ""
        return f"afn:{self.kind.name.lower()}:{self.id}: {self.summary}{where}"

    def help_lines(self) -> list[str]:
        if not self.hint_message:
            return []

        arrow = color("=", 4) + " " + bold("help:")
        lines = [f"  {arrow} {self.hint_message}"]
        lines += [f"    {arrow} {candidate}" for candidate in self.candidate_messages]

        return lines

    def throw(self, *, verbose: bool = True) -> None:
        """
        Print the one-line form, then (verbose) the decorated summary, location and help.
        """

        eprint(self.oneline())

        if not verbose:
            return

        eprint(bold(f"error[{color(self.id, 1)}]: {self.summary}"))

        if self.location:
            eprint(color("  --> ", 4) + self.location)

        for line in self.help_lines():
            eprint(line)


def report_abortion(error: Error) -> None:
    """
    Last line printed when a command stops on an `Error`.
    """

    eprint(bold(color("error", 1) + f": aborting due to previous {error.kind.name.lower()} error"))


def report_panic(reason: Exception) -> None:
    """
    Last lines printed when a command stops on an unexpected Python exception.
    """

    eprint(f"afn:internal:panic: {reason}")
    eprint(bold(color(f"internal error: {type(reason).__name__}: {reason}", 1)))
