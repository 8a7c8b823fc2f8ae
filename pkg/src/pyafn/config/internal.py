"""
Value types of configuration keys.

A type is a pattern the raw text must match in full, and a caster applied to matching
text. `evaluate` never raises: a mismatch is `Err(None)` and the caller names the key.
"""
import re
from collections.abc import Callable
from collections.abc import Iterable
from dataclasses import dataclass
from dataclasses import field
from typing import Generic
from typing import TypeVar

from result import Err
from result import Ok
from result import Result

T = TypeVar("T")

_INT = r"[+-]?[0-9]+"
_REAL = r"[+-]?(?:[0-9]+(?:\.[0-9]*)?|\.[0-9]+)(?:[eE][+-]?[0-9]+)?"


def _list_of(item: str) -> str:
    return rf"(?:\s*{item}(?:\s*,\s*{item})*\s*)?"


def _items(s: str) -> list[str]:
    return [part.strip() for part in s.split(",") if part.strip()]


@dataclass(frozen=True)
class InternalType(Generic[T]):
    """
    The type expected by a key; `name` is what error messages call it.
    """

    name: str
    regex: str
    caster: Callable[[str], T]
    pattern: re.Pattern[str] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "pattern", re.compile(self.regex))

    def evaluate(self, s: str) -> Result[T, None]:
        if self.pattern.fullmatch(s) is None:
            return Err(None)

        return Ok(self.caster(s))


def choice(options: Iterable[str]) -> InternalType[str]:
    options = tuple(options)
    return InternalType(
        "one of " + ", ".join(map(repr, options)),
        "|".join(map(re.escape, options)),
        str,
    )


Integer = InternalType("integer", _INT, int)
Real = InternalType("real", _REAL, float)
Boolean = InternalType("boolean", r"(?i)true|false|yes|no|on|off", lambda s: s.lower() in {"true", "yes", "on"})
IntList = InternalType("comma-separated integers", _list_of(_INT), lambda s: tuple(map(int, _items(s))))
RealList = InternalType("comma-separated reals", _list_of(_REAL), lambda s: tuple(map(float, _items(s))))
Text = InternalType("text", r"[^\n]*", str.strip)
