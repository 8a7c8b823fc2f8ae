"""
Small helpers shared by every package: enums, terminal output and file writing.
"""
import hashlib
import os
import sys
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Any


class MapLikeEnum(Enum):
    """
    Enum looked up by value, e.g. `Variant.get("hafn", None)`.
    """

    @classmethod
    def values(cls):
        yield from (member.value for member in cls)

    @classmethod
    def contains(cls, value: Any) -> bool:
        return any(member.value == value for member in cls)

    @classmethod
    def get(cls, value: Any, default: Any) -> Any:
        return cls(value) if cls.contains(value) else default


def eprint(*values: object, sep: str = " ", end: str = "\n", flush: bool = False) -> None:
    """
    `print` on stderr.
    """

    print(*values, sep=sep, end=end, file=sys.stderr, flush=flush)


def _ansi_enabled() -> bool:
    return "NO_COLOR" not in os.environ and sys.stdout.isatty()


def bold(s: str) -> str:
    return f"\x1b[1m{s}\x1b[22m" if _ansi_enabled() else s


def light(s: str) -> str:
    return f"\x1b[2m{s}\x1b[22m" if _ansi_enabled() else s


def color(s: str, c: int) -> str:
    return f"\x1b[3{c}m{s}\x1b[39m" if _ansi_enabled() else s


def write_text_lines(path: Path, lines: list[str]) -> None:
    """
    Write `lines` to `path`, creating parent directories.

    Lines are always joined with '\\n' so that output files are byte-identical
    across platforms.
    """

    path.parent.mkdir(parents=True, exist_ok=True)

    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for line in lines:
            f.write(line + "\n")


def sha256_file(path: Path) -> str:
    digest = hashlib.sha256()

    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 16), b""):
            digest.update(chunk)

    return digest.hexdigest()


def fmt_real(value: float) -> str:
    """
    Locale-independent decimal with 17 significant digits (exact float64 round-trip).
    """

    return format(float(value), ".17g")


@dataclass
class Reporter:
    """
    Human-readable progress on stdout, warnings on stderr.

    Library functions take an optional reporter; `None` means silent.
    """

    quiet: bool = False

    def info(self, message: str) -> None:
        if not self.quiet:
            print(color("=> ", 6) + message)

    def detail(self, message: str) -> None:
        if not self.quiet:
            print(light("   " + message))

    def success(self, message: str) -> None:
        if not self.quiet:
            print(color(message, 2))

    def failure(self, message: str) -> None:
        eprint(bold(color(message, 1)))

    def warn(self, message: str) -> None:
        eprint(color(f"warning: {message}", 3))
