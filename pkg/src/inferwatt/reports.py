"""Key-value report files.

Reports serialize as `key: value` lines (one per field, `#` comments
allowed) so golden tests and shell pipelines can consume them without a
parser dependency. Floats are written with repr for byte-stable output.
"""

from __future__ import annotations

from dataclasses import asdict, is_dataclass
from pathlib import Path

from .errors import ParseError


def format_report(obj, title: str | None = None) -> str:
    data = asdict(obj) if is_dataclass(obj) else dict(obj)
    lines = [f"# {title}"] if title else []
    for key, value in data.items():
        if isinstance(value, float):
            lines.append(f"{key}: {value!r}")
        else:
            lines.append(f"{key}: {value}")
    return "\n".join(lines) + "\n"


def write_report(obj, path: str | Path, title: str | None = None) -> None:
    Path(path).write_text(format_report(obj, title))


def parse_report(text: str, path: str = "<report>") -> dict[str, float | str]:
    """Read a key-value report back; numeric values become floats."""
    out: dict[str, float | str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if ":" not in line:
            raise ParseError(path, lineno, f"expected 'key: value', got '{line}'")
        key, _, value = line.partition(":")
        value = value.strip()
        try:
            out[key.strip()] = float(value)
        except ValueError:
            out[key.strip()] = value
    return out


def read_report(path: str | Path) -> dict[str, float | str]:
    path = Path(path)
    return parse_report(path.read_text(), str(path))
