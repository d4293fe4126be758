"""Family text format.

    # comment
    n=6 mod=2
    110000
    001100

The header line comes first (comments and blank lines aside), then one
member per line as an n-character string.  Families are 0/1 strings; vector
files (used for residue matrices such as a basis over F_3) may also use the
digits 2..9 when ``mod`` <= 10.
"""

from __future__ import annotations

import re
from pathlib import Path
from typing import Iterable

from .errors import ParseError
from .families import SetFamily, string_to_mask
from .linalg import ModVector

_HEADER = re.compile(r"^n\s*=\s*(\d+)\s+mod\s*=\s*(\d+)$")


def parse_vectors(text: str) -> tuple[int, int, list[ModVector]]:
    """Parse a family/vector file into ``(n, mod, vectors)``; order is preserved."""
    n = mod = None
    rows: list[ModVector] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if n is None:
            m = _HEADER.match(line)
            if not m:
                raise ParseError(f"expected header 'n=<int> mod=<int>', got {line!r}", lineno)
            n, mod = int(m.group(1)), int(m.group(2))
            if mod < 2:
                raise ParseError(f"mod must be >= 2, got {mod}", lineno)
            continue
        if len(line) != n:
            raise ParseError(f"member has length {len(line)}, expected {n}", lineno)
        if not line.isdigit():
            raise ParseError(f"member contains non-digit characters: {line!r}", lineno)
        digits = tuple(int(ch) for ch in line)
        bad = [d for d in digits if d >= mod]
        if bad:
            raise ParseError(f"digit {bad[0]} is not a residue mod {mod}", lineno)
        rows.append(ModVector(mod, digits))
    if n is None:
        raise ParseError("missing header line", None)
    return n, mod, rows


def parse_family(text: str) -> tuple[SetFamily, int]:
    """Parse a 0/1 family file into ``(family, mod)``."""
    n = None
    masks = []
    header_seen = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if not header_seen:
            m = _HEADER.match(line)
            if not m:
                raise ParseError(f"expected header 'n=<int> mod=<int>', got {line!r}", lineno)
            n, mod = int(m.group(1)), int(m.group(2))
            if mod < 2:
                raise ParseError(f"mod must be >= 2, got {mod}", lineno)
            header_seen = True
            continue
        if len(line) != n:
            raise ParseError(f"member has length {len(line)}, expected {n}", lineno)
        if set(line) - {"0", "1"}:
            raise ParseError(f"member is not a 0/1 string: {line!r}", lineno)
        masks.append(string_to_mask(line))
    if not header_seen:
        raise ParseError("missing header line", None)
    return SetFamily(n, tuple(masks)), mod


def format_family(F: SetFamily, mod: int = 2, comments: Iterable[str] = ()) -> str:
    lines = [f"# {c}" for c in comments]
    lines.append(f"n={F.ground_size} mod={mod}")
    lines.extend(F.strings())
    return "\n".join(lines) + "\n"


def format_vectors(vectors: Iterable[ModVector], n: int, mod: int, comments: Iterable[str] = ()) -> str:
    if mod > 10:
        raise ValueError("vector files use one digit per coordinate; mod must be <= 10")
    lines = [f"# {c}" for c in comments]
    lines.append(f"n={n} mod={mod}")
    lines.extend(str(v) for v in vectors)
    return "\n".join(lines) + "\n"


def read_family(path) -> tuple[SetFamily, int]:
    return parse_family(Path(path).read_text(encoding="utf-8"))


def read_vectors(path) -> tuple[int, int, list[ModVector]]:
    return parse_vectors(Path(path).read_text(encoding="utf-8"))


def write_family(path, F: SetFamily, mod: int = 2, comments: Iterable[str] = ()) -> None:
    Path(path).write_text(format_family(F, mod, comments), encoding="utf-8")
