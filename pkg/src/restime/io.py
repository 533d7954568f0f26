"""Byte-stable CSV/JSON tables with a provenance header.

CSV output starts with one ``# {json}`` metadata line, followed by one or
more tables separated by a blank line.  Floats are written with ``repr`` so
they round-trip exactly; there are no timestamps, so identical inputs give
identical bytes.
"""

from __future__ import annotations

import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Sequence

from . import __version__

__all__ = ["Table", "provenance", "render", "emit"]


@dataclass(frozen=True)
class Table:
    name: str
    columns: Sequence[str]
    rows: Sequence[Sequence[Any]]


def _clean(x):
    if hasattr(x, "item"):
        x = x.item()
    if isinstance(x, float) and not math.isfinite(x):
        return None
    return x


def _cell(x) -> str:
    x = _clean(x)
    if x is None:
        return "nan"
    if isinstance(x, float):
        return repr(x)
    return str(x)


def provenance(command: str, params: dict, convention: str | None, seed: int | None = None,
               **summary) -> dict:
    meta = {
        "tool": "restime",
        "version": __version__,
        "command": command,
        "params": {k: _clean(v) for k, v in params.items()},
        "length_convention": convention,
        "seed": seed,
    }
    meta.update({k: _clean(v) for k, v in summary.items()})
    return meta


def render(meta: dict, tables: Sequence[Table], fmt: str = "csv") -> str:
    if fmt == "json":
        doc = {"metadata": meta}
        for t in tables:
            doc[t.name] = {"columns": list(t.columns),
                           "rows": [[_clean(x) for x in row] for row in t.rows]}
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if fmt != "csv":
        raise ValueError(f"unknown format {fmt!r}")
    parts = ["# " + json.dumps(meta, sort_keys=True) + "\n"]
    for k, t in enumerate(tables):
        if k:
            parts.append("\n")
        parts.append(",".join(t.columns) + "\n")
        parts.extend(",".join(_cell(x) for x in row) + "\n" for row in t.rows)
    return "".join(parts)


def emit(text: str, out: str | Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", newline="\n") as fh:
            fh.write(text)
