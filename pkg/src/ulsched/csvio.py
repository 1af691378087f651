"""Deterministic CSV tables with a `#`-prefixed metadata manifest.

Every run writes the resolved configuration (SI units, seed, engine
versions) as comment lines above the header, so a table is
self-describing and a re-run with the same inputs is byte-identical —
nothing time- or host-dependent ever goes in.
"""
from __future__ import annotations

import io
from typing import Iterable, Mapping, Optional, Sequence, TextIO, Union

Cell = Union[str, float, int, None]


def format_cell(v: Cell) -> str:
    """Shortest round-trip text for floats; empty string for missing."""
    if v is None:
        return ""
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, float):
        return repr(v)
    return str(v)


def table_to_string(columns: Sequence[str], rows: Iterable[Sequence[Cell]],
                    manifest: Optional[Mapping[str, Cell]] = None) -> str:
    buf = io.StringIO()
    if manifest:
        for key in manifest:
            buf.write(f"# {key} = {format_cell(manifest[key])}\n")
    buf.write(",".join(columns) + "\n")
    for row in rows:
        if len(row) != len(columns):
            raise ValueError(
                f"row has {len(row)} cells but table has {len(columns)} columns")
        buf.write(",".join(format_cell(c) for c in row) + "\n")
    return buf.getvalue()


def write_table(dest: Union[str, TextIO], columns: Sequence[str],
                rows: Iterable[Sequence[Cell]],
                manifest: Optional[Mapping[str, Cell]] = None) -> None:
    text = table_to_string(columns, rows, manifest)
    if isinstance(dest, str):
        with open(dest, "w", newline="") as fp:
            fp.write(text)
    else:
        dest.write(text)


def read_table(source: Union[str, TextIO]):
    """Parse a table written by write_table back into
    (columns, rows-of-strings, manifest)."""
    if isinstance(source, str):
        with open(source, "r", newline="") as fp:
            lines = fp.read().splitlines()
    else:
        lines = source.read().splitlines()
    manifest = {}
    i = 0
    while i < len(lines) and lines[i].startswith("#"):
        body = lines[i][1:].strip()
        if "=" in body:
            key, _, val = body.partition("=")
            manifest[key.strip()] = val.strip()
        i += 1
    if i >= len(lines):
        raise ValueError("table has no header row")
    columns = lines[i].split(",")
    rows = [line.split(",") for line in lines[i + 1:] if line]
    return columns, rows, manifest
