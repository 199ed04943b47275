"""CSV/JSON input and output with reproducible formatting.

Output files embed the tool version and the resolved configuration.
Floats are written with ``repr`` (shortest representation that parses
back exactly), newlines are LF, so repeated runs are byte-identical.
"""

from __future__ import annotations

import csv
import io as _io
import json
from pathlib import Path

import numpy as np

from .errors import ParseError


def fmt(value) -> str:
    """Round-trip decimal representation of a scalar."""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def read_xy_csv(path):
    """Read an ``x,y`` CSV (header required, '#' comments skipped)."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"input file not found: {path}")
    try:
        with open(path, newline="") as fh:
            rows = [r for r in csv.reader(fh)
                    if r and not r[0].lstrip().startswith("#")]
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise ParseError(f"{path}: empty file")
    header = [c.strip().lower() for c in rows[0]]
    if header[:2] != ["x", "y"]:
        raise ParseError(f"{path}: expected header 'x,y', got {rows[0]!r}")
    xs, ys = [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) < 2:
            raise ParseError(f"{path}:{lineno}: expected two columns")
        try:
            xs.append(float(row[0]))
            ys.append(float(row[1]))
        except ValueError as exc:
            raise ParseError(f"{path}:{lineno}: non-numeric value") from exc
    if not xs:
        raise ParseError(f"{path}: no data rows")
    return np.asarray(xs), np.asarray(ys)


def _header_lines(version: str, config: dict) -> list[str]:
    return [
        f"# dekernel {version}",
        "# config: " + json.dumps(config, sort_keys=True, separators=(",", ":")),
    ]


def write_table_csv(path, version: str, config: dict, header: list[str], rows):
    """Write a commented, deterministic CSV table."""
    buf = _io.StringIO()
    for line in _header_lines(version, config):
        buf.write(line + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([cell if isinstance(cell, str) else fmt(cell) for cell in row])
    Path(path).write_text(buf.getvalue(), newline="")


def write_json(path, payload: dict):
    """Write deterministic, human-readable JSON."""
    text = json.dumps(payload, sort_keys=True, indent=2) + "\n"
    Path(path).write_text(text, newline="")


def load_json(path) -> dict:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"input file not found: {path}")
    try:
        return json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON ({exc})") from exc
