"""Deterministic CSV/JSON writers with a provenance header."""
from __future__ import annotations

import json
from pathlib import Path

from .. import __version__

FLOAT_FORMAT = "%.16e"


def _cell(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float) or hasattr(value, "dtype"):
        return FLOAT_FORMAT % float(value)
    return str(value)


def provenance(command: str, digest: str) -> str:
    return f"# gravprobe {__version__} command={command} config_sha256={digest}"


def write_table(out_dir, name: str, columns, rows, *, command: str, digest: str,
                fmt: str = "csv") -> Path:
    """Write ``rows`` (sequences matching ``columns``) and return the file path.

    CSV: '#' provenance line, header row, '%.16e' floats, LF endings, UTF-8.
    JSON: the same content as {"provenance", "columns", "rows"}.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    columns = list(columns)
    if fmt == "json":
        path = out / f"{name}.json"
        payload = {
            "provenance": provenance(command, digest),
            "columns": columns,
            "rows": [[_json_cell(v) for v in row] for row in rows],
        }
        path.write_text(json.dumps(payload, indent=1) + "\n", encoding="utf-8")
        return path
    path = out / f"{name}.csv"
    lines = [provenance(command, digest), ",".join(columns)]
    lines += [",".join(_cell(v) for v in row) for row in rows]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    return path


def _json_cell(value):
    if isinstance(value, bool) or value is None:
        return value
    if isinstance(value, (int, str)):
        return value
    if hasattr(value, "dtype") or isinstance(value, float):
        return float(value)
    return str(value)
