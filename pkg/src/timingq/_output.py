"""Deterministic text output: shortest round-trip floats, stable JSON, CSV
with an embedded config header.  Everything downstream of these helpers is
byte-identical across runs with the same inputs."""

from __future__ import annotations

import json
import math
import os
from pathlib import Path

OUTDIR_ENV = "TIMINGQ_OUTDIR"


def fmt(x) -> str:
    """Render a number for CSV: round-trip repr for floats, plain ints."""
    if isinstance(x, bool):
        return str(x).lower()
    if isinstance(x, (int,)) and not isinstance(x, bool):
        return str(x)
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return repr(x)


def json_text(obj) -> str:
    """Stable-key JSON with a trailing newline."""
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def config_comment(config: dict) -> str:
    return "# " + json.dumps(config, sort_keys=True)


def csv_text(columns, rows, config: dict | None = None) -> str:
    """CSV with an optional leading '# {json config}' comment line.

    Cells may be numbers, strings, or None (rendered empty).
    """
    lines = []
    if config is not None:
        lines.append(config_comment(config))
    lines.append(",".join(columns))
    for row in rows:
        cells = []
        for cell in row:
            if cell is None:
                cells.append("")
            elif isinstance(cell, str):
                cells.append(cell)
            else:
                cells.append(fmt(cell))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def resolve_out_path(out: str | None) -> Path | None:
    """Apply the output-directory environment default to a relative path."""
    if out is None:
        return None
    path = Path(out)
    base = os.environ.get(OUTDIR_ENV)
    if base and not path.is_absolute():
        path = Path(base) / path
    return path


def emit(text: str, out: str | None) -> None:
    """Write to the resolved path (creating parents) or stdout."""
    path = resolve_out_path(out)
    if path is None:
        print(text, end="")
    else:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
