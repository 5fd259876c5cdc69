"""Deterministic file output: 9-significant-digit floats, LF endings, atomic writes.

Every artifact the command line emits goes through these helpers so that a
repeated run with identical inputs produces byte-identical files.
"""

from __future__ import annotations

import json
import math
import os
import tempfile
from pathlib import Path


def format_float(value: float) -> str:
    """Canonical text form of a float: 9 significant digits, shortest spelling."""
    if isinstance(value, float) and not math.isfinite(value):
        return repr(value)
    return f"{value:.9g}"


def _quantize(obj):
    """Round every float in a JSON-ready structure to the canonical precision."""
    if isinstance(obj, bool):
        return obj
    if isinstance(obj, float):
        return float(format_float(obj)) if math.isfinite(obj) else obj
    if isinstance(obj, dict):
        return {key: _quantize(val) for key, val in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_quantize(val) for val in obj]
    return obj


def json_text(obj) -> str:
    return json.dumps(_quantize(obj), indent=2, sort_keys=False) + "\n"


def csv_text(header, rows) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(format_float(v) if isinstance(v, float) else str(v) for v in row))
    return "\n".join(lines) + "\n"


def write_text(path, text: str) -> Path:
    """Write text to path atomically (temp file + rename), LF line endings."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)
        os.replace(tmp_name, path)
    except BaseException:
        try:
            os.unlink(tmp_name)
        except OSError:
            pass
        raise
    return path
