"""
Report Writers
Writes CSV and JSON artifacts of the CLI commands; JSON records are checked
against their schemas before they touch the disk.
"""

import csv
import io
import json
import logging
import math
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Union

import jsonschema
import numpy as np

logger = logging.getLogger(__name__)

_NUMBER = {"type": "number"}
_COUNT = {"type": "integer", "minimum": 0}
_NULLABLE_NUMBER = {"type": ["number", "null"]}

TABLE2_ROW_SCHEMA = {
    "type": "object",
    "required": ["a", "tol", "steps", "fd_evals", "fa_evals", "s_max", "linf_error"],
    "properties": {
        "a": _NUMBER,
        "tol": _NUMBER,
        "steps": _COUNT,
        "fd_evals": _COUNT,
        "fa_evals": _COUNT,
        "s_max": _COUNT,
        "linf_error": _NULLABLE_NUMBER,
        "status": {"type": "string"},
        "within_bands": {"type": ["boolean", "null"]},
        "trace": {"type": "array"},
    },
}

STABILITY_METRICS_SCHEMA = {
    "type": "object",
    "required": ["scheme", "s", "eta", "d_s", "a_s"],
    "properties": {
        "scheme": {"type": "string", "enum": ["ad1", "arkc"]},
        "s": {"type": "integer", "minimum": 1},
        "eta": _NUMBER,
        "d_s": {"type": "number", "minimum": 0},
        "a_s": {"type": "number", "minimum": 0},
    },
}

REPORT_SCHEMA = {
    "type": "object",
    "required": ["command", "rows"],
    "properties": {
        "command": {"type": "string"},
        "provenance": {"type": "string"},
        "rows": {"type": "array", "items": {"type": "object"}},
        "metrics": {"type": "object"},
    },
}


def _plain(value: Any) -> Any:
    """Convert numpy scalars/arrays and non-finite floats into JSON-safe values"""
    if isinstance(value, np.ndarray):
        return [_plain(v) for v in value.tolist()]
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating, float)):
        value = float(value)
        return value if math.isfinite(value) else None
    if isinstance(value, (np.bool_,)):
        return bool(value)
    if isinstance(value, dict):
        return {k: _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    return value


def _format_cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def rows_to_csv(rows: Iterable[Dict[str, Any]], columns: Sequence[str],
                comment: Optional[str] = None) -> str:
    """Render rows as CSV text with a fixed column order"""
    buffer = io.StringIO()
    if comment:
        buffer.write(f"# {comment}\n")
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_format_cell(row.get(column)) for column in columns])
    return buffer.getvalue()


def validate_record(record: Dict[str, Any], schema: Dict[str, Any]) -> Dict[str, Any]:
    """Validate a JSON record and return its JSON-safe form"""
    plain = _plain(record)
    jsonschema.validate(instance=plain, schema=schema)
    return plain


def write_csv(path: Union[str, Path, None], rows: List[Dict[str, Any]], columns: Sequence[str],
              comment: Optional[str] = None) -> str:
    """Write rows as CSV; with no path the text is only returned"""
    text = rows_to_csv(rows, columns, comment)
    if path is not None:
        _write_text(Path(path), text)
    return text


def write_json(path: Union[str, Path, None], record: Dict[str, Any],
               schema: Dict[str, Any] = REPORT_SCHEMA) -> str:
    """Validate a record against its schema and write it as pretty-printed JSON"""
    plain = validate_record(record, schema)
    text = json.dumps(plain, indent=2, sort_keys=False) + "\n"
    if path is not None:
        _write_text(Path(path), text)
    return text


def _write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    logger.info(f"Wrote {path}", extra={"event": "report_written", "path": str(path)})
