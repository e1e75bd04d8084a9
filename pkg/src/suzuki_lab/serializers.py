"""JSON and CSV serialization for suzuki-lab dataclass models.

Provides ``to_dict`` and ``to_json`` that handle Enum, Path, numpy scalars
and computed ``@property`` fields, plus ``write_csv`` for the tabular side
of a report.  JSON output is byte-stable: keys are sorted and floats are
rounded to 12 significant digits.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import math
from collections.abc import Sequence
from enum import Enum
from pathlib import Path
from typing import Any

import numpy as np


FLOAT_DIGITS = 12


def _round_float(x: float) -> float | None:
    if math.isnan(x):
        return None
    if math.isinf(x):
        return x
    return float(f"{x:.{FLOAT_DIGITS}g}")


def _normalize(obj: Any) -> Any:
    """Recursively convert values to JSON-friendly types.

    Enum → ``.value``, Path → ``str``, numpy scalars and arrays → Python
    numbers and lists, sets → sorted lists, floats rounded.
    """
    if isinstance(obj, dict):
        return {str(_normalize(k)): _normalize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_normalize(v) for v in obj]
    if isinstance(obj, (set, frozenset)):
        return sorted(_normalize(v) for v in obj)
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, Path):
        return str(obj)
    if isinstance(obj, np.ndarray):
        return _normalize(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _round_float(float(obj))
    return obj


# Dataclass name -> computed @property names copied into "summary".
_COMPUTED_PROPERTIES: dict[str, list[str]] = {
    "ExperimentReport": [
        "passed_count",
        "failed_count",
        "report_only_count",
        "overall_status",
    ],
    "ReportManifest": [
        "passed_count",
        "failed_count",
        "report_only_count",
        "overall_status",
    ],
    "Summary": [
        "run_count",
        "failed_count",
        "q_values",
    ],
}


def to_dict(obj: Any) -> dict[str, Any]:
    """Convert a dataclass instance to a plain dict.

    * Enum values → their ``.value`` string.
    * Path objects → ``str(path)``.
    * ``@property`` fields listed in ``_COMPUTED_PROPERTIES`` are injected
      into a top-level ``"summary"`` key so consumers don't need to
      recompute them.
    """
    if not dataclasses.is_dataclass(obj) or isinstance(obj, type):
        msg = f"Expected a dataclass instance, got {type(obj).__name__}"
        raise TypeError(msg)

    result = _normalize(dataclasses.asdict(obj))

    prop_names = _COMPUTED_PROPERTIES.get(type(obj).__name__)
    if prop_names:
        result["summary"] = {name: _normalize(getattr(obj, name, None)) for name in prop_names}

    return result


def to_json(obj: Any, **kwargs: Any) -> str:
    """Serialize a dataclass instance to a JSON string.

    Defaults to ``indent=2`` and ``sort_keys=True``; any other keyword
    arguments go to ``json.dumps``.
    """
    kwargs.setdefault("indent", 2)
    kwargs.setdefault("sort_keys", True)
    return json.dumps(to_dict(obj), **kwargs)


def dumps(payload: Any) -> str:
    """Canonical JSON text of an already plain payload (trailing newline)."""
    return json.dumps(_normalize(payload), indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def write_json(path: Path, obj: Any) -> Path:
    payload = to_dict(obj) if dataclasses.is_dataclass(obj) else obj
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(payload), encoding="utf-8")
    return path


def csv_value(value: Any) -> Any:
    value = _normalize(value)
    if value is None:
        return ""
    if isinstance(value, list):
        return " ".join(str(v) for v in value)
    return value


def write_csv(path: Path, columns: Sequence[str], rows: Sequence[dict[str, Any]]) -> Path:
    """Header row first, then ``rows`` in order with columns in ``columns`` order."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=list(columns), extrasaction="ignore", lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: csv_value(row.get(k)) for k in columns})
    return path


def read_csv(path: Path) -> list[dict[str, str]]:
    with path.open(encoding="utf-8", newline="") as f:
        return list(csv.DictReader(f))
