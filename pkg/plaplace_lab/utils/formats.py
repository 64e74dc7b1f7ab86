"""
Output format handling: plot-ready CSV tables and JSON reports.

CSV files use '.' decimals, ',' separators and 17 significant digits so that
every double round-trips exactly. An optional first line starting with '#'
carries a version header; readers skip it.
"""

import json
import math
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from .exceptions import SpecError

PathLike = Union[str, Path]


class OutputFormats:
    """Container for supported output formats."""

    FORMATS = {
        'csv': {
            'name': 'Comma-separated values',
            'extensions': ['.csv'],
            'description': 'Plot-ready numeric tables (fields, sweeps)'
        },
        'json': {
            'name': 'JSON',
            'extensions': ['.json'],
            'description': 'Specs, reports, certificates and verdicts'
        }
    }

    @classmethod
    def get_format_info(cls, format_name: str) -> Dict[str, Any]:
        """Get information about a specific format."""
        return cls.FORMATS.get(format_name, {})

    @classmethod
    def detect_format(cls, path: PathLike) -> Optional[str]:
        """Detect the format of a file from its extension."""
        suffix = Path(path).suffix.lower()
        for name, info in cls.FORMATS.items():
            if suffix in info['extensions']:
                return name
        return None

    @classmethod
    def expect(cls, path: PathLike, format_name: str) -> Path:
        """Return path as a Path, or raise SpecError unless its extension belongs to format_name."""
        found = cls.detect_format(path)
        if found != format_name:
            info = cls.get_format_info(format_name)
            raise SpecError(f"{path}: expected a {info['name']} file ({', '.join(info['extensions'])})")
        return Path(path)


def format_number(value: Any) -> str:
    """Render a number with 17 significant digits."""
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    x = float(value)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def write_csv(path: PathLike, header: Sequence[str], rows: Iterable[Sequence[Any]],
              comment: Optional[str] = None) -> Path:
    """Write a numeric table."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = []
    if comment:
        lines.append(f"# {comment}")
    lines.append(",".join(header))
    for row in rows:
        if len(row) != len(header):
            raise SpecError(f"Row of length {len(row)} does not match header of length {len(header)}")
        lines.append(",".join(format_number(v) for v in row))
    with open(path, 'w', encoding='utf-8', newline='\n') as f:
        f.write("\n".join(lines) + "\n")
    return path


def read_csv(path: PathLike) -> Tuple[List[str], np.ndarray]:
    """Read a table written by write_csv; returns (header, rows as a 2D array)."""
    path = Path(path)
    if not path.exists():
        raise SpecError(f"File not found: {path}")
    header: Optional[List[str]] = None
    rows = []
    with open(path, 'r', encoding='utf-8') as f:
        for raw in f:
            line = raw.strip()
            if not line or line.startswith('#'):
                continue
            if header is None:
                header = [h.strip() for h in line.split(',')]
                continue
            try:
                rows.append([float(v) for v in line.split(',')])
            except ValueError as e:
                raise SpecError(f"Malformed CSV row in {path}: {line!r}") from e
    if header is None:
        raise SpecError(f"Empty CSV file: {path}")
    data = np.array(rows, dtype=float).reshape(len(rows), len(header))
    return header, data


def to_jsonable(value: Any) -> Any:
    """Convert numpy values and non-finite floats into JSON-safe objects (NaN/inf become null)."""
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [to_jsonable(v) for v in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        x = float(value)
        return x if math.isfinite(x) else None
    return value


def dumps_json(data: Any) -> str:
    """Serialize a report deterministically."""
    return json.dumps(to_jsonable(data), indent=2, allow_nan=False)


def write_json(path: PathLike, data: Any) -> Path:
    """Write a JSON report."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8', newline='\n') as f:
        f.write(dumps_json(data) + "\n")
    return path


def read_json(path: PathLike) -> Any:
    """Read a JSON document, mapping I/O and syntax problems to SpecError."""
    path = Path(path)
    if not path.exists():
        raise SpecError(f"File not found: {path}")
    try:
        with open(path, 'r', encoding='utf-8') as f:
            return json.load(f)
    except json.JSONDecodeError as e:
        raise SpecError(f"Malformed JSON in {path}: {e}") from e
