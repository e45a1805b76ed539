"""CSV and JSON output. Every file starts with the version and the run config."""
import csv
import dataclasses
import enum
import json
import math
import sys
from contextlib import contextmanager
from pathlib import Path
from typing import Any, Iterable, Iterator, Mapping, Optional, Sequence, TextIO

import numpy as np

from ..definitions.constants import OutputFormat
from ..definitions.tables import Tables
from ..tools.version import version_header


def format_float(value: float) -> str:
    if math.isnan(value):
        return "nan"
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return f"{value:.15g}"


def format_value(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format_float(float(value))
    if isinstance(value, enum.Enum):
        return format_value(value.value)
    return str(value)


def json_safe(obj: Any) -> Any:
    """Plain JSON types; non-finite floats become the strings inf, -inf, nan."""
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        obj = dataclasses.asdict(obj)
    if isinstance(obj, Mapping):
        return {str(k): json_safe(v) for k, v in obj.items()}
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, (list, tuple)):
        return [json_safe(v) for v in obj]
    if isinstance(obj, enum.Enum):
        return json_safe(obj.value)
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        value = float(obj)
        return value if math.isfinite(value) else format_float(value)
    if isinstance(obj, Path):
        return str(obj)
    return obj


class TableWriter:
    def __init__(
        self,
        config: Mapping[str, Any],
        output_format: OutputFormat = OutputFormat.CSV,
        path: Optional[str] = None,
    ) -> None:
        self.config = json_safe(config)
        self.output_format = output_format
        self.path = path

    @contextmanager
    def _open(self, path: Optional[str]) -> Iterator[TextIO]:
        if path is None:
            yield sys.stdout
            return
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="", encoding="utf-8") as f:
            yield f

    def header_lines(self) -> Sequence[str]:
        config = json.dumps(self.config, sort_keys=True)
        return [f"# {version_header()}", f"# config: {config}"]

    def write_table(
        self,
        table: Tables,
        rows: Iterable[Sequence[Any]],
        path: Optional[str] = None,
        extra: Optional[Mapping[str, Any]] = None,
    ) -> None:
        """Rows in the column order of the table, to path or the configured path."""
        rows = [list(row) for row in rows]
        target = path if path is not None else self.path
        if self.output_format == OutputFormat.JSON:
            document = {"table": table.name, "columns": table.columns, "rows": rows}
            document.update(extra or {})
            self.write_document(document, target)
            return
        with self._open(target) as f:
            for line in self.header_lines():
                f.write(f"{line}\n")
            for key, value in (extra or {}).items():
                f.write(f"# {key}: {json.dumps(json_safe(value), sort_keys=True)}\n")
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(table.columns)
            for row in rows:
                writer.writerow([format_value(value) for value in row])

    def write_document(
        self, payload: Mapping[str, Any], path: Optional[str] = None
    ) -> None:
        target = path if path is not None else self.path
        if self.output_format == OutputFormat.CSV and "rows" not in payload:
            self.write_table(
                Tables.Report,
                [(k, _cell(v)) for k, v in json_safe(payload).items()],
                path,
            )
            return
        document = {"version": version_header(), "config": self.config}
        document.update(json_safe(payload))
        with self._open(target) as f:
            json.dump(document, f, indent=2, sort_keys=False, allow_nan=False)
            f.write("\n")


def _cell(value: Any) -> str:
    if isinstance(value, (list, dict)):
        return json.dumps(value, sort_keys=True)
    return format_value(value)
