"""Result artifact storage for vortexsheet runs."""

import json
import math
import os
import tempfile
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence

from vortexsheet.config import config
from vortexsheet.db import log_system_event
from vortexsheet.errors import ValidationFailure

FLOAT_FORMAT = "%.17g"


def format_cell(value: Any) -> str:
    """CSV text of one value; floats keep full precision."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return FLOAT_FORMAT % value
    if value is None:
        return ""
    return str(value)


def _json_safe(value: Any) -> Any:
    """Replace non-finite floats by None so the JSON stays strict."""
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {str(k): _json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    return value


class ArtifactStore:
    """Writes CSV and JSON artifacts below one output directory.

    Every write goes through a temporary file and os.replace, so a reader
    never sees a half-written artifact. Rewriting identical bytes is skipped.
    """

    def __init__(self, out_dir: Optional[str] = None):
        self.out_dir = Path(out_dir or config.out_dir)

    def path_for(self, name: str) -> Path:
        if not name or Path(name).is_absolute() or ".." in Path(name).parts:
            raise ValidationFailure(f"invalid artifact name {name!r}")
        return self.out_dir / name

    def _write_atomic(self, name: str, text: str) -> Path:
        target = self.path_for(name)
        target.parent.mkdir(parents=True, exist_ok=True)
        data = text.encode("utf-8")
        if target.exists() and target.read_bytes() == data:
            log_system_event("INFO", f"artifact {target} unchanged", "storage")
            return target

        fd, tmp_name = tempfile.mkstemp(dir=target.parent, prefix=f".{target.name}.", suffix=".tmp")
        try:
            with os.fdopen(fd, "wb") as handle:
                handle.write(data)
            os.replace(tmp_name, target)
        except OSError:
            if os.path.exists(tmp_name):
                os.unlink(tmp_name)
            raise
        log_system_event("INFO", f"wrote artifact {target} ({len(data)} bytes)", "storage")
        return target

    def write_csv(self, name: str, columns: Sequence[str], rows: Sequence[Mapping[str, Any]]) -> Path:
        lines = [",".join(columns)]
        for row in rows:
            lines.append(",".join(format_cell(row.get(col)) for col in columns))
        return self._write_atomic(name, "\n".join(lines) + "\n")

    def write_json(self, name: str, payload: Any) -> Path:
        text = json.dumps(_json_safe(payload), sort_keys=True, indent=2, allow_nan=False)
        return self._write_atomic(name, text + "\n")

    def write_table(
        self, stem: str, columns: Sequence[str], rows: Sequence[Mapping[str, Any]], fmt: str = "csv"
    ) -> Path:
        """Rows as <stem>.csv, or as a JSON list of records for fmt='json'."""
        if fmt == "csv":
            return self.write_csv(f"{stem}.csv", columns, rows)
        if fmt == "json":
            records: List[Dict[str, Any]] = [{col: row.get(col) for col in columns} for row in rows]
            return self.write_json(f"{stem}.json", records)
        raise ValidationFailure(f"unknown output format {fmt!r}")


artifact_store = ArtifactStore()
