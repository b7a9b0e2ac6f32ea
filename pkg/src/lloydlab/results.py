"""Result tables: atomic persistence and plot-data emission."""
from __future__ import annotations

import json
import math
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


@dataclass
class ResultTable:
    name: str
    columns: list[str]
    units: dict[str, str] = field(default_factory=dict)
    rows: list[tuple] = field(default_factory=list)
    provenance: dict = field(default_factory=dict)

    def column(self, name: str) -> list:
        i = self.columns.index(name)
        return [row[i] for row in self.rows]

    def add(self, **values) -> None:
        missing = set(self.columns) - set(values)
        extra = set(values) - set(self.columns)
        if missing or extra:
            raise ValueError(f"row mismatch: missing {sorted(missing)}, extra {sorted(extra)}")
        self.rows.append(tuple(values[c] for c in self.columns))


def format_value(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        return format(v, ".17g")
    return str(v)


def render_rows(columns, rows, sep: str = ",") -> str:
    lines = [sep.join(columns)]
    lines.extend(sep.join(format_value(v) for v in row) for row in rows)
    return "\n".join(lines) + "\n"


def atomic_write(path, text: str) -> None:
    """Write via a temporary file in the same directory, then rename."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_table(table: ResultTable, out_dir) -> Path:
    """Persist ``<name>.csv`` and its ``<name>.meta.json`` sidecar; returns the csv path."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / f"{table.name}.csv"
    meta = {"columns": table.columns, "units": table.units, "n_rows": len(table.rows),
            "provenance": table.provenance}
    atomic_write(out_dir / f"{table.name}.meta.json", json.dumps(meta, indent=2, sort_keys=True) + "\n")
    atomic_write(csv_path, render_rows(table.columns, table.rows))
    return csv_path


def read_table(csv_path) -> ResultTable:
    csv_path = Path(csv_path)
    lines = csv_path.read_text().splitlines()
    columns = lines[0].split(",")
    rows = [tuple(_parse(v) for v in ln.split(",")) for ln in lines[1:]]
    meta_path = csv_path.with_suffix(".meta.json")
    meta = json.loads(meta_path.read_text()) if meta_path.exists() else {}
    name = csv_path.name[: -len(".csv")]
    return ResultTable(name=name, columns=columns, units=meta.get("units", {}), rows=rows,
                       provenance=meta.get("provenance", {}))


def _parse(v: str):
    if v in ("true", "false"):
        return v == "true"
    try:
        return int(v)
    except ValueError:
        pass
    try:
        return float(v)
    except ValueError:
        return v


PLOT_KINDS = {
    # kind: (output columns, source column per output column)
    "fourier": (("t", "Re", "Im", "stderr"), ("t", "re", "im", "stderr")),
    "level-stats": (("L", "normalized_count", "stderr", "oracle"),
                    ("L", "normalized_count", "stderr", "oracle")),
    "density": (("x", "rho", "stderr"), ("x", "rho", "stderr")),
    "ids": (("E", "ids", "stderr"), ("E", "ids", "stderr")),
}


def emit_plot_data(table: ResultTable, kind: str, path) -> Path:
    """Whitespace-separated columns for external plotting; header-only if empty."""
    if kind not in PLOT_KINDS:
        raise ValueError(f"unknown plot kind {kind!r}; choose from {sorted(PLOT_KINDS)}")
    out_cols, src_cols = PLOT_KINDS[kind]
    missing = [c for c in src_cols if c not in table.columns]
    if missing:
        raise ValueError(f"table {table.name!r} lacks columns {missing} needed for {kind!r}")
    idx = [table.columns.index(c) for c in src_cols]
    rows = [tuple(row[i] for i in idx) for row in table.rows]
    path = Path(path)
    atomic_write(path, render_rows(out_cols, rows, sep=" "))
    return path
